#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "amor/config.hpp"
#include "amor/error.hpp"
#include "amor/io.hpp"
#include "amor/scenario.hpp"
#include "amor/validate.hpp"

using namespace amor;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("amor_test_scenario_" + name);
  fs::remove_all(dir);
  return dir;
}

Scenario make(ScenarioName name, const fs::path& dir, std::vector<std::string> overrides = {}) {
  Scenario s;
  s.name = name;
  s.config = paper_default_config();
  s.overrides = std::move(overrides);
  s.output_dir = dir;
  return s;
}

const std::vector<std::string> kSmallLockin = {"scenario.lockin_sweep_points=61",
                                               "scenario.discrimination_points=21"};

void check_manifest(const fs::path& dir, const RunManifest& m) {
  const auto j = nlohmann::json::parse(io::read_file(dir / "manifest.json"));
  CHECK(j.at("scenario") == m.scenario);
  CHECK(j.at("config_hash") == m.config_hash);
  CHECK(j.at("tool_version") == std::string(kToolVersion));
  REQUIRE(j.at("files").size() == m.files.size());
  for (const auto& f : j.at("files")) {
    const std::string name = f.at("name");
    const std::string body = io::read_file(dir / name);
    CHECK(f.at("sha256") == io::sha256_hex(body));
    CHECK(f.at("bytes").get<std::uintmax_t>() == body.size());
  }
  CHECK(fs::exists(dir / "timing.json"));
}

}  // namespace

TEST_CASE("scenario names") {
  for (auto n : {ScenarioName::dc_sweep, ScenarioName::lockin_sweep, ScenarioName::sa_compare,
                 ScenarioName::sensitivity, ScenarioName::temp_scan, ScenarioName::validate}) {
    CHECK(parse_scenario_name(scenario_name(n)) == n);
  }
  CHECK(scenario_name(ScenarioName::temp_scan) == "temp-scan");
  CHECK_THROWS_AS(parse_scenario_name("no-such"), ConfigError);
}

TEST_CASE("dc sweep is odd and peaks at the linewidth") {
  const auto vc = validate_config(paper_default_config());
  const auto r = dc_sweep(vc);
  const std::size_t n = r.b.size();
  REQUIRE(n % 2 == 1);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(r.rotation[i] == doctest::Approx(-r.rotation[n - 1 - i]).epsilon(1e-6));
    CHECK(r.rotation[i] == doctest::Approx(r.closed_form[i]).epsilon(1e-3));
    peak = std::max(peak, std::abs(r.closed_form[i]));
  }
  const auto imax = std::max_element(r.rotation.begin(), r.rotation.end()) - r.rotation.begin();
  const auto imin = std::min_element(r.rotation.begin(), r.rotation.end()) - r.rotation.begin();
  const double width = vc.config.cell.relaxation_Gamma / (2.0 * 3.141592653589793 * vc.config.field.gamma);
  const double step = r.b[1] - r.b[0];
  CHECK(std::abs(std::abs(r.b[imax]) - width) <= step);
  CHECK(std::abs(std::abs(r.b[imin]) - width) <= step);
  CHECK(r.b[imax] * r.b[imin] < 0.0);
}

TEST_CASE("manifest digests match the written files") {
  const auto dir = fresh_dir("manifest");
  const auto m = run_scenario(make(ScenarioName::dc_sweep, dir));
  CHECK(m.passed);
  check_manifest(dir, m);
  CHECK(std::any_of(m.files.begin(), m.files.end(), [](const auto& f) { return f.name == "dc_sweep.txt"; }));
  CHECK(std::any_of(m.files.begin(), m.files.end(), [](const auto& f) { return f.name == "config.json"; }));
  fs::remove_all(dir);
}

TEST_CASE("reruns are byte identical") {
  for (auto name : {ScenarioName::dc_sweep, ScenarioName::lockin_sweep}) {
    const auto a = fresh_dir("rerun_a");
    const auto b = fresh_dir("rerun_b");
    const auto ma = run_scenario(make(name, a, kSmallLockin));
    const auto mb = run_scenario(make(name, b, kSmallLockin));
    check_manifest(a, ma);
    REQUIRE(ma.files.size() == mb.files.size());
    for (const auto& f : ma.files) {
      INFO(f.name);
      CHECK(io::read_file(a / f.name) == io::read_file(b / f.name));
    }
    CHECK(io::read_file(a / "manifest.json") == io::read_file(b / "manifest.json"));
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST_CASE("lock-in sweep finds both resonances") {
  const auto dir = fresh_dir("lockin");
  const auto m = run_scenario(make(ScenarioName::lockin_sweep, dir, kSmallLockin));
  const auto s = nlohmann::json::parse(io::read_file(dir / "summary.json"));
  const double step = s.at("grid_step_G");
  CHECK(std::abs(s.at("resonance_positive_G").get<double>() - 0.8) <= step);
  CHECK(std::abs(s.at("resonance_negative_G").get<double>() + 0.8) <= step);
  CHECK(fs::exists(dir / "spin_trajectory.txt"));
  check_manifest(dir, m);
  fs::remove_all(dir);
}

TEST_CASE("failed run leaves no partial files") {
  const auto dir = fresh_dir("rollback");
  try {
    run_scenario(make(ScenarioName::temp_scan, dir, {"scenario.temp_grid=[40.8, 80.0]"}));
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("temp-scan") != std::string::npos);
  }
  CHECK(!fs::exists(dir));

  // Pre-existing directory is kept but nothing new remains in it.
  fs::create_directories(dir);
  io::write_file(dir / "keep.txt", "x");
  CHECK_THROWS_AS(run_scenario(make(ScenarioName::temp_scan, dir, {"scenario.temp_grid=[30.0]"})), Error);
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
  fs::remove_all(dir);
}

TEST_CASE("bad overrides are config errors") {
  const auto dir = fresh_dir("override");
  CHECK_THROWS_AS(run_scenario(make(ScenarioName::dc_sweep, dir, {"pump.nope=1"})), ConfigError);
  CHECK_THROWS_AS(run_scenario(make(ScenarioName::dc_sweep, dir, {"pump.duty=1.2"})), ConfigError);
  CHECK_THROWS_AS(run_scenario(make(ScenarioName::dc_sweep, dir, {"pumpduty"})), ConfigError);
  CHECK(!fs::exists(dir));
}

TEST_CASE("validation reports an oversized integration step") {
  auto c = paper_default_config();
  c.simulation.dt = 1.7241379310344828e-07;
  const auto report = run_validation(c);
  CHECK(!report.all_passed());
  bool found = false;
  for (const auto& check : report.checks) {
    if (check.name == "rwa_vs_integrator") {
      found = true;
      CHECK(!check.passed);
      CHECK(check.deviation > 0.0);
      CHECK(check.detail.find("exceeds") != std::string::npos);
    }
  }
  CHECK(found);
  CHECK(format_validation(report).find("FAIL\trwa_vs_integrator") != std::string::npos);

  const auto dir = fresh_dir("validate_fail");
  const auto m = run_scenario(make(ScenarioName::validate, dir, {"simulation.dt=1.7241379310344828e-07"}));
  CHECK(!m.passed);
  const auto j = nlohmann::json::parse(io::read_file(dir / "manifest.json"));
  CHECK(j.at("passed") == false);
  fs::remove_all(dir);
}

TEST_CASE("temperature scan normalization") {
  auto c = paper_default_config();
  const auto vc = validate_config(c);
  const auto r = temp_scan(vc, {40.8, 55.0});
  REQUIRE(r.temperatures.size() == 2);
  CHECK(r.signal_norm[0] == 1.0);
  CHECK(r.snr_coherent_norm[0] == 1.0);
  CHECK(r.signal_norm[1] > 1.0);
  CHECK(r.floor_squeezed[0] < r.floor_coherent[0]);
  CHECK(r.floor_squeezed[1] < r.floor_coherent[1]);
  CHECK(r.density[1] == doctest::Approx(2.103021288e11).epsilon(1e-6));
  CHECK_THROWS_AS(temp_scan(vc, {45.0, 55.0}), DomainError);
  CHECK_THROWS_AS(temp_scan(vc, {}), DomainError);

  const auto t40 = config_at_temperature(vc, 40.3);
  CHECK(t40.config.cell.relaxation_Gamma == doctest::Approx(vc.config.cell.relaxation_Gamma));
  CHECK(t40.config.probe.coupling_kappa == doctest::Approx(vc.config.probe.coupling_kappa));
}

TEST_CASE("doubling probe power lifts the carrier 6 dB and the floor 3 dB") {
  auto c = paper_default_config();
  c.detection.sa_vbw = 50.0;
  const auto lo = sa_compare(validate_config(c));
  c.probe.power *= 2.0;
  const auto hi = sa_compare(validate_config(c));
  const double peak_lo = *std::max_element(lo.coherent.values.begin(), lo.coherent.values.end());
  const double peak_hi = *std::max_element(hi.coherent.values.begin(), hi.coherent.values.end());
  CHECK(peak_hi - peak_lo == doctest::Approx(6.0206).epsilon(0.01));
  CHECK(hi.floor_coherent.floor - lo.floor_coherent.floor == doctest::Approx(3.0103).epsilon(0.03));
}
