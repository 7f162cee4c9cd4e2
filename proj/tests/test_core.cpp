#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "amor/config.hpp"
#include "amor/core.hpp"
#include "amor/error.hpp"
#include "amor/io.hpp"
#include "amor/units.hpp"

using namespace amor;

namespace {

bool has_issue(const ExperimentConfig& c, const std::string& path) {
  for (const auto& i : check_config(c))
    if (i.path == path) return true;
  return false;
}

}  // namespace

TEST_CASE("larmor frequency examples") {
  CHECK(larmor_frequency(0.800, 725e3) == doctest::Approx(580e3).epsilon(1e-12));
  CHECK(larmor_frequency(0.0, 725e3) == 0.0);
  CHECK(larmor_frequency(0.5, 699.58e3) == doctest::Approx(349.79e3).epsilon(1e-12));
  CHECK(larmor_frequency(-0.8, 725e3) == doctest::Approx(580e3));
  CHECK(larmor_angular(-0.8, 725e3) == doctest::Approx(-units::two_pi * 580e3));
}

TEST_CASE("larmor frequency is linear in the field") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = u(rng);
    CHECK(larmor_frequency(a * b, 725e3) == doctest::Approx(a * larmor_frequency(b, 725e3)).epsilon(1e-13));
  }
}

TEST_CASE("rb density passes through the anchor and is increasing") {
  CHECK(rb_number_density(40.3) == 5.5e10);
  // Independent evaluation of the scaled vapor law.
  CHECK(rb_number_density(55.0) == doctest::Approx(2.10302128756e11).epsilon(1e-10));
  CHECK(rb_number_density(70.0) == doctest::Approx(7.32672115061e11).epsilon(1e-10));
  double prev = 0.0;
  for (double t = 20.0; t <= 120.0; t += 0.25) {
    const double n = rb_number_density(t);
    CHECK(n > prev);
    prev = n;
  }
  CHECK_THROWS_AS(rb_number_density(19.9), DomainError);
  CHECK_THROWS_AS(rb_number_density(120.1), DomainError);
}

TEST_CASE("dB and variance conversions") {
  CHECK(db_to_variance(-1.9) == doctest::Approx(0.6457).epsilon(1e-4));
  CHECK(db_to_variance(0.0) == 1.0);
  CHECK(variance_to_db(0.6811) == doctest::Approx(-1.668).epsilon(1e-3));
  CHECK_THROWS_AS(variance_to_db(0.0), DomainError);
  CHECK_THROWS_AS(variance_to_db(-1.0), DomainError);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-60.0, 60.0);
  for (int i = 0; i < 1000; ++i) {
    const double db = u(rng);
    CHECK(std::abs(variance_to_db(db_to_variance(db)) - db) <= 1e-12 * std::max(1.0, std::abs(db)));
    const double v = db_to_variance(db);
    CHECK(std::abs(db_to_variance(variance_to_db(v)) / v - 1.0) <= 1e-12);
  }
}

TEST_CASE("default scenario validates with derived quantities") {
  const auto vc = validate_config(paper_default_config());
  CHECK(vc.derived.larmor_hz == doctest::Approx(580e3));
  CHECK(vc.derived.omega_mod == doctest::Approx(units::two_pi * 580e3));
  CHECK(vc.derived.density == 5.5e10);
  CHECK(vc.derived.shot_asd == doctest::Approx(3.100045927e-9).epsilon(1e-9));
  CHECK(vc.derived.squeeze_variance_out == doctest::Approx(0.9 * std::pow(10.0, -0.19) + 0.1));
  CHECK(vc.derived.dt <= 1.0 / (20.0 * 580e3) * (1 + 1e-12));
  CHECK(validate_config(textbook_gamma_config()).derived.larmor_hz ==
        doctest::Approx(textbook_gamma_config().pump.mod_freq));
}

TEST_CASE("validation names the violated field") {
  auto c = paper_default_config();
  c.pump.duty = 1.2;
  CHECK(has_issue(c, "PumpConfig.duty"));
  try {
    validate_config(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("PumpConfig.duty") != std::string::npos);
  }

  auto n = paper_default_config();
  n.detection.sample_rate = 1e6;
  CHECK(has_issue(n, "DetectionConfig.sample_rate"));
  n.detection.sample_rate = 2.32e6;
  CHECK(has_issue(n, "DetectionConfig.sample_rate"));
  n.detection.sample_rate = 2.33e6;
  CHECK_FALSE(has_issue(n, "DetectionConfig.sample_rate"));
}

TEST_CASE("each single invariant violation is rejected") {
  struct Mutation {
    const char* path;
    void (*apply)(ExperimentConfig&);
  };
  const Mutation mutations[] = {
      {"FieldConfig.gamma", [](ExperimentConfig& c) { c.field.gamma = 0.0; }},
      {"FieldConfig.injection_amplitude", [](ExperimentConfig& c) { c.field.injection_amplitude = -1e-3; }},
      {"FieldConfig.injection_freq", [](ExperimentConfig& c) { c.field.injection_amplitude = 1e-3; }},
      {"PumpConfig.duty", [](ExperimentConfig& c) { c.pump.duty = 0.0; }},
      {"PumpConfig.mod_freq", [](ExperimentConfig& c) { c.pump.mod_freq = -1.0; }},
      {"PumpConfig.peak_rate_R0", [](ExperimentConfig& c) { c.pump.peak_rate_R0 = -1.0; }},
      {"ProbeConfig.power", [](ExperimentConfig& c) { c.probe.power = 0.0; }},
      {"ProbeConfig.wavelength", [](ExperimentConfig& c) { c.probe.wavelength = 0.0; }},
      {"ProbeConfig.coupling_kappa", [](ExperimentConfig& c) { c.probe.coupling_kappa = 0.0; }},
      {"CellConfig.absorption_fraction", [](ExperimentConfig& c) { c.cell.absorption_fraction = 1.0; }},
      {"CellConfig.relaxation_Gamma", [](ExperimentConfig& c) { c.cell.relaxation_Gamma = 0.0; }},
      {"SqueezeConfig.squeezing_dB", [](ExperimentConfig& c) { c.squeeze.squeezing_dB = 0.5; }},
      {"SqueezeConfig.antisqueezing_dB", [](ExperimentConfig& c) { c.squeeze.antisqueezing_dB = -0.5; }},
      {"SqueezeConfig", [](ExperimentConfig& c) { c.squeeze.antisqueezing_dB = 1.0; }},
      {"DetectionConfig.lockin_time_constant", [](ExperimentConfig& c) { c.detection.lockin_time_constant = 0.0; }},
      {"DetectionConfig.lockin_filter_order", [](ExperimentConfig& c) { c.detection.lockin_filter_order = 5; }},
      {"DetectionConfig.sa_rbw", [](ExperimentConfig& c) { c.detection.sa_rbw = 0.5; }},
  };
  for (const auto& m : mutations) {
    auto c = paper_default_config();
    m.apply(c);
    INFO(m.path);
    CHECK(has_issue(c, m.path));
    CHECK_THROWS_AS(validate_config(c), ConfigError);
  }
}

TEST_CASE("config JSON round trip is exact") {
  auto c = paper_default_config();
  c.cell.density_override = 1.2345678901234567e11;
  c.pump.waveform = Waveform::sine;
  const auto j = to_json(c);
  const auto back = config_from_json(nlohmann::json::parse(j.dump()));
  CHECK(to_json(back).dump() == j.dump());
  CHECK(config_hash(back) == config_hash(c));

  const auto path = std::filesystem::temp_directory_path() / "amor_config_roundtrip.json";
  save_config(c, path.string());
  CHECK(config_hash(load_config(path.string())) == config_hash(c));
  std::filesystem::remove(path);
}

TEST_CASE("overrides and unknown keys") {
  auto c = paper_default_config();
  apply_override(c, "pump.duty=0.4");
  CHECK(c.pump.duty == 0.4);
  apply_override(c, "detection.rng_seed=42");
  CHECK(c.detection.rng_seed == 42u);
  apply_override(c, "pump.waveform=sine");
  CHECK(c.pump.waveform == Waveform::sine);
  CHECK_THROWS_AS(apply_override(c, "pump.nope=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "duty"), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"pump":{"dutty":0.5}})")), ConfigError);
  CHECK_THROWS_AS(preset("no-such-preset"), ConfigError);
  CHECK(config_hash(paper_default_config()) == config_hash(preset("paper-default")));
  CHECK(config_hash(paper_default_config()) != config_hash(c));
}

TEST_CASE("derived seeds are stable and label-separated") {
  CHECK(io::derive_seed(1, "white") == io::derive_seed(1, "white"));
  CHECK(io::derive_seed(1, "white") != io::derive_seed(1, "flicker"));
  CHECK(io::derive_seed(1, "white") != io::derive_seed(2, "white"));
  CHECK(io::sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("columnar text round trip") {
  const std::vector<double> a = {0.1, -2.5e-300, 1.0 / 3.0};
  const std::vector<double> b = {1e300, 0.0, -7.0};
  const auto text = io::format_columns({"head"}, {"a", "b"}, {a, b});
  const auto cols = io::parse_columns(text);
  REQUIRE(cols.columns.size() == 2);
  CHECK(cols.names == std::vector<std::string>{"a", "b"});
  CHECK(cols.columns[0] == a);
  CHECK(cols.columns[1] == b);
}
