#include "amor/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <fstream>

#include "amor/core.hpp"
#include "amor/error.hpp"
#include "amor/io.hpp"
#include "amor/noise.hpp"
#include "amor/parallel.hpp"
#include "amor/pipeline.hpp"
#include "amor/spin.hpp"
#include "amor/units.hpp"
#include "amor/validate.hpp"

namespace amor {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::pair<ScenarioName, std::string_view> kNames[] = {
    {ScenarioName::dc_sweep, "dc-sweep"},       {ScenarioName::lockin_sweep, "lockin-sweep"},
    {ScenarioName::sa_compare, "sa-compare"},   {ScenarioName::sensitivity, "sensitivity"},
    {ScenarioName::temp_scan, "temp-scan"},     {ScenarioName::validate, "validate"},
};

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

double resonance_field(const ValidatedConfig& vc) {
  return vc.config.pump.mod_freq / vc.config.field.gamma;
}

std::size_t sa_record_length(const ExperimentConfig& c, double vbw) {
  const auto n = static_cast<std::size_t>(std::llround(c.detection.sample_rate / c.detection.sa_rbw));
  const auto k = static_cast<std::size_t>(std::max(1.0, std::round(c.detection.sa_rbw / vbw)));
  return n + (k - 1) * (n / 2);
}

std::string provenance(const ValidatedConfig& vc, std::uint64_t seed) {
  return config_hash(vc.config) + " seed " + std::to_string(seed);
}

struct SaPair {
  Spectrum coherent, squeezed;
  FloorEstimate floor_coherent, floor_squeezed;
};

SaPair sa_pair(const ValidatedConfig& vc, double vbw) {
  const auto& c = vc.config;
  const std::uint64_t seed = probe_noise_seed(c);
  const std::size_t length = sa_record_length(c, vbw);
  SaPair out;
  parallel_for(2, [&](std::size_t i) {
    const bool squeezed = i == 1;
    const auto series = detector_record(vc, make_noise_model(vc, squeezed), seed, length,
                                        provenance(vc, seed));
    auto trace = sa_trace(series.samples, series.sample_rate, c.detection.sa_rbw, vbw,
                          c.pump.mod_freq, c.scenario.sa_span);
    auto floor = noise_floor_estimate(trace, c.pump.mod_freq, c.scenario.sa_carrier_exclusion);
    (squeezed ? out.squeezed : out.coherent) = std::move(trace);
    (squeezed ? out.floor_squeezed : out.floor_coherent) = floor;
  });
  out.squeezed.vbw = out.coherent.vbw = c.detection.sa_vbw;
  return out;
}

Spectrum crop(const Spectrum& s, double f_max) {
  Spectrum out = s;
  out.freqs.clear();
  out.values.clear();
  for (std::size_t k = 0; k < s.freqs.size(); ++k) {
    if (s.freqs[k] > 0.0 && s.freqs[k] <= f_max) {
      out.freqs.push_back(s.freqs[k]);
      out.values.push_back(s.values[k]);
    }
  }
  return out;
}

json breakdown_json(const NoiseBreakdown& b) {
  const double shot = b.shot_variance;
  auto db = [&](double v) { return v > 0.0 ? json(variance_to_db(v / shot)) : json(nullptr); };
  return {{"shot_variance", b.shot_variance},
          {"squeezed_white_variance", b.squeezed_white_variance},
          {"squeezed_white_dB_re_shot", db(b.squeezed_white_variance)},
          {"excess_variance", b.excess_variance},
          {"excess_dB_re_shot", db(b.excess_variance)},
          {"flicker_variance", b.flicker_variance},
          {"flicker_dB_re_shot", db(b.flicker_variance)}};
}

json floor_json(const FloorEstimate& f) {
  return {{"floor_dB", f.floor}, {"uncertainty_dB", f.uncertainty}, {"spread_dB", f.spread},
          {"bins", f.bins}};
}

/// Files written by one run, removed again if the run fails.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    if (!fs::exists(dir_, ec)) {
      fs::create_directories(dir_, ec);
      if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
      created_dir_ = true;
    } else if (!fs::is_directory(dir_, ec)) {
      throw IoError(dir_.string() + " exists and is not a directory");
    }
  }

  void write(const std::string& name, const std::string& contents, bool listed = true) {
    const fs::path path = dir_ / name;
    written_.push_back(path);
    io::write_file(path, contents);
    if (listed) files_.push_back({name, io::sha256_hex(contents), contents.size()});
  }

  const std::vector<ManifestFile>& files() const { return files_; }

  void rollback() noexcept {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
  }

 private:
  fs::path dir_;
  bool created_dir_ = false;
  std::vector<fs::path> written_;
  std::vector<ManifestFile> files_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string scenario_name(ScenarioName name) {
  for (const auto& [n, s] : kNames)
    if (n == name) return std::string(s);
  return "?";
}

ScenarioName parse_scenario_name(std::string_view text) {
  for (const auto& [n, s] : kNames)
    if (s == text) return n;
  throw ConfigError("unknown scenario '" + std::string(text) + "'");
}

std::uint64_t probe_noise_seed(const ExperimentConfig& config) {
  return io::derive_seed(config.detection.rng_seed, "probe-noise");
}

DcSweepResult dc_sweep(const ValidatedConfig& vc) {
  const auto& c = vc.config;
  const int n = c.scenario.dc_sweep_points;
  const double h = c.scenario.dc_sweep_half_range;
  if (n < 3 || !(h > 0.0)) throw DomainError("dc_sweep: need >= 3 points and a positive range");
  DcSweepResult out;
  out.b = linspace(-h, h, n);
  out.closed_form = static_rotation_curve(out.b, vc);
  out.rotation.resize(out.b.size());

  const double g = c.cell.relaxation_Gamma;
  const double fastest = std::max(larmor_frequency(h, c.field.gamma), g / units::two_pi);
  const double dt = 1.0 / (40.0 * fastest);
  const auto steps = static_cast<std::size_t>(
      std::ceil(c.simulation.transient_relaxation_times / (g * dt)));
  parallel_for(out.b.size(), [&](std::size_t i) {
    SpinDynamics d = SpinDynamics::from_config(vc);
    d.omega_bias = larmor_angular(out.b[i], c.field.gamma);
    d.omega_injection = 0.0;
    d.dc_pump = true;
    SpinIntegrator integ(d, dt);
    for (std::size_t k = 0; k < steps; ++k) integ.step();
    out.rotation[i] = c.probe.coupling_kappa * integ.state().Sy;
  });
  return out;
}

LockinSweepResult lockin_sweep(const ValidatedConfig& vc_in) {
  const auto vc = with_fixed_step(vc_in, vc_in.config.scenario.lockin_sweep_half_range);
  const auto& c = vc.config;
  const double b0 = resonance_field(vc);
  const double h = c.scenario.discrimination_half_range;
  LockinSweepResult out;
  out.local = discrimination_sweep(vc, b0 - h, b0 + h, c.scenario.discrimination_points);

  const int n = c.scenario.lockin_sweep_points;
  const double range = c.scenario.lockin_sweep_half_range;
  if (n < 3 || !(range > b0)) {
    throw DomainError("lockin_sweep: half range must exceed the resonance field " +
                      io::format_double(b0) + " G");
  }
  out.sweep.b = linspace(-range, range, n);
  out.sweep.x.resize(out.sweep.b.size());
  out.sweep.y.resize(out.sweep.b.size());
  out.sweep.phase = out.local.phase;
  parallel_for(out.sweep.b.size(), [&](std::size_t i) {
    std::tie(out.sweep.x[i], out.sweep.y[i]) =
        steady_lockin(vc, out.sweep.b[i], out.local.phase, c.scenario.lockin_sweep_average_time);
  });

  const auto crossings = zero_crossings(out.sweep, 0.0);
  for (int side = 0; side < 2; ++side) {
    const ZeroCrossing* best = nullptr;
    for (const auto& z : crossings) {
      if ((side == 0) != (z.b < 0.0)) continue;
      if (!best || std::abs(z.slope) > std::abs(best->slope)) best = &z;
    }
    if (!best) throw DataError("lockin_sweep: no resonance crossing for one field polarity");
    out.resonances.push_back(*best);
  }
  return out;
}

SaCompareResult sa_compare(const ValidatedConfig& vc) {
  auto pair = sa_pair(vc, vc.config.detection.sa_vbw);
  SaCompareResult out;
  out.coherent = std::move(pair.coherent);
  out.squeezed = std::move(pair.squeezed);
  out.floor_coherent = pair.floor_coherent;
  out.floor_squeezed = pair.floor_squeezed;
  out.gap_db = out.floor_coherent.floor - out.floor_squeezed.floor;
  return out;
}

SensitivityResult sensitivity_run(const ValidatedConfig& vc_in) {
  const double b0 = resonance_field(vc_in);
  // One step size for the sweep, the injected tones and the noise records.
  const auto vc = with_fixed_step(vc_in, b0 + vc_in.config.scenario.discrimination_half_range +
                                             vc_in.config.scenario.response_injection_amplitude);
  const auto& c = vc.config;
  const auto& s = c.scenario;
  SensitivityResult out;
  out.discrimination = discrimination_sweep(vc, b0 - s.discrimination_half_range,
                                            b0 + s.discrimination_half_range,
                                            s.discrimination_points);
  const double lock_point = out.discrimination.zero_crossing;
  const double phase = out.discrimination.phase;
  out.response = response_spectrum(vc, lock_point, phase, s.response_freqs,
                                   s.response_injection_amplitude);

  const double ratio = c.detection.sample_rate / s.sensitivity_output_rate;
  const auto decimation = static_cast<std::size_t>(std::llround(ratio));
  if (decimation < 1 || std::abs(ratio - static_cast<double>(decimation)) > 1e-9 * ratio) {
    throw ConfigError("scenario.sensitivity_output_rate must divide the sample rate");
  }
  const std::uint64_t seed = probe_noise_seed(c);
  const std::string hash = config_hash(c);
  parallel_for(2, [&](std::size_t i) {
    const bool squeezed = i == 1;
    const auto rec = lockin_record(vc, lock_point, phase, make_noise_model(vc, squeezed), seed,
                                   s.sensitivity_record_time, decimation);
    Spectrum asd = to_asd(psd_estimate(rec.x_series, rec.sample_rate,
                                       s.sensitivity_segment_bandwidth, 0, Window::hann));
    asd = crop(asd, s.sensitivity_max_freq);
    auto report = sensitivity_spectrum(asd, out.response, s.plateau_band_low, s.plateau_band_high);
    report.config_hash = hash;
    report.seed = seed;
    (squeezed ? out.noise_squeezed : out.noise_coherent) = std::move(asd);
    (squeezed ? out.squeezed : out.coherent) = std::move(report);
  });
  out.improvement = improvement_percent(out.coherent, out.squeezed);
  return out;
}

ValidatedConfig config_at_temperature(const ValidatedConfig& vc, double temperature_c) {
  ExperimentConfig c = vc.config;
  const double n_ref = vc.derived.density;
  const double n = rb_number_density(temperature_c);
  const double r = n / n_ref;
  const double nb = c.cell.broadening_density;
  c.cell.temperature = temperature_c;
  c.cell.density_override.reset();
  c.cell.relaxation_Gamma = vc.config.cell.relaxation_Gamma * (nb + n) / (nb + n_ref);
  c.probe.coupling_kappa = vc.config.probe.coupling_kappa * r;
  c.cell.absorption_fraction = 1.0 - std::pow(1.0 - vc.config.cell.absorption_fraction, r);
  return validate_config(c);
}

TempScanResult temp_scan(const ValidatedConfig& vc, const std::vector<double>& grid) {
  const auto& c = vc.config;
  if (grid.empty()) throw DomainError("temp_scan: empty temperature grid");
  for (double t : grid) {
    if (!(t >= 40.0 && t <= 70.0)) {
      throw DomainError("temp_scan: temperature " + io::format_double(t) +
                        " C outside the 40..70 C scan range");
    }
  }
  const auto norm_it = std::find(grid.begin(), grid.end(), c.scenario.temp_normalization);
  if (norm_it == grid.end()) {
    throw DomainError("temp_scan: normalization temperature " +
                      io::format_double(c.scenario.temp_normalization) + " C is not in the grid");
  }
  const auto norm = static_cast<std::size_t>(norm_it - grid.begin());
  if (!(c.scenario.temp_sa_duration_scale > 0.0 && c.scenario.temp_sa_duration_scale <= 1.0))
    throw ConfigError("scenario.temp_sa_duration_scale must be in (0, 1]");

  TempScanResult out;
  const std::size_t n = grid.size();
  out.temperatures = grid;
  out.density.resize(n);
  out.slope.resize(n);
  out.floor_coherent.resize(n);
  out.floor_squeezed.resize(n);
  const double b0 = resonance_field(vc);
  const double vbw = c.detection.sa_vbw / c.scenario.temp_sa_duration_scale;
  for (std::size_t i = 0; i < n; ++i) {
    const auto vt_raw = config_at_temperature(vc, grid[i]);
    out.density[i] = vt_raw.derived.density;
    // Phase-independent slope: |dZ/dB| from a symmetric difference of X + iY.
    const double db = 0.05 * vt_raw.config.cell.relaxation_Gamma / (units::two_pi * c.field.gamma);
    const auto vt = with_fixed_step(vt_raw, b0 + db);
    const auto [xp, yp] = steady_lockin(vt, b0 + db, 0.0, c.scenario.lockin_sweep_average_time);
    const auto [xm, ym] = steady_lockin(vt, b0 - db, 0.0, c.scenario.lockin_sweep_average_time);
    out.slope[i] = std::abs(std::complex<double>(xp - xm, yp - ym)) / (2.0 * db);
    const auto pair = sa_pair(vt, vbw);
    out.floor_coherent[i] = pair.floor_coherent.floor;
    out.floor_squeezed[i] = pair.floor_squeezed.floor;
  }
  const double snr_ref = out.slope[norm] / std::pow(10.0, out.floor_coherent[norm] / 20.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.signal_norm.push_back(i == norm ? 1.0 : out.slope[i] / out.slope[norm]);
    const double sc = out.slope[i] / std::pow(10.0, out.floor_coherent[i] / 20.0);
    const double ss = out.slope[i] / std::pow(10.0, out.floor_squeezed[i] / 20.0);
    out.snr_coherent_norm.push_back(i == norm ? 1.0 : sc / snr_ref);
    out.snr_squeezed_norm.push_back(ss / snr_ref);
  }
  return out;
}

std::string format_manifest(const RunManifest& m) {
  json files = json::array();
  for (const auto& f : m.files) files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  json seeds = json::object();
  for (const auto& [k, v] : m.seeds) seeds[k] = v;
  json j = {{"scenario", m.scenario},
            {"tool_version", m.tool_version},
            {"config_hash", m.config_hash},
            {"seeds", seeds},
            {"noise_breakdown", m.noise_breakdown},
            {"passed", m.passed},
            {"files", files}};
  return dump(j);
}

RunManifest run_scenario(const Scenario& scenario) {
  using clock = std::chrono::system_clock;
  const auto start = clock::now();
  ExperimentConfig cfg = scenario.config;
  for (const auto& o : scenario.overrides) apply_override(cfg, o);
  const ValidatedConfig vc = validate_config(cfg);
  const auto& c = vc.config;
  const std::string hash = config_hash(c);
  const std::string name = scenario_name(scenario.name);

  RunManifest m;
  m.scenario = name;
  m.tool_version = std::string(kToolVersion);
  m.config_hash = hash;
  m.seeds = {{"rng_seed", c.detection.rng_seed}, {"probe_noise", probe_noise_seed(c)}};

  ArtifactWriter out(scenario.output_dir);
  try {
    const std::string config_text = dump(to_json(c));
    out.write("config.json", config_text);
    if (config_hash(config_from_json(json::parse(io::read_file(scenario.output_dir / "config.json")))) != hash)
      throw IoError("config.json does not read back to the same configuration");

    const std::string h = "config_hash " + hash;
    const std::string seed_line = "seed " + std::to_string(probe_noise_seed(c));
    switch (scenario.name) {
      case ScenarioName::dc_sweep: {
        const auto r = dc_sweep(vc);
        std::vector<double> volts(r.rotation.size());
        for (std::size_t i = 0; i < volts.size(); ++i) volts[i] = vc.derived.effective_gain * r.rotation[i];
        out.write("dc_sweep.txt",
                  io::format_columns({"constant pumping, steady-state rotation", h},
                                     {"B_G", "rotation_rad", "closed_form_rad", "detector_V"},
                                     {r.b, r.rotation, r.closed_form, volts}));
        break;
      }
      case ScenarioName::lockin_sweep: {
        const auto r = lockin_sweep(vc);
        out.write("lockin_sweep.txt",
                  io::format_columns({"lock-in output versus bias field, tone amplitude", h,
                                      "phase_rad " + io::format_double(r.sweep.phase),
                                      "resonance_negative_G " + io::format_double(r.resonances[0].b),
                                      "resonance_positive_G " + io::format_double(r.resonances[1].b)},
                                     {"B_G", "X_V", "Y_V"}, {r.sweep.b, r.sweep.x, r.sweep.y}));
        out.write("discrimination.txt", format_discrimination(r.local, hash));
        // Post-transient spin trajectory at resonance, 20 modulation periods.
        const auto at_res = with_bias(vc, resonance_field(vc));
        const double transient = c.simulation.transient_relaxation_times / c.cell.relaxation_Gamma;
        const double periods = 20.0 / c.pump.mod_freq;
        const auto traj = integrate_spin(at_res, transient + periods, at_res.derived.dt, true);
        out.write("spin_trajectory.txt", format_trajectory(traj, hash));
        json summary = {{"phase_rad", r.sweep.phase},
                        {"resonance_negative_G", r.resonances[0].b},
                        {"resonance_positive_G", r.resonances[1].b},
                        {"grid_step_G", r.sweep.b[1] - r.sweep.b[0]},
                        {"local_zero_crossing_G", r.local.zero_crossing},
                        {"local_slope_V_per_G", r.local.slope_at_crossing}};
        out.write("summary.json", dump(summary));
        break;
      }
      case ScenarioName::sa_compare: {
        const auto r = sa_compare(vc);
        out.write("sa_coherent.txt", format_spectrum(r.coherent, {"probe coherent", h, seed_line}));
        out.write("sa_squeezed.txt", format_spectrum(r.squeezed, {"probe squeezed", h, seed_line}));
        json summary = {{"floor_coherent", floor_json(r.floor_coherent)},
                        {"floor_squeezed", floor_json(r.floor_squeezed)},
                        {"floor_gap_dB", r.gap_db},
                        {"rbw_Hz", r.coherent.rbw},
                        {"vbw_Hz", c.detection.sa_vbw},
                        {"averages", r.coherent.averages}};
        out.write("summary.json", dump(summary));
        break;
      }
      case ScenarioName::sensitivity: {
        const auto r = sensitivity_run(vc);
        out.write("discrimination.txt", format_discrimination(r.discrimination, hash));
        out.write("response.txt", format_response(r.response, hash));
        out.write("noise_coherent.txt",
                  format_spectrum(r.noise_coherent, {"lock-in X noise, probe coherent", h, seed_line}));
        out.write("noise_squeezed.txt",
                  format_spectrum(r.noise_squeezed, {"lock-in X noise, probe squeezed", h, seed_line}));
        out.write("sensitivity_coherent.txt", format_sensitivity(r.coherent, "coherent"));
        out.write("sensitivity_squeezed.txt", format_sensitivity(r.squeezed, "squeezed"));
        json summary = {
            {"band_Hz", {r.coherent.band_low, r.coherent.band_high}},
            {"plateau_coherent_pT_per_rtHz", r.coherent.plateau},
            {"plateau_squeezed_pT_per_rtHz", r.squeezed.plateau},
            {"plateau_ratio", r.squeezed.plateau / r.coherent.plateau},
            {"improvement_percent", r.improvement},
            {"slope_V_per_G", r.discrimination.slope_at_crossing},
            {"analytic_slope_V_per_G", analytic_discrimination_slope(vc)},
            {"lock_point_G", r.discrimination.zero_crossing},
            {"phase_rad", r.discrimination.phase},
            {"fit", {{"dc_response_V_per_G", r.response.fit.dc_response},
                     {"atomic_pole_Hz", r.response.fit.atomic_pole},
                     {"lockin_pole_Hz", r.response.fit.lockin_pole},
                     {"residual_rms", r.response.fit.residual}}},
            {"config_hash", hash},
            {"seeds", {{"coherent", r.coherent.seed}, {"squeezed", r.squeezed.seed}}}};
        out.write("summary.json", dump(summary));
        break;
      }
      case ScenarioName::temp_scan: {
        const auto r = temp_scan(vc, c.scenario.temp_grid);
        out.write("temp_scan.txt",
                  io::format_columns(
                      {"temperature scan", h, seed_line,
                       "signal normalized to " + io::format_double(c.scenario.temp_normalization) + " C",
                       "snr normalized to the coherent probe at " +
                           io::format_double(c.scenario.temp_normalization) + " C"},
                      {"T_C", "density_cm3", "slope_V_per_G", "signal_norm", "floor_coherent_dB",
                       "floor_squeezed_dB", "snr_coherent_norm", "snr_squeezed_norm"},
                      {r.temperatures, r.density, r.slope, r.signal_norm, r.floor_coherent,
                       r.floor_squeezed, r.snr_coherent_norm, r.snr_squeezed_norm}));
        break;
      }
      case ScenarioName::validate: {
        const auto report = run_validation(c);
        out.write("validation.txt", format_validation(report));
        m.passed = report.all_passed();
        break;
      }
    }
    if (scenario.name == ScenarioName::sa_compare || scenario.name == ScenarioName::sensitivity) {
      const double fs = c.detection.sample_rate;
      m.noise_breakdown = {{"coherent", breakdown_json(noise_breakdown(make_noise_model(vc, false), fs))},
                           {"squeezed", breakdown_json(noise_breakdown(make_noise_model(vc, true), fs))}};
    }
    m.files = out.files();
    const auto end = clock::now();
    auto stamp = [](clock::time_point t) {
      return std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
    };
    out.write("timing.json",
              dump({{"start_unix_ms", stamp(start)},
                    {"end_unix_ms", stamp(end)},
                    {"wall_seconds", std::chrono::duration<double>(end - start).count()}}),
              false);
    out.write("manifest.json", format_manifest(m), false);
  } catch (const Error& e) {
    out.rollback();
    throw Error(e.category(), name + ": " + e.what());
  } catch (...) {
    out.rollback();
    throw;
  }
  return m;
}

}  // namespace amor
