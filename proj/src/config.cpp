#include "amor/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "amor/core.hpp"
#include "amor/error.hpp"
#include "amor/io.hpp"
#include "amor/noise.hpp"
#include "amor/units.hpp"

namespace amor {

using nlohmann::json;

namespace {

// Preset calibration constants. The derivation of each lives in
// tests/test_calibration.cpp, which re-solves them and checks these values.

// Relaxation 2 pi x 10 kHz: resonance half-width 13.8 mG, Omega_m / Gamma = 58.
constexpr double kPresetGamma = units::two_pi * 10.0e3;
constexpr double kPresetR0 = units::two_pi * 2.0e3;
// Coupling that puts the coherent 200-500 Hz sensitivity plateau at 250 pT/sqrt(Hz).
constexpr double kPresetKappa = 3.8786e-4;
// Coherent shot-noise ASD at 6.5 mW over sqrt(2), per flicker quadrature.
constexpr double kPresetFlickerAsd = 2.1921e-9;
// Rb density at 55 C; puts the response maximum of the temperature scan there.
constexpr double kPresetBroadeningDensity = 2.1030e11;
// Excess atomic noise leaving 0.2 dB of squeezing benefit at 70 C.
constexpr double kPresetExcessCoefficient = 5.2667e-3;

void add_issue(std::vector<ConfigIssue>& out, std::string path, std::string msg) {
  out.push_back({std::move(path), std::move(msg)});
}

bool finite(double v) { return std::isfinite(v); }

std::string waveform_name(Waveform w) { return w == Waveform::square ? "square" : "sine"; }

Waveform waveform_from(const std::string& s) {
  if (s == "square") return Waveform::square;
  if (s == "sine") return Waveform::sine;
  throw ConfigError("pump.waveform: unknown waveform '" + s + "' (square|sine)");
}

template <typename T>
void read(const json& j, const char* section, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(section) + "." + key + ": " + e.what());
  }
}

void reject_unknown(const json& j, const char* section, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(std::string(section) + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* s) { return k == s; }) == keys.end()) {
      throw ConfigError(std::string(section) + "." + k + ": unknown key");
    }
  }
}

}  // namespace

std::vector<ConfigIssue> check_config(const ExperimentConfig& c) {
  std::vector<ConfigIssue> out;

  if (!(c.field.gamma > 0.0) || !finite(c.field.gamma))
    add_issue(out, "FieldConfig.gamma", "must be > 0");
  if (!finite(c.field.bias_Bz)) add_issue(out, "FieldConfig.bias_Bz", "must be finite");
  if (!(c.field.injection_amplitude >= 0.0))
    add_issue(out, "FieldConfig.injection_amplitude", "must be >= 0");
  if (c.field.injection_amplitude > 0.0 && !(c.field.injection_freq > 0.0))
    add_issue(out, "FieldConfig.injection_freq", "must be > 0 when injection_amplitude > 0");

  if (!(c.pump.duty > 0.0 && c.pump.duty < 1.0))
    add_issue(out, "PumpConfig.duty", "must satisfy 0 < duty < 1");
  if (!(c.pump.mod_freq > 0.0)) add_issue(out, "PumpConfig.mod_freq", "must be > 0");
  if (!(c.pump.peak_rate_R0 >= 0.0)) add_issue(out, "PumpConfig.peak_rate_R0", "must be >= 0");

  if (!(c.probe.power > 0.0)) add_issue(out, "ProbeConfig.power", "must be > 0");
  if (!(c.probe.wavelength > 0.0)) add_issue(out, "ProbeConfig.wavelength", "must be > 0");
  if (!(c.probe.coupling_kappa > 0.0)) add_issue(out, "ProbeConfig.coupling_kappa", "must be > 0");
  if (!(c.probe.detector_gain > 0.0)) add_issue(out, "ProbeConfig.detector_gain", "must be > 0");

  if (!(c.cell.temperature >= 20.0 && c.cell.temperature <= 120.0))
    add_issue(out, "CellConfig.temperature", "must lie in [20, 120] C");
  if (!(c.cell.length > 0.0)) add_issue(out, "CellConfig.length", "must be > 0");
  if (c.cell.density_override && !(*c.cell.density_override > 0.0))
    add_issue(out, "CellConfig.density_override", "must be > 0 when given");
  if (!(c.cell.absorption_fraction >= 0.0 && c.cell.absorption_fraction < 1.0))
    add_issue(out, "CellConfig.absorption_fraction", "must lie in [0, 1)");
  if (!(c.cell.relaxation_Gamma > 0.0)) add_issue(out, "CellConfig.relaxation_Gamma", "must be > 0");
  if (!(c.cell.broadening_density > 0.0))
    add_issue(out, "CellConfig.broadening_density", "must be > 0");

  if (!(c.squeeze.squeezing_dB <= 0.0)) add_issue(out, "SqueezeConfig.squeezing_dB", "must be <= 0");
  if (!(c.squeeze.antisqueezing_dB >= 0.0))
    add_issue(out, "SqueezeConfig.antisqueezing_dB", "must be >= 0");
  if (db_to_variance(c.squeeze.squeezing_dB) * db_to_variance(c.squeeze.antisqueezing_dB) <
      1.0 - 1e-12)
    add_issue(out, "SqueezeConfig", "variance product below the minimum-uncertainty bound");
  if (!finite(c.squeeze.quadrature_angle))
    add_issue(out, "SqueezeConfig.quadrature_angle", "must be finite");

  if (!(c.noise.flicker_corner >= 0.0)) add_issue(out, "NoiseConfig.flicker_corner", "must be >= 0");
  if (!(c.noise.flicker_asd_at_corner >= 0.0))
    add_issue(out, "NoiseConfig.flicker_asd_at_corner", "must be >= 0");
  if (!(c.noise.flicker_floor > 0.0)) add_issue(out, "NoiseConfig.flicker_floor", "must be > 0");
  if (!(c.noise.excess_coefficient >= 0.0))
    add_issue(out, "NoiseConfig.excess_coefficient", "must be >= 0");
  if (!(c.noise.excess_exponent >= 1.0)) add_issue(out, "NoiseConfig.excess_exponent", "must be >= 1");
  if (!(c.noise.excess_reference_density > 0.0))
    add_issue(out, "NoiseConfig.excess_reference_density", "must be > 0");

  if (!(c.detection.sample_rate > 4.0 * c.pump.mod_freq))
    add_issue(out, "DetectionConfig.sample_rate",
              "must exceed 4 x PumpConfig.mod_freq (Nyquist margin)");
  if (!(c.detection.lockin_time_constant > 0.0))
    add_issue(out, "DetectionConfig.lockin_time_constant", "must be > 0");
  if (c.detection.lockin_filter_order < 1 || c.detection.lockin_filter_order > 4)
    add_issue(out, "DetectionConfig.lockin_filter_order", "must be in 1..4");
  if (!finite(c.detection.lockin_phase)) add_issue(out, "DetectionConfig.lockin_phase", "must be finite");
  if (!(c.detection.sa_vbw > 0.0)) add_issue(out, "DetectionConfig.sa_vbw", "must be > 0");
  if (!(c.detection.sa_rbw >= c.detection.sa_vbw))
    add_issue(out, "DetectionConfig.sa_rbw", "must be >= sa_vbw");

  if (!(c.simulation.dt >= 0.0)) add_issue(out, "SimulationConfig.dt", "must be >= 0 (0 = automatic)");
  if (!(c.simulation.transient_relaxation_times > 0.0))
    add_issue(out, "SimulationConfig.transient_relaxation_times", "must be > 0");
  if (!(c.simulation.settle_time_constants > 0.0))
    add_issue(out, "SimulationConfig.settle_time_constants", "must be > 0");

  const auto& s = c.scenario;
  if (!(s.dc_sweep_half_range > 0.0) || s.dc_sweep_points < 3)
    add_issue(out, "ScenarioConfig.dc_sweep", "needs a positive range and >= 3 points");
  if (!(s.lockin_sweep_half_range > 0.0) || s.lockin_sweep_points < 3)
    add_issue(out, "ScenarioConfig.lockin_sweep", "needs a positive range and >= 3 points");
  if (!(s.lockin_sweep_average_time > 0.0))
    add_issue(out, "ScenarioConfig.lockin_sweep_average_time", "must be > 0");
  if (!(s.discrimination_half_range > 0.0) || s.discrimination_points < 5)
    add_issue(out, "ScenarioConfig.discrimination", "needs a positive range and >= 5 points");
  if (!(s.sa_span > 0.0)) add_issue(out, "ScenarioConfig.sa_span", "must be > 0");
  if (!(s.sa_carrier_exclusion >= 0.0))
    add_issue(out, "ScenarioConfig.sa_carrier_exclusion", "must be >= 0");
  if (!(s.sensitivity_record_time > 0.0))
    add_issue(out, "ScenarioConfig.sensitivity_record_time", "must be > 0");
  if (!(s.sensitivity_output_rate > 0.0) || s.sensitivity_output_rate > c.detection.sample_rate)
    add_issue(out, "ScenarioConfig.sensitivity_output_rate", "must be in (0, sample_rate]");
  if (!(s.sensitivity_segment_bandwidth > 0.0))
    add_issue(out, "ScenarioConfig.sensitivity_segment_bandwidth", "must be > 0");
  if (!(s.plateau_band_low > 0.0 && s.plateau_band_high > s.plateau_band_low))
    add_issue(out, "ScenarioConfig.plateau_band", "needs 0 < low < high");
  if (!(s.response_injection_amplitude > 0.0))
    add_issue(out, "ScenarioConfig.response_injection_amplitude", "must be > 0");
  for (double f : s.response_freqs) {
    if (!(f > 0.0)) add_issue(out, "ScenarioConfig.response_freqs", "entries must be > 0");
  }
  if (!(s.temp_sa_duration_scale > 0.0 && s.temp_sa_duration_scale <= 1.0))
    add_issue(out, "ScenarioConfig.temp_sa_duration_scale", "must lie in (0, 1]");

  return out;
}

std::pair<double, int> integration_step(double sample_rate, double fastest_hz, double requested_dt) {
  int substeps = 1;
  if (requested_dt > 0.0) {
    substeps = std::max(1, static_cast<int>(std::lround(1.0 / (sample_rate * requested_dt))));
  } else {
    // Smallest substep count giving at least 20 steps per fastest period.
    const double needed = 20.0 * fastest_hz / sample_rate;
    substeps = std::max(1, static_cast<int>(std::ceil(needed - 1e-9)));
  }
  return {1.0 / (sample_rate * substeps), substeps};
}

ValidatedConfig validate_config(const ExperimentConfig& config) {
  auto issues = check_config(config);
  if (!issues.empty()) {
    std::ostringstream msg;
    msg << "invalid configuration (" << issues.size() << " issue" << (issues.size() > 1 ? "s" : "")
        << "):";
    for (const auto& i : issues) msg << "\n  " << i.path << ": " << i.message;
    throw ConfigError(msg.str());
  }

  ValidatedConfig vc{config, {}};
  auto& d = vc.derived;
  const auto& c = config;
  d.omega_larmor = larmor_angular(c.field.bias_Bz, c.field.gamma);
  d.larmor_hz = larmor_frequency(c.field.bias_Bz, c.field.gamma);
  d.omega_mod = units::hz_to_rad(c.pump.mod_freq);
  d.density = c.cell.density_override ? *c.cell.density_override
                                      : rb_number_density(c.cell.temperature);
  d.shot_asd = shot_noise_asd_from_power(c.probe.power, c.probe.wavelength);
  d.transmission = 1.0 - c.cell.absorption_fraction;
  d.squeeze_variance_in = detected_input_variance(c.squeeze);
  d.squeeze_variance_out = loss_propagated_variance(d.squeeze_variance_in, d.transmission);
  d.excess_variance = excess_atomic_noise_variance(d.density, c.noise);
  d.effective_gain = c.probe.detector_gain * c.probe.power;
  const double max_field = std::abs(c.field.bias_Bz) + c.field.injection_amplitude;
  const double fastest = std::max(c.pump.mod_freq, c.field.gamma * max_field);
  std::tie(d.dt, d.substeps) = integration_step(c.detection.sample_rate, fastest, c.simulation.dt);
  return vc;
}

ExperimentConfig paper_default_config() {
  ExperimentConfig c;
  c.field.bias_Bz = 0.8;
  c.field.gamma = units::gamma_default;
  c.pump.peak_rate_R0 = kPresetR0;
  c.pump.mod_freq = 580.0e3;
  c.pump.duty = 0.5;
  c.pump.waveform = Waveform::square;
  c.probe.power = 6.5;
  c.probe.wavelength = 795.0;
  c.probe.coupling_kappa = kPresetKappa;
  c.probe.detector_gain = 10.0;
  c.cell.temperature = units::density_anchor_temperature;
  c.cell.length = 75.0;
  c.cell.absorption_fraction = 0.10;
  c.cell.relaxation_Gamma = kPresetGamma;
  c.cell.broadening_density = kPresetBroadeningDensity;
  c.squeeze = {-1.9, 8.0, 0.0, true};
  c.noise.flicker_corner = 100.0;
  c.noise.flicker_asd_at_corner = kPresetFlickerAsd;
  c.noise.flicker_floor = 0.1;
  c.noise.excess_coefficient = kPresetExcessCoefficient;
  c.noise.excess_exponent = 2.0;
  c.noise.excess_reference_density = units::density_anchor;
  c.detection = DetectionConfig{};
  c.simulation = SimulationConfig{};
  auto& s = c.scenario;
  s.response_freqs = {10, 20, 40, 70, 100, 150, 200, 300, 400, 531, 700, 1000, 1500,
                      2000, 3000, 5000, 7000, 10000, 15000, 20000};
  s.temp_grid = {40.8, 45.0, 50.0, 55.0, 60.0, 65.0, 70.0};
  return c;
}

ExperimentConfig textbook_gamma_config() {
  auto c = paper_default_config();
  c.field.gamma = units::gamma_rb87_f2;
  // Keep the pump on resonance with the same 800 mG bias.
  c.pump.mod_freq = units::gamma_rb87_f2 * c.field.bias_Bz;
  return c;
}

std::vector<std::string> preset_names() { return {"paper-default", "textbook-gamma"}; }

ExperimentConfig preset(std::string_view name) {
  if (name == "paper-default") return paper_default_config();
  if (name == "textbook-gamma") return textbook_gamma_config();
  throw ConfigError("unknown preset '" + std::string(name) + "' (paper-default|textbook-gamma)");
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["field"] = {{"bias_Bz", c.field.bias_Bz},
                {"gamma", c.field.gamma},
                {"injection_amplitude", c.field.injection_amplitude},
                {"injection_freq", c.field.injection_freq}};
  j["pump"] = {{"peak_rate_R0", c.pump.peak_rate_R0},
               {"mod_freq", c.pump.mod_freq},
               {"duty", c.pump.duty},
               {"waveform", waveform_name(c.pump.waveform)}};
  j["probe"] = {{"power", c.probe.power},
                {"wavelength", c.probe.wavelength},
                {"coupling_kappa", c.probe.coupling_kappa},
                {"detector_gain", c.probe.detector_gain}};
  j["cell"] = {{"temperature", c.cell.temperature},
               {"length", c.cell.length},
               {"density_override", c.cell.density_override ? json(*c.cell.density_override) : json(nullptr)},
               {"absorption_fraction", c.cell.absorption_fraction},
               {"relaxation_Gamma", c.cell.relaxation_Gamma},
               {"broadening_density", c.cell.broadening_density}};
  j["squeeze"] = {{"squeezing_dB", c.squeeze.squeezing_dB},
                  {"antisqueezing_dB", c.squeeze.antisqueezing_dB},
                  {"quadrature_angle", c.squeeze.quadrature_angle},
                  {"enabled", c.squeeze.enabled}};
  j["noise"] = {{"flicker_corner", c.noise.flicker_corner},
                {"flicker_asd_at_corner", c.noise.flicker_asd_at_corner},
                {"flicker_floor", c.noise.flicker_floor},
                {"excess_coefficient", c.noise.excess_coefficient},
                {"excess_exponent", c.noise.excess_exponent},
                {"excess_reference_density", c.noise.excess_reference_density}};
  j["detection"] = {{"sample_rate", c.detection.sample_rate},
                    {"lockin_time_constant", c.detection.lockin_time_constant},
                    {"lockin_filter_order", c.detection.lockin_filter_order},
                    {"lockin_phase", c.detection.lockin_phase},
                    {"sa_rbw", c.detection.sa_rbw},
                    {"sa_vbw", c.detection.sa_vbw},
                    {"rng_seed", c.detection.rng_seed}};
  j["simulation"] = {{"dt", c.simulation.dt},
                     {"transient_relaxation_times", c.simulation.transient_relaxation_times},
                     {"settle_time_constants", c.simulation.settle_time_constants}};
  const auto& s = c.scenario;
  j["scenario"] = {{"dc_sweep_half_range", s.dc_sweep_half_range},
                   {"dc_sweep_points", s.dc_sweep_points},
                   {"lockin_sweep_half_range", s.lockin_sweep_half_range},
                   {"lockin_sweep_points", s.lockin_sweep_points},
                   {"lockin_sweep_average_time", s.lockin_sweep_average_time},
                   {"discrimination_half_range", s.discrimination_half_range},
                   {"discrimination_points", s.discrimination_points},
                   {"sa_span", s.sa_span},
                   {"sa_carrier_exclusion", s.sa_carrier_exclusion},
                   {"sensitivity_record_time", s.sensitivity_record_time},
                   {"sensitivity_output_rate", s.sensitivity_output_rate},
                   {"sensitivity_segment_bandwidth", s.sensitivity_segment_bandwidth},
                   {"sensitivity_max_freq", s.sensitivity_max_freq},
                   {"plateau_band_low", s.plateau_band_low},
                   {"plateau_band_high", s.plateau_band_high},
                   {"response_injection_amplitude", s.response_injection_amplitude},
                   {"response_freqs", s.response_freqs},
                   {"temp_grid", s.temp_grid},
                   {"temp_normalization", s.temp_normalization},
                   {"temp_sa_duration_scale", s.temp_sa_duration_scale}};
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j, "config",
                 {"field", "pump", "probe", "cell", "squeeze", "noise", "detection", "simulation",
                  "scenario"});
  ExperimentConfig c = paper_default_config();
  if (j.contains("field")) {
    const auto& f = j["field"];
    reject_unknown(f, "field", {"bias_Bz", "gamma", "injection_amplitude", "injection_freq"});
    read(f, "field", "bias_Bz", c.field.bias_Bz);
    read(f, "field", "gamma", c.field.gamma);
    read(f, "field", "injection_amplitude", c.field.injection_amplitude);
    read(f, "field", "injection_freq", c.field.injection_freq);
  }
  if (j.contains("pump")) {
    const auto& p = j["pump"];
    reject_unknown(p, "pump", {"peak_rate_R0", "mod_freq", "duty", "waveform"});
    read(p, "pump", "peak_rate_R0", c.pump.peak_rate_R0);
    read(p, "pump", "mod_freq", c.pump.mod_freq);
    read(p, "pump", "duty", c.pump.duty);
    std::string w = waveform_name(c.pump.waveform);
    read(p, "pump", "waveform", w);
    c.pump.waveform = waveform_from(w);
  }
  if (j.contains("probe")) {
    const auto& p = j["probe"];
    reject_unknown(p, "probe", {"power", "wavelength", "coupling_kappa", "detector_gain"});
    read(p, "probe", "power", c.probe.power);
    read(p, "probe", "wavelength", c.probe.wavelength);
    read(p, "probe", "coupling_kappa", c.probe.coupling_kappa);
    read(p, "probe", "detector_gain", c.probe.detector_gain);
  }
  if (j.contains("cell")) {
    const auto& p = j["cell"];
    reject_unknown(p, "cell",
                   {"temperature", "length", "density_override", "absorption_fraction",
                    "relaxation_Gamma", "broadening_density"});
    read(p, "cell", "temperature", c.cell.temperature);
    read(p, "cell", "length", c.cell.length);
    if (p.contains("density_override")) {
      if (p["density_override"].is_null()) {
        c.cell.density_override.reset();
      } else {
        double v = 0.0;
        read(p, "cell", "density_override", v);
        c.cell.density_override = v;
      }
    }
    read(p, "cell", "absorption_fraction", c.cell.absorption_fraction);
    read(p, "cell", "relaxation_Gamma", c.cell.relaxation_Gamma);
    read(p, "cell", "broadening_density", c.cell.broadening_density);
  }
  if (j.contains("squeeze")) {
    const auto& p = j["squeeze"];
    reject_unknown(p, "squeeze", {"squeezing_dB", "antisqueezing_dB", "quadrature_angle", "enabled"});
    read(p, "squeeze", "squeezing_dB", c.squeeze.squeezing_dB);
    read(p, "squeeze", "antisqueezing_dB", c.squeeze.antisqueezing_dB);
    read(p, "squeeze", "quadrature_angle", c.squeeze.quadrature_angle);
    read(p, "squeeze", "enabled", c.squeeze.enabled);
  }
  if (j.contains("noise")) {
    const auto& p = j["noise"];
    reject_unknown(p, "noise",
                   {"flicker_corner", "flicker_asd_at_corner", "flicker_floor", "excess_coefficient",
                    "excess_exponent", "excess_reference_density"});
    read(p, "noise", "flicker_corner", c.noise.flicker_corner);
    read(p, "noise", "flicker_asd_at_corner", c.noise.flicker_asd_at_corner);
    read(p, "noise", "flicker_floor", c.noise.flicker_floor);
    read(p, "noise", "excess_coefficient", c.noise.excess_coefficient);
    read(p, "noise", "excess_exponent", c.noise.excess_exponent);
    read(p, "noise", "excess_reference_density", c.noise.excess_reference_density);
  }
  if (j.contains("detection")) {
    const auto& p = j["detection"];
    reject_unknown(p, "detection",
                   {"sample_rate", "lockin_time_constant", "lockin_filter_order", "lockin_phase",
                    "sa_rbw", "sa_vbw", "rng_seed"});
    read(p, "detection", "sample_rate", c.detection.sample_rate);
    read(p, "detection", "lockin_time_constant", c.detection.lockin_time_constant);
    read(p, "detection", "lockin_filter_order", c.detection.lockin_filter_order);
    read(p, "detection", "lockin_phase", c.detection.lockin_phase);
    read(p, "detection", "sa_rbw", c.detection.sa_rbw);
    read(p, "detection", "sa_vbw", c.detection.sa_vbw);
    read(p, "detection", "rng_seed", c.detection.rng_seed);
  }
  if (j.contains("simulation")) {
    const auto& p = j["simulation"];
    reject_unknown(p, "simulation", {"dt", "transient_relaxation_times", "settle_time_constants"});
    read(p, "simulation", "dt", c.simulation.dt);
    read(p, "simulation", "transient_relaxation_times", c.simulation.transient_relaxation_times);
    read(p, "simulation", "settle_time_constants", c.simulation.settle_time_constants);
  }
  if (j.contains("scenario")) {
    const auto& p = j["scenario"];
    auto& s = c.scenario;
    reject_unknown(p, "scenario",
                   {"dc_sweep_half_range", "dc_sweep_points", "lockin_sweep_half_range",
                    "lockin_sweep_points", "lockin_sweep_average_time", "discrimination_half_range",
                    "discrimination_points", "sa_span", "sa_carrier_exclusion",
                    "sensitivity_record_time", "sensitivity_output_rate",
                    "sensitivity_segment_bandwidth", "sensitivity_max_freq", "plateau_band_low",
                    "plateau_band_high", "response_injection_amplitude", "response_freqs",
                    "temp_grid", "temp_normalization", "temp_sa_duration_scale"});
    read(p, "scenario", "dc_sweep_half_range", s.dc_sweep_half_range);
    read(p, "scenario", "dc_sweep_points", s.dc_sweep_points);
    read(p, "scenario", "lockin_sweep_half_range", s.lockin_sweep_half_range);
    read(p, "scenario", "lockin_sweep_points", s.lockin_sweep_points);
    read(p, "scenario", "lockin_sweep_average_time", s.lockin_sweep_average_time);
    read(p, "scenario", "discrimination_half_range", s.discrimination_half_range);
    read(p, "scenario", "discrimination_points", s.discrimination_points);
    read(p, "scenario", "sa_span", s.sa_span);
    read(p, "scenario", "sa_carrier_exclusion", s.sa_carrier_exclusion);
    read(p, "scenario", "sensitivity_record_time", s.sensitivity_record_time);
    read(p, "scenario", "sensitivity_output_rate", s.sensitivity_output_rate);
    read(p, "scenario", "sensitivity_segment_bandwidth", s.sensitivity_segment_bandwidth);
    read(p, "scenario", "sensitivity_max_freq", s.sensitivity_max_freq);
    read(p, "scenario", "plateau_band_low", s.plateau_band_low);
    read(p, "scenario", "plateau_band_high", s.plateau_band_high);
    read(p, "scenario", "response_injection_amplitude", s.response_injection_amplitude);
    read(p, "scenario", "response_freqs", s.response_freqs);
    read(p, "scenario", "temp_grid", s.temp_grid);
    read(p, "scenario", "temp_normalization", s.temp_normalization);
    read(p, "scenario", "temp_sa_duration_scale", s.temp_sa_duration_scale);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  const std::string text = io::read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const ExperimentConfig& config, const std::string& path) {
  io::write_file(path, to_json(config).dump(2) + "\n");
}

void apply_override(ExperimentConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string value(assignment.substr(eq + 1));
  std::string pointer = "/" + key;
  std::replace(pointer.begin(), pointer.end(), '.', '/');

  json j = to_json(config);
  const json::json_pointer ptr(pointer);
  if (!j.contains(ptr)) throw ConfigError("override key '" + key + "' is not a config path");
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  j[ptr] = parsed;
  config = config_from_json(j);
}

std::string config_hash(const ExperimentConfig& config) {
  return io::sha256_hex(to_json(config).dump());
}

}  // namespace amor
