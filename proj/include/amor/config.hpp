#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace amor {

struct FieldConfig {
  double bias_Bz = 0.8;                 // G
  double gamma = 725.0e3;               // Hz/G
  double injection_amplitude = 0.0;     // G, AC test tone on top of bias_Bz
  double injection_freq = 0.0;          // Hz
};

enum class Waveform { square, sine };

struct PumpConfig {
  double peak_rate_R0 = 0.0;            // 1/s
  double mod_freq = 580.0e3;            // Hz
  double duty = 0.5;
  Waveform waveform = Waveform::square;
};

struct ProbeConfig {
  double power = 6.5;                   // mW
  double wavelength = 795.0;            // nm
  double coupling_kappa = 0.0;          // rad per unit Sy
  /// Balanced-detector conversion in V per rad per mW of probe power; the
  /// effective V/rad gain is detector_gain * power.
  double detector_gain = 10.0;
};

struct CellConfig {
  double temperature = 40.3;            // C
  double length = 75.0;                 // mm
  std::optional<double> density_override;  // cm^-3
  double absorption_fraction = 0.10;
  double relaxation_Gamma = 0.0;        // 1/s, at the configured temperature
  /// Density at which density-dependent broadening equals the remaining
  /// relaxation; only used when the temperature is scanned.
  double broadening_density = 0.0;      // cm^-3
};

struct SqueezeConfig {
  double squeezing_dB = -1.9;
  double antisqueezing_dB = 8.0;
  double quadrature_angle = 0.0;        // rad, 0 = squeezed quadrature detected
  bool enabled = true;
};

struct NoiseConfig {
  double flicker_corner = 100.0;        // Hz offset from the carrier
  double flicker_asd_at_corner = 0.0;   // rad/sqrt(Hz)
  double flicker_floor = 0.1;           // Hz, lowest shaping pole
  double excess_coefficient = 0.0;      // excess variance factor at the reference density
  double excess_exponent = 2.0;
  double excess_reference_density = 5.5e10;  // cm^-3
};

struct DetectionConfig {
  double sample_rate = 5.8e6;           // Hz
  double lockin_time_constant = 300e-6; // s
  int lockin_filter_order = 1;
  double lockin_phase = 0.0;            // rad
  double sa_rbw = 1000.0;               // Hz
  double sa_vbw = 1.0;                  // Hz
  std::uint64_t rng_seed = 20221019;
};

struct SimulationConfig {
  double dt = 0.0;                      // s, 0 = derived from the fastest period
  double transient_relaxation_times = 10.0;
  double settle_time_constants = 10.0;
};

/// Knobs of the individual scenarios; all overridable with --set.
struct ScenarioConfig {
  double dc_sweep_half_range = 0.1;     // G
  int dc_sweep_points = 2001;

  double lockin_sweep_half_range = 1.2; // G
  int lockin_sweep_points = 481;
  double lockin_sweep_average_time = 1e-3;  // s averaged after settling

  double discrimination_half_range = 0.06;  // G around the resonance
  int discrimination_points = 121;

  double sa_span = 40e3;                // Hz
  double sa_carrier_exclusion = 3e3;    // Hz half-width

  double sensitivity_record_time = 10.0;    // s per probe state
  double sensitivity_output_rate = 20e3;    // Hz, decimated lock-in output
  double sensitivity_segment_bandwidth = 5.0;  // Hz
  double sensitivity_max_freq = 2000.0;     // Hz
  double plateau_band_low = 200.0;          // Hz
  double plateau_band_high = 500.0;         // Hz
  double response_injection_amplitude = 0.5e-3;  // G
  std::vector<double> response_freqs;       // Hz

  std::vector<double> temp_grid;            // C
  double temp_normalization = 40.8;         // C
  double temp_sa_duration_scale = 1.0;      // fraction of rbw/vbw averages used in the scan
};

struct ExperimentConfig {
  FieldConfig field;
  PumpConfig pump;
  ProbeConfig probe;
  CellConfig cell;
  SqueezeConfig squeeze;
  NoiseConfig noise;
  DetectionConfig detection;
  SimulationConfig simulation;
  ScenarioConfig scenario;
};

/// Quantities derived once from a checked config. Angular frequencies are
/// rad/s; everything else keeps the config units.
struct DerivedQuantities {
  double omega_larmor = 0.0;            // signed, rad/s
  double larmor_hz = 0.0;               // |gamma Bz|
  double omega_mod = 0.0;               // rad/s
  double density = 0.0;                 // cm^-3
  double shot_asd = 0.0;                // rad/sqrt(Hz)
  double transmission = 1.0;
  double squeeze_variance_in = 1.0;     // detected quadrature before the cell
  double squeeze_variance_out = 1.0;    // after the cell loss
  double excess_variance = 0.0;
  double effective_gain = 0.0;          // V/rad
  double dt = 0.0;                      // integration step, s
  int substeps = 1;                     // integration steps per detector sample
};

struct ValidatedConfig {
  ExperimentConfig config;
  DerivedQuantities derived;
};

struct ConfigIssue {
  std::string path;
  std::string message;
};

/// Checks every invariant and returns all violations (empty when valid).
std::vector<ConfigIssue> check_config(const ExperimentConfig& config);

/// Validates and attaches the derived quantities. Throws ConfigError listing
/// every violated field when the config is rejected.
ValidatedConfig validate_config(const ExperimentConfig& config);

/// Integration step and detector-sample substep count for a given maximum
/// precession/modulation frequency.
std::pair<double, int> integration_step(double sample_rate, double fastest_hz, double requested_dt);

// Presets

ExperimentConfig paper_default_config();
/// Same scenario with the textbook 87Rb gyromagnetic ratio.
ExperimentConfig textbook_gamma_config();
std::vector<std::string> preset_names();
ExperimentConfig preset(std::string_view name);

// Serialization

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& config, const std::string& path);

/// Applies a dotted-path override such as "pump.duty=0.4". The path must
/// already exist in the config.
void apply_override(ExperimentConfig& config, std::string_view assignment);

/// SHA-256 (hex) of the canonical JSON form.
std::string config_hash(const ExperimentConfig& config);

}  // namespace amor
