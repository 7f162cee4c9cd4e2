#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "amor/config.hpp"
#include "amor/dsp.hpp"
#include "amor/sensitivity.hpp"

namespace amor {

inline constexpr std::string_view kToolVersion = "1.0.0";

enum class ScenarioName { dc_sweep, lockin_sweep, sa_compare, sensitivity, temp_scan, validate };

std::string scenario_name(ScenarioName name);
ScenarioName parse_scenario_name(std::string_view text);

struct Scenario {
  ScenarioName name = ScenarioName::validate;
  ExperimentConfig config;
  std::vector<std::string> overrides;   // "path=value", applied in order
  std::filesystem::path output_dir;
};

struct ManifestFile {
  std::string name;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string scenario;
  std::string tool_version;
  std::string config_hash;
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  std::vector<ManifestFile> files;
  nlohmann::json noise_breakdown = nlohmann::json::object();  // per probe state
  bool passed = true;                   // false only for a failing validate run
};

/// Noise seed shared by the coherent and squeezed runs of one scenario.
std::uint64_t probe_noise_seed(const ExperimentConfig& config);

// In-memory scenario results, used by run_scenario and the tests.

struct DcSweepResult {
  std::vector<double> b;                // G
  std::vector<double> rotation;         // rad, integrated
  std::vector<double> closed_form;      // rad
};

/// Constant pumping at R0: steady rotation versus bias field.
DcSweepResult dc_sweep(const ValidatedConfig& vc);

struct LockinSweepResult {
  LockinSweep sweep;                    // read at the auto-phase
  DiscriminationCurve local;            // fine sweep around +B0 used to set the phase
  std::vector<ZeroCrossing> resonances; // steepest crossing in each half, negative first
};

LockinSweepResult lockin_sweep(const ValidatedConfig& vc);

struct SaCompareResult {
  Spectrum coherent;                    // dB re 1 V^2/Hz
  Spectrum squeezed;
  FloorEstimate floor_coherent;         // dB
  FloorEstimate floor_squeezed;
  double gap_db = 0.0;                  // coherent minus squeezed floor
};

SaCompareResult sa_compare(const ValidatedConfig& vc);

struct SensitivityResult {
  DiscriminationCurve discrimination;
  ResponseSpectrum response;
  Spectrum noise_coherent;              // ASD of lock-in X, V/sqrt(Hz)
  Spectrum noise_squeezed;
  SensitivityReport coherent;
  SensitivityReport squeezed;
  double improvement = 0.0;             // percent
};

SensitivityResult sensitivity_run(const ValidatedConfig& vc);

/// Config re-targeted to another cell temperature. Density scales the
/// coupling, the density broadening of Gamma and the cell absorption.
ValidatedConfig config_at_temperature(const ValidatedConfig& vc, double temperature_c);

struct TempScanResult {
  std::vector<double> temperatures;     // C
  std::vector<double> density;          // cm^-3
  std::vector<double> slope;            // V/G
  std::vector<double> signal_norm;
  std::vector<double> floor_coherent;   // dB re 1 V^2/Hz
  std::vector<double> floor_squeezed;
  std::vector<double> snr_coherent_norm;
  std::vector<double> snr_squeezed_norm;
};

TempScanResult temp_scan(const ValidatedConfig& vc, const std::vector<double>& grid);

/// Applies overrides, validates, runs, writes artifacts and the manifest
/// (last). On failure every file this run created is removed.
RunManifest run_scenario(const Scenario& scenario);

std::string format_manifest(const RunManifest& manifest);

}  // namespace amor
