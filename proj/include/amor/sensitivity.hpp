#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "amor/config.hpp"
#include "amor/dsp.hpp"

namespace amor {

struct DiscriminationCurve {
  std::vector<double> b_grid;         // G
  std::vector<double> x_values;       // V, at `phase`
  std::vector<double> y_values;       // V
  double phase = 0.0;                 // lock-in phase chosen by auto_phase, rad
  double zero_crossing = 0.0;         // G
  double slope_at_crossing = 0.0;     // V/G, central difference
};

/// Noiseless lock-in sweep over [b_low, b_high] read at the auto-phase. The
/// range must contain +/- mod_freq / gamma.
DiscriminationCurve discrimination_sweep(const ValidatedConfig& vc, double b_low, double b_high,
                                         int n_points);

/// Small-signal slope kappa * gain * 2 pi gamma * (R1/2) / Gamma^2, V/G.
double analytic_discrimination_slope(const ValidatedConfig& vc);

struct ResponseFit {
  double dc_response = 0.0;           // V/G
  double atomic_pole = 0.0;           // Hz
  double lockin_pole = 0.0;           // Hz
  double residual = 0.0;              // RMS relative
};

struct ResponseSpectrum {
  std::vector<double> freqs;          // Hz
  std::vector<double> response;       // V/G
  ResponseFit fit;
  double linearity_deviation = 0.0;   // relative, amplitude vs amplitude/2
};

/// |H(f)| = H0 / sqrt((1 + (f/fa)^2)(1 + (f/fl)^2)).
double two_pole_response(const ResponseFit& fit, double f);

/// Fits the two-pole magnitude to (f, |H|) pairs. The pole closer to
/// `lockin_pole_hint` is reported as the lock-in pole.
ResponseFit fit_two_pole(const std::vector<double>& freqs, const std::vector<double>& response,
                         double lockin_pole_hint);

/// Injects B0 + b sin(2 pi f t) at the operating point and reads the X tone at
/// each frequency. Throws DataError when halving b changes the response by
/// more than 2 %.
ResponseSpectrum response_spectrum(const ValidatedConfig& vc, double bias_Bz, double phase,
                                   const std::vector<double>& freqs, double injection_amplitude);

struct SensitivityReport {
  std::vector<double> freqs;          // Hz
  std::vector<double> delta_B_min;    // G/sqrt(Hz)
  double band_low = 0.0;              // Hz
  double band_high = 0.0;             // Hz
  double plateau = 0.0;               // pT/sqrt(Hz), median over the band
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// delta_B_min(f) = noise ASD / response, with the response interpolated
/// log-log onto the noise grid. Only frequencies inside the response support
/// are kept.
SensitivityReport sensitivity_spectrum(const Spectrum& noise_asd, const ResponseSpectrum& response,
                                       double band_low, double band_high);

/// 100 (1 - plateau_squeezed / plateau_coherent).
double improvement_percent(const SensitivityReport& coherent, const SensitivityReport& squeezed);

std::string format_sensitivity(const SensitivityReport& report, const std::string& label);
std::string format_response(const ResponseSpectrum& response, const std::string& config_hash);
std::string format_discrimination(const DiscriminationCurve& curve, const std::string& config_hash);

}  // namespace amor
