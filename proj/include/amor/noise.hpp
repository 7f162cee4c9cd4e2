#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "amor/config.hpp"
#include "amor/oscillator.hpp"

namespace amor {

/// Detector-referred probe noise, in rotation-angle units.
struct NoiseModel {
  double shot_asd = 0.0;                // rad/sqrt(Hz), coherent probe
  double squeeze_variance_factor = 1.0; // 1 = coherent
  double flicker_corner = 0.0;          // Hz
  double flicker_asd_at_corner = 0.0;   // rad/sqrt(Hz), 1/f asymptote at the corner
  double excess_variance_factor = 0.0;  // adds to the white floor, in shot units
  double flicker_floor = 0.1;           // Hz, lowest shaping pole
  /// Frequency the technical noise is centred on. 0 puts it at baseband;
  /// the modulation frequency puts it around the carrier so it shows up at
  /// low frequency after demodulation.
  double flicker_carrier = 0.0;         // Hz

  /// One-sided white ASD after squeezing and excess noise.
  double white_asd() const;
};

struct NoiseBreakdown {
  double shot_variance = 0.0;           // coherent white variance at this sample rate
  double squeezed_white_variance = 0.0; // shot * squeeze factor
  double excess_variance = 0.0;
  double flicker_variance = 0.0;
};

struct NoiseSeries {
  double sample_rate = 0.0;
  std::vector<double> samples;
  std::uint64_t seed = 0;
  NoiseBreakdown component_breakdown;
};

/// Beam-splitter loss on a quadrature variance: eta * v + (1 - eta).
double loss_propagated_variance(double v_in, double eta);

/// Variance of the quadrature at angle theta from the squeezed axis.
double quadrature_variance(double theta, double v_squeeze, double v_antisqueeze);

/// Rotation-angle shot-noise ASD 1 / (2 sqrt(photon flux)), rad/sqrt(Hz).
double shot_noise_asd_from_power(double power_mw, double wavelength_nm);

/// Phenomenological excess atomic noise c * (n / n_ref)^p, in shot units.
double excess_atomic_noise_variance(double density, const NoiseConfig& config);

/// Detected quadrature variance of the probe before the magnetometer cell.
double detected_input_variance(const SqueezeConfig& squeeze);

/// Solves for the excess-noise coefficient that leaves the squeezed floor
/// `gap_db` below the coherent one at a density `density_ratio` times the
/// reference density, where the squeezed white variance is `v_squeezed`.
double calibrate_excess_coefficient(double v_squeezed, double density_ratio, double exponent,
                                    double gap_db);

/// Analytic one-sided PSD of the shaped flicker component, rad^2/Hz, at an
/// offset f from the flicker carrier (one quadrature pair summed).
double flicker_psd(const NoiseModel& model, double f);

NoiseBreakdown noise_breakdown(const NoiseModel& model, double sample_rate);

/// Builds the noise model of a validated scenario for the given probe state.
NoiseModel make_noise_model(const ValidatedConfig& vc, bool squeezed);

/// Sample-by-sample noise source. White and flicker parts draw from separate
/// streams derived from `seed`, so changing one never perturbs the other.
class ProbeNoiseGenerator {
 public:
  ProbeNoiseGenerator(const NoiseModel& model, double sample_rate, std::uint64_t seed);

  double next();

 private:
  struct Pole {
    double decay;
    double drive;
    double state[2];
  };

  void update_flicker();

  double white_sigma_;
  std::mt19937_64 white_rng_;
  std::normal_distribution<double> normal_;

  bool has_flicker_ = false;
  bool carrier_mode_ = false;
  std::mt19937_64 flicker_rng_;
  std::vector<Pole> poles_;
  std::size_t flicker_decimation_ = 1;
  std::size_t flicker_phase_ = 0;
  double prev_[2] = {0.0, 0.0};
  double next_[2] = {0.0, 0.0};
  Oscillator carrier_;
};

NoiseSeries synthesize_probe_noise(const NoiseModel& model, std::size_t length,
                                   double sample_rate, std::uint64_t seed);

}  // namespace amor
