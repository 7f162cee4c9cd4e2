#pragma once

#include <complex>
#include <cstdint>
#include <optional>

#include "amor/config.hpp"
#include "amor/dsp.hpp"
#include "amor/noise.hpp"
#include "amor/spin.hpp"

namespace amor {

/// Streaming simulation of the detection chain: spin integration, optical
/// rotation, probe noise, balanced detector. One call to next() yields the
/// detector voltage at t_k = k / sample_rate, then advances the spin state by
/// `substeps` integration steps.
class DetectorChain {
 public:
  DetectorChain(const ValidatedConfig& vc, const SpinDynamics& dynamics,
                std::optional<NoiseModel> noise, std::uint64_t noise_seed);

  double next();
  double sample_rate() const { return sample_rate_; }
  double time() const { return static_cast<double>(index_) / sample_rate_; }
  const SpinState& spin() const { return integrator_.state(); }

 private:
  SpinIntegrator integrator_;
  std::optional<ProbeNoiseGenerator> noise_;
  double sample_rate_;
  int substeps_;
  double kappa_;
  double gain_;
  std::uint64_t index_ = 0;
};

/// Validated copy with a different bias field, so the integration step
/// follows the Larmor frequency of that point.
ValidatedConfig with_bias(const ValidatedConfig& vc, double bias_Bz, double injection_amplitude = 0.0,
                          double injection_freq = 0.0);

/// Copy with the integration step pinned to what a bias of |max_field| needs,
/// so every point of a sweep integrates with the same step. Configs with an
/// explicit simulation.dt are returned unchanged.
ValidatedConfig with_fixed_step(const ValidatedConfig& vc, double max_field);

/// Samples to skip before lock-in statistics: spin transient plus filter settling.
std::size_t settle_samples(const ValidatedConfig& vc);

/// Noiseless steady-state lock-in reading (X, Y) at `phase`, averaged over
/// `average_time` after settling.
std::pair<double, double> steady_lockin(const ValidatedConfig& vc, double bias_Bz, double phase,
                                        double average_time);

/// Settled lock-in record with optional probe noise, decimated to the
/// output rate.
LockinOutput lockin_record(const ValidatedConfig& vc, double bias_Bz, double phase,
                           std::optional<NoiseModel> noise, std::uint64_t noise_seed,
                           double record_time, std::size_t decimation);

/// Raw detector record after the spin transient, for analyzer traces.
DetectorSeries detector_record(const ValidatedConfig& vc, std::optional<NoiseModel> noise,
                               std::uint64_t noise_seed, std::size_t samples,
                               const std::string& provenance);

/// Complex amplitude of the lock-in X output at `freq` when the field is
/// modulated as B0 + amplitude sin(2 pi freq t), noiseless. Returned relative
/// to sin(2 pi freq t).
std::complex<double> injected_tone_response(const ValidatedConfig& vc, double bias_Bz, double phase,
                                            double amplitude, double freq);

}  // namespace amor
