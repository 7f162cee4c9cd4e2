#include "amor/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "amor/core.hpp"
#include "amor/error.hpp"
#include "amor/units.hpp"

namespace amor {

DetectorChain::DetectorChain(const ValidatedConfig& vc, const SpinDynamics& dynamics,
                             std::optional<NoiseModel> noise, std::uint64_t noise_seed)
    : integrator_(dynamics, vc.derived.dt),
      sample_rate_(vc.config.detection.sample_rate),
      substeps_(vc.derived.substeps),
      kappa_(vc.config.probe.coupling_kappa),
      gain_(vc.derived.effective_gain) {
  if (noise) noise_.emplace(*noise, sample_rate_, noise_seed);
}

double DetectorChain::next() {
  double phi = kappa_ * integrator_.state().Sy;
  if (noise_) phi += noise_->next();
  for (int s = 0; s < substeps_; ++s) integrator_.step();
  ++index_;
  return gain_ * phi;
}

ValidatedConfig with_bias(const ValidatedConfig& vc, double bias_Bz, double injection_amplitude,
                          double injection_freq) {
  ExperimentConfig c = vc.config;
  c.field.bias_Bz = bias_Bz;
  c.field.injection_amplitude = injection_amplitude;
  c.field.injection_freq = injection_amplitude > 0.0 ? injection_freq : 0.0;
  return validate_config(c);
}

ValidatedConfig with_fixed_step(const ValidatedConfig& vc, double max_field) {
  if (vc.config.simulation.dt > 0.0) return vc;
  ExperimentConfig c = vc.config;
  const double fastest =
      std::max({c.pump.mod_freq, larmor_frequency(max_field, c.field.gamma), vc.derived.larmor_hz});
  c.simulation.dt = integration_step(c.detection.sample_rate, fastest, 0.0).first;
  return validate_config(c);
}

std::size_t settle_samples(const ValidatedConfig& vc) {
  const auto& c = vc.config;
  const double t = c.simulation.transient_relaxation_times / c.cell.relaxation_Gamma +
                   c.simulation.settle_time_constants * c.detection.lockin_time_constant *
                       c.detection.lockin_filter_order;
  return static_cast<std::size_t>(std::ceil(t * c.detection.sample_rate));
}

std::pair<double, double> steady_lockin(const ValidatedConfig& vc, double bias_Bz, double phase,
                                        double average_time) {
  const auto point = with_bias(vc, bias_Bz);
  const auto& c = point.config;
  DetectorChain chain(point, SpinDynamics::from_config(point), std::nullopt, 0);
  Lockin lia(c.pump.mod_freq, c.detection.sample_rate, phase, c.detection.lockin_time_constant,
             c.detection.lockin_filter_order);
  const std::size_t skip = settle_samples(point);
  const auto n = static_cast<std::size_t>(std::ceil(average_time * c.detection.sample_rate));
  for (std::size_t i = 0; i < skip; ++i) lia.push(chain.next());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lia.push(chain.next());
    sx += lia.x();
    sy += lia.y();
  }
  return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

LockinOutput lockin_record(const ValidatedConfig& vc, double bias_Bz, double phase,
                           std::optional<NoiseModel> noise, std::uint64_t noise_seed,
                           double record_time, std::size_t decimation) {
  if (decimation == 0) throw DomainError("lockin_record: decimation must be >= 1");
  const auto point = with_bias(vc, bias_Bz);
  const auto& c = point.config;
  DetectorChain chain(point, SpinDynamics::from_config(point), noise, noise_seed);
  Lockin lia(c.pump.mod_freq, c.detection.sample_rate, phase, c.detection.lockin_time_constant,
             c.detection.lockin_filter_order);
  const std::size_t skip = settle_samples(point);
  const auto outputs = static_cast<std::size_t>(
      std::floor(record_time * c.detection.sample_rate / static_cast<double>(decimation)));

  LockinOutput out;
  out.sample_rate = c.detection.sample_rate / static_cast<double>(decimation);
  out.ref_freq = c.pump.mod_freq;
  out.phase = phase;
  out.time_constant = c.detection.lockin_time_constant;
  out.filter_order = c.detection.lockin_filter_order;
  out.x_series.reserve(outputs);
  out.y_series.reserve(outputs);
  for (std::size_t i = 0; i < skip; ++i) lia.push(chain.next());
  for (std::size_t k = 0; k < outputs; ++k) {
    for (std::size_t j = 0; j < decimation; ++j) lia.push(chain.next());
    out.x_series.push_back(lia.x());
    out.y_series.push_back(lia.y());
  }
  return out;
}

DetectorSeries detector_record(const ValidatedConfig& vc, std::optional<NoiseModel> noise,
                               std::uint64_t noise_seed, std::size_t samples,
                               const std::string& provenance) {
  const auto& c = vc.config;
  DetectorChain chain(vc, SpinDynamics::from_config(vc), noise, noise_seed);
  const auto skip = static_cast<std::size_t>(std::ceil(
      c.simulation.transient_relaxation_times / c.cell.relaxation_Gamma * c.detection.sample_rate));
  for (std::size_t i = 0; i < skip; ++i) chain.next();
  DetectorSeries out;
  out.sample_rate = c.detection.sample_rate;
  out.provenance = provenance;
  out.samples.resize(samples);
  for (auto& v : out.samples) v = chain.next();
  return out;
}

std::complex<double> injected_tone_response(const ValidatedConfig& vc, double bias_Bz, double phase,
                                            double amplitude, double freq) {
  const auto point = with_bias(vc, bias_Bz, amplitude, freq);
  const auto& c = point.config;
  const double fs = c.detection.sample_rate;
  DetectorChain chain(point, SpinDynamics::from_config(point), std::nullopt, 0);
  Lockin lia(c.pump.mod_freq, fs, phase, c.detection.lockin_time_constant,
             c.detection.lockin_filter_order);
  const std::size_t skip = settle_samples(point);
  for (std::size_t i = 0; i < skip; ++i) lia.push(chain.next());

  // Whole cycles of the test tone, at least 10 and at least 20 ms.
  const double cycles = std::ceil(std::max(10.0, 0.02 * freq));
  const auto n = static_cast<std::size_t>(std::llround(cycles * fs / freq));
  std::vector<double> x(n);
  for (auto& v : x) {
    lia.push(chain.next());
    v = lia.x();
  }
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  Oscillator tone(freq, fs);
  // Oscillator starts at t = 0; move it to the first recorded sample.
  for (std::size_t i = 0; i < skip; ++i) tone.advance();
  std::complex<double> acc{0.0, 0.0};
  for (double v : x) {
    acc += (v - mean) * std::complex<double>(tone.cos(), -tone.sin());
    tone.advance();
  }
  const std::complex<double> c_coef = 2.0 * acc / static_cast<double>(n);
  // a sin(wt - p) projects onto -i a e^{-ip}.
  return std::complex<double>(0.0, 1.0) * c_coef;
}

}  // namespace amor
