#include "amor/noise.hpp"

#include <algorithm>
#include <cmath>

#include "amor/core.hpp"
#include "amor/error.hpp"
#include "amor/io.hpp"
#include "amor/units.hpp"

namespace amor {

namespace {

// Shaping poles per decade of the flicker bank.
constexpr double kPolesPerDecade = 3.0;

double pole_ratio() { return std::pow(10.0, 1.0 / kPolesPerDecade); }

std::vector<double> flicker_poles(double corner, double floor) {
  std::vector<double> poles;
  if (corner <= 0.0) return poles;
  const double r = pole_ratio();
  for (double p = corner; p >= floor * (1.0 - 1e-12); p /= r) poles.push_back(p);
  if (poles.empty()) poles.push_back(corner);
  return poles;
}

// Equal variance per pole gives S(f) ~ sigma^2 / (f ln r) inside the band.
double pole_variance(const NoiseModel& m) {
  return m.flicker_asd_at_corner * m.flicker_asd_at_corner * m.flicker_corner *
         std::log(pole_ratio());
}

}  // namespace

double NoiseModel::white_asd() const {
  return shot_asd * std::sqrt(squeeze_variance_factor + excess_variance_factor);
}

double loss_propagated_variance(double v_in, double eta) {
  return eta * v_in + (1.0 - eta);
}

double quadrature_variance(double theta, double v_squeeze, double v_antisqueeze) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return v_squeeze * c * c + v_antisqueeze * s * s;
}

double shot_noise_asd_from_power(double power_mw, double wavelength_nm) {
  if (!(power_mw > 0.0)) throw DomainError("shot_noise_asd_from_power: power must be positive");
  const double photon_energy = units::planck * units::speed_of_light / (wavelength_nm * 1e-9);
  const double flux = power_mw * 1e-3 / photon_energy;
  return 1.0 / (2.0 * std::sqrt(flux));
}

double excess_atomic_noise_variance(double density, const NoiseConfig& config) {
  if (!(density > 0.0)) throw DomainError("excess_atomic_noise_variance: density must be positive");
  return config.excess_coefficient *
         std::pow(density / config.excess_reference_density, config.excess_exponent);
}

double detected_input_variance(const SqueezeConfig& squeeze) {
  if (!squeeze.enabled) return 1.0;
  return quadrature_variance(squeeze.quadrature_angle, db_to_variance(squeeze.squeezing_dB),
                             db_to_variance(squeeze.antisqueezing_dB));
}

double calibrate_excess_coefficient(double v_squeezed, double density_ratio, double exponent,
                                    double gap_db) {
  // (v + E) / (1 + E) = 10^(-gap/10)  =>  E = (v - g) / (g - 1) with g the linear ratio.
  const double g = std::pow(10.0, -gap_db / 10.0);
  const double excess = (v_squeezed - g) / (g - 1.0);
  if (!(excess >= 0.0)) {
    throw DomainError("calibrate_excess_coefficient: squeezing already below the target gap");
  }
  return excess / std::pow(density_ratio, exponent);
}

double flicker_psd(const NoiseModel& model, double f) {
  if (model.flicker_asd_at_corner <= 0.0 || model.flicker_corner <= 0.0) return 0.0;
  const double var = pole_variance(model);
  double sum = 0.0;
  for (double p : flicker_poles(model.flicker_corner, model.flicker_floor)) {
    const double x = f / p;
    sum += 2.0 * var / (units::pi * p) / (1.0 + x * x);
  }
  return sum;
}

NoiseBreakdown noise_breakdown(const NoiseModel& model, double sample_rate) {
  NoiseBreakdown b;
  const double per_unit = model.shot_asd * model.shot_asd * sample_rate / 2.0;
  b.shot_variance = per_unit;
  b.squeezed_white_variance = per_unit * model.squeeze_variance_factor;
  b.excess_variance = per_unit * model.excess_variance_factor;
  if (model.flicker_asd_at_corner > 0.0 && model.flicker_corner > 0.0) {
    const double n = static_cast<double>(flicker_poles(model.flicker_corner, model.flicker_floor).size());
    b.flicker_variance = n * pole_variance(model) * (model.flicker_carrier > 0.0 ? 2.0 : 1.0);
  }
  return b;
}

NoiseModel make_noise_model(const ValidatedConfig& vc, bool squeezed) {
  const auto& c = vc.config;
  NoiseModel m;
  m.shot_asd = vc.derived.shot_asd;
  m.squeeze_variance_factor = squeezed ? vc.derived.squeeze_variance_out : 1.0;
  m.excess_variance_factor = vc.derived.excess_variance;
  m.flicker_corner = c.noise.flicker_corner;
  m.flicker_asd_at_corner = c.noise.flicker_asd_at_corner;
  m.flicker_floor = c.noise.flicker_floor;
  m.flicker_carrier = c.pump.mod_freq;
  return m;
}

ProbeNoiseGenerator::ProbeNoiseGenerator(const NoiseModel& model, double sample_rate,
                                         std::uint64_t seed)
    : white_sigma_(model.white_asd() * std::sqrt(sample_rate / 2.0)),
      white_rng_(io::derive_seed(seed, "white")),
      flicker_rng_(io::derive_seed(seed, "flicker")),
      carrier_(model.flicker_carrier, sample_rate) {
  if (!(sample_rate > 0.0)) throw DomainError("noise sample rate must be positive");
  has_flicker_ = model.flicker_asd_at_corner > 0.0 && model.flicker_corner > 0.0;
  carrier_mode_ = model.flicker_carrier > 0.0;
  if (!has_flicker_) return;

  flicker_decimation_ = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(sample_rate / (200.0 * model.flicker_corner))));
  const double update_dt = static_cast<double>(flicker_decimation_) / sample_rate;
  const double sigma = std::sqrt(pole_variance(model));
  for (double p : flicker_poles(model.flicker_corner, model.flicker_floor)) {
    const double a = std::exp(-units::two_pi * p * update_dt);
    Pole pole{a, sigma * std::sqrt(1.0 - a * a), {0.0, 0.0}};
    // Start from the stationary distribution.
    pole.state[0] = sigma * normal_(flicker_rng_);
    pole.state[1] = sigma * normal_(flicker_rng_);
    poles_.push_back(pole);
  }
  for (const auto& p : poles_) {
    next_[0] += p.state[0];
    next_[1] += p.state[1];
  }
  update_flicker();
}

void ProbeNoiseGenerator::update_flicker() {
  prev_[0] = next_[0];
  prev_[1] = next_[1];
  next_[0] = next_[1] = 0.0;
  for (auto& p : poles_) {
    for (int q = 0; q < 2; ++q) {
      p.state[q] = p.decay * p.state[q] + p.drive * normal_(flicker_rng_);
      next_[q] += p.state[q];
    }
  }
}

double ProbeNoiseGenerator::next() {
  double value = white_sigma_ * normal_(white_rng_);
  if (has_flicker_) {
    const double frac =
        static_cast<double>(flicker_phase_) / static_cast<double>(flicker_decimation_);
    const double a = prev_[0] + (next_[0] - prev_[0]) * frac;
    if (carrier_mode_) {
      const double b = prev_[1] + (next_[1] - prev_[1]) * frac;
      value += std::numbers::sqrt2 * (a * carrier_.cos() - b * carrier_.sin());
      carrier_.advance();
    } else {
      value += a;
    }
    if (++flicker_phase_ == flicker_decimation_) {
      flicker_phase_ = 0;
      update_flicker();
    }
  }
  return value;
}

NoiseSeries synthesize_probe_noise(const NoiseModel& model, std::size_t length,
                                   double sample_rate, std::uint64_t seed) {
  if (length < 2) throw DomainError("synthesize_probe_noise: length must be at least 2");
  NoiseSeries out;
  out.sample_rate = sample_rate;
  out.seed = seed;
  out.component_breakdown = noise_breakdown(model, sample_rate);
  out.samples.resize(length);
  ProbeNoiseGenerator gen(model, sample_rate, seed);
  for (auto& s : out.samples) s = gen.next();
  return out;
}

}  // namespace amor
