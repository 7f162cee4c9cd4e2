#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "amor/config.hpp"
#include "amor/core.hpp"
#include "amor/dsp.hpp"
#include "amor/error.hpp"
#include "amor/noise.hpp"
#include "amor/units.hpp"

using namespace amor;

namespace {

double mean_psd(const Spectrum& s, double lo, double hi) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < s.freqs.size(); ++k) {
    if (s.freqs[k] >= lo && s.freqs[k] < hi) {
      sum += s.values[k];
      ++n;
    }
  }
  return sum / n;
}

}  // namespace

TEST_CASE("loss on the default squeezing") {
  const double out = loss_propagated_variance(db_to_variance(-1.9), 0.90);
  CHECK(variance_to_db(out) == doctest::Approx(-1.668).epsilon(1e-3));
  CHECK(std::abs(variance_to_db(out) - (-1.67)) <= 0.01);
  CHECK(loss_propagated_variance(1.0, 0.3) == doctest::Approx(1.0));
  CHECK(loss_propagated_variance(0.5, 0.0) == doctest::Approx(1.0));
  CHECK(loss_propagated_variance(0.5, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("loss contracts toward vacuum") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v(0.01, 10.0), e(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double vin = v(rng), eta = e(rng);
    const double out = loss_propagated_variance(vin, eta);
    CHECK(std::abs(out - 1.0) == doctest::Approx(eta * std::abs(vin - 1.0)).epsilon(1e-12));
    if (vin < 1.0 && eta < 1.0) {
      CHECK(out > vin);
      CHECK(out <= 1.0);
    }
  }
}

TEST_CASE("quadrature variance") {
  CHECK(quadrature_variance(units::pi / 4, 0.5, 4.0) == doctest::Approx(2.25));
  CHECK(quadrature_variance(0.0, 0.5, 4.0) == doctest::Approx(0.5));
  CHECK(quadrature_variance(units::pi / 2, 0.5, 4.0) == doctest::Approx(4.0));
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> th(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double t = th(rng);
    const double q = quadrature_variance(t, 0.6, 6.3);
    CHECK(q == doctest::Approx(quadrature_variance(t + units::pi, 0.6, 6.3)).epsilon(1e-12));
    CHECK(q >= 0.6 * (1 - 1e-12));
    CHECK(q <= 6.3 * (1 + 1e-12));
  }
}

TEST_CASE("shot noise at the default probe power") {
  // h c / 795 nm = 2.4987e-19 J; 6.5 mW gives 2.6014e16 photons/s.
  CHECK(shot_noise_asd_from_power(6.5, 795.0) == doctest::Approx(3.1000459e-9).epsilon(1e-6));
  CHECK(shot_noise_asd_from_power(4 * 6.5, 795.0) ==
        doctest::Approx(0.5 * shot_noise_asd_from_power(6.5, 795.0)));
  CHECK_THROWS_AS(shot_noise_asd_from_power(0.0, 795.0), DomainError);
}

TEST_CASE("excess atomic noise law") {
  const auto c = paper_default_config().noise;
  CHECK(excess_atomic_noise_variance(5.5e10, c) < 0.05);
  double prev = 0.0;
  for (double n = 1e10; n < 1e12; n *= 1.3) {
    const double e = excess_atomic_noise_variance(n, c);
    CHECK(e >= prev);
    prev = e;
  }
  // Calibration endpoint: the gap closes to the requested value.
  const double v = 0.9;
  const double coef = calibrate_excess_coefficient(v, 10.0, 2.0, 0.2);
  const double e = coef * 100.0;
  CHECK(variance_to_db((1.0 + e) / (v + e)) == doctest::Approx(0.2).epsilon(1e-10));
  CHECK_THROWS_AS(calibrate_excess_coefficient(0.99, 10.0, 2.0, 0.2), DomainError);
}

TEST_CASE("white noise is flat at the shot level") {
  NoiseModel m;
  m.shot_asd = 3.1e-9;
  const double fs = 1e6;
  const auto s = synthesize_probe_noise(m, 1u << 20, fs, 17);
  const auto psd = psd_estimate(s.samples, fs, fs / 1024.0, 0);
  const double level = m.shot_asd * m.shot_asd;
  // Octave-averaged bins.
  for (double lo = fs / 512.0; lo < fs / 2.0; lo *= 2.0) {
    const double avg = mean_psd(psd, lo, std::min(2.0 * lo, fs / 2.0));
    CHECK(std::abs(10.0 * std::log10(avg / level)) < 1.0);
    CHECK(avg == doctest::Approx(level).epsilon(0.05));
  }
}

TEST_CASE("squeezed white floor sits 1.6 dB below coherent") {
  NoiseModel coh, sq;
  coh.shot_asd = sq.shot_asd = 3.1e-9;
  sq.squeeze_variance_factor = std::pow(10.0, -0.16);
  const double fs = 1e6;
  const auto a = psd_estimate(synthesize_probe_noise(coh, 1u << 20, fs, 1).samples, fs, 1000.0, 0);
  const auto b = psd_estimate(synthesize_probe_noise(sq, 1u << 20, fs, 2).samples, fs, 1000.0, 0);
  const double gap = 10.0 * std::log10(mean_psd(a, 1e3, 4.9e5) / mean_psd(b, 1e3, 4.9e5));
  CHECK(gap == doctest::Approx(1.6).epsilon(0.02));
}

TEST_CASE("flicker component follows 1/f below the corner") {
  NoiseModel m;
  m.flicker_corner = 100.0;
  m.flicker_asd_at_corner = 1.0;
  m.flicker_floor = 0.1;
  const double fs = 2000.0;
  const auto s = synthesize_probe_noise(m, 1u << 21, fs, 23);
  const auto psd = psd_estimate(s.samples, fs, 0.25, 0);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
    const double f = psd.freqs[k];
    if (f < 2.0 || f > 40.0) continue;
    const double x = std::log10(f), y = std::log10(psd.values[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(-1.0).epsilon(0.1));
  // Analytic level from the pole bank.
  CHECK(mean_psd(psd, 9.0, 11.0) == doctest::Approx(flicker_psd(m, 10.0)).epsilon(0.15));
  CHECK(flicker_psd(m, 10.0) == doctest::Approx(10.0).epsilon(0.15));
}

TEST_CASE("noise generation is deterministic and seed-sensitive") {
  const auto vc = validate_config(paper_default_config());
  const auto m = make_noise_model(vc, true);
  const auto a = synthesize_probe_noise(m, 100000, 5.8e6, 99);
  const auto b = synthesize_probe_noise(m, 100000, 5.8e6, 99);
  const auto c = synthesize_probe_noise(m, 100000, 5.8e6, 100);
  CHECK(std::memcmp(a.samples.data(), b.samples.data(), a.samples.size() * sizeof(double)) == 0);
  CHECK(a.samples != c.samples);
  CHECK_THROWS(synthesize_probe_noise(m, 1, 5.8e6, 1));
}

TEST_CASE("default noise model") {
  const auto vc = validate_config(paper_default_config());
  const auto coh = make_noise_model(vc, false);
  const auto sq = make_noise_model(vc, true);
  CHECK(coh.squeeze_variance_factor == 1.0);
  CHECK(variance_to_db(sq.squeeze_variance_factor) == doctest::Approx(-1.668).epsilon(1e-3));
  CHECK(coh.flicker_carrier == 580e3);
  const auto b = noise_breakdown(sq, 5.8e6);
  CHECK(b.squeezed_white_variance / b.shot_variance == doctest::Approx(sq.squeeze_variance_factor));
  CHECK(b.flicker_variance > 0.0);
}
