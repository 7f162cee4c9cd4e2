#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "amor/config.hpp"
#include "amor/dsp.hpp"
#include "amor/error.hpp"
#include "amor/pipeline.hpp"
#include "amor/scenario.hpp"
#include "amor/sensitivity.hpp"
#include "amor/units.hpp"

using namespace amor;

namespace {

ValidatedConfig defaults() { return validate_config(paper_default_config()); }

Spectrum flat_asd(double level, double f_max, double df) {
  Spectrum s;
  s.kind = SpectrumKind::asd;
  s.rbw = df;
  for (double f = df; f <= f_max; f += df) {
    s.freqs.push_back(f);
    s.values.push_back(level);
  }
  return s;
}

ResponseSpectrum flat_response(double level) {
  ResponseSpectrum r;
  r.freqs = {10.0, 100.0, 1000.0, 3000.0};
  r.response.assign(4, level);
  return r;
}

SensitivityReport report_with_plateau(double plateau) {
  SensitivityReport r;
  r.band_low = 200.0;
  r.band_high = 500.0;
  r.plateau = plateau;
  return r;
}

const DiscriminationCurve& cached_curve() {
  static const DiscriminationCurve c = discrimination_sweep(with_fixed_step(defaults(), 0.86), 0.74, 0.86, 41);
  return c;
}

const ResponseSpectrum& cached_response() {
  static const ResponseSpectrum r = [] {
    const auto vc = with_fixed_step(defaults(), 0.86);
    return response_spectrum(vc, cached_curve().zero_crossing, cached_curve().phase,
                             {10.0, 100.0, 300.0, 531.0, 1000.0, 2000.0}, 0.5e-3);
  }();
  return r;
}

}  // namespace

TEST_CASE("two-pole model and fit") {
  ResponseFit truth{0.114, 10000.0, 531.0, 0.0};
  CHECK(two_pole_response(truth, 0.0) == doctest::Approx(0.114));
  CHECK(two_pole_response(truth, 531.0) ==
        doctest::Approx(0.114 / std::sqrt(2.0 * (1.0 + std::pow(0.0531, 2)))));

  std::vector<double> f, h;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 0.01);
  for (double x : {10.0, 20.0, 50.0, 100.0, 200.0, 400.0, 531.0, 700.0, 1000.0, 2000.0, 5000.0, 20000.0}) {
    f.push_back(x);
    h.push_back(two_pole_response(truth, x));
  }
  auto fit = fit_two_pole(f, h, 500.0);
  CHECK(fit.residual < 1e-6);
  CHECK(fit.dc_response == doctest::Approx(0.114).epsilon(1e-4));
  CHECK(fit.lockin_pole == doctest::Approx(531.0).epsilon(1e-4));
  CHECK(fit.atomic_pole == doctest::Approx(10000.0).epsilon(1e-3));

  for (auto& v : h) v *= 1.0 + g(rng);
  fit = fit_two_pole(f, h, 500.0);
  CHECK(fit.residual < 0.05);
  CHECK(fit.lockin_pole == doctest::Approx(531.0).epsilon(0.05));

  CHECK_THROWS_AS(fit_two_pole({1.0, 2.0}, {1.0, 1.0}, 500.0), DataError);
}

TEST_CASE("flat noise over flat response") {
  const auto rep = sensitivity_spectrum(flat_asd(2.0, 2000.0, 5.0), flat_response(4.0), 200.0, 500.0);
  REQUIRE(!rep.freqs.empty());
  for (double v : rep.delta_B_min) CHECK(v == doctest::Approx(0.5));
  CHECK(rep.plateau == doctest::Approx(0.5 * units::picotesla_per_gauss));
  CHECK(rep.freqs.front() >= 10.0);
  CHECK(rep.freqs.back() <= 2000.0);
}

TEST_CASE("improvement percent") {
  const auto coh = report_with_plateau(250.0);
  CHECK(improvement_percent(coh, report_with_plateau(250.0 * std::pow(10.0, -1.6 / 20.0))) ==
        doctest::Approx(16.8236).epsilon(1e-5));
  CHECK(improvement_percent(coh, report_with_plateau(250.0 * std::pow(10.0, -3.0 / 20.0))) ==
        doctest::Approx(29.2054).epsilon(1e-5));
  CHECK(improvement_percent(coh, coh) == 0.0);

  auto other = report_with_plateau(200.0);
  other.band_high = 600.0;
  CHECK_THROWS_AS(improvement_percent(coh, other), DataError);
}

TEST_CASE("improvement grows with squeezing") {
  const auto resp = flat_response(0.1);
  const auto coh = sensitivity_spectrum(flat_asd(1e-6, 2000.0, 5.0), resp, 200.0, 500.0);
  double last = -1.0;
  for (double db : {0.0, 0.5, 1.0, 1.6, 3.0, 6.0}) {
    const auto sq = sensitivity_spectrum(flat_asd(1e-6 * std::pow(10.0, -db / 20.0), 2000.0, 5.0), resp,
                                         200.0, 500.0);
    const double imp = improvement_percent(coh, sq);
    CHECK(imp > last - 1e-12);
    last = imp;
  }
}

TEST_CASE("sensitivity band must overlap the data") {
  CHECK_THROWS_AS(sensitivity_spectrum(flat_asd(1.0, 100.0, 5.0), flat_response(1.0), 200.0, 500.0),
                  DataError);
  CHECK_THROWS_AS(sensitivity_spectrum(flat_asd(1.0, 2000.0, 5.0), flat_response(1.0), 500.0, 200.0),
                  DomainError);
}

TEST_CASE("discrimination curve at the default operating point") {
  const auto vc = defaults();
  const auto fixed = with_fixed_step(vc, 0.86);
  const auto& curve = cached_curve();
  const double step = 0.12 / 40.0;
  CHECK(std::abs(curve.zero_crossing - 0.8) < step);
  const double analytic = analytic_discrimination_slope(vc);
  CHECK(std::abs(curve.slope_at_crossing) == doctest::Approx(analytic).epsilon(0.03));

  // The chosen phase beats every other probed phase.
  LockinSweep raw{curve.b_grid, curve.x_values, curve.y_values, curve.phase};
  double best = 0.0;
  for (const auto& zc : zero_crossings(raw, 0.0)) best = std::max(best, std::abs(zc.slope));
  for (int k = 1; k < 36; ++k) {
    for (const auto& zc : zero_crossings(raw, units::two_pi * k / 36.0)) {
      CHECK(std::abs(zc.slope) <= best * (1.0 + 1e-9));
    }
  }

  const auto mirror = discrimination_sweep(fixed, -0.86, -0.74, 41);
  CHECK(std::abs(mirror.zero_crossing + 0.8) < step);
  CHECK(std::abs(mirror.slope_at_crossing) ==
        doctest::Approx(std::abs(curve.slope_at_crossing)).epsilon(0.01));

  CHECK_THROWS_AS(discrimination_sweep(fixed, 0.81, 0.9, 11), DomainError);
}

TEST_CASE("frequency response") {
  const auto& r = cached_response();
  REQUIRE(r.response.size() == 6);
  const double analytic = analytic_discrimination_slope(defaults());
  CHECK(r.response.front() == doctest::Approx(analytic).epsilon(0.03));
  for (std::size_t i = 1; i < r.response.size(); ++i) CHECK(r.response[i] < r.response[i - 1]);
  CHECK(r.fit.lockin_pole == doctest::Approx(531.0).epsilon(0.05));
  CHECK(r.fit.residual < 0.05);
  CHECK(r.linearity_deviation < 0.02);
}

TEST_CASE("response rejects a nonlinear injection") {
  const auto vc = with_fixed_step(defaults(), 0.84);
  try {
    response_spectrum(vc, 0.8, 0.0, {10.0, 100.0, 1000.0}, 0.03);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("smaller amplitude") != std::string::npos);
  }
}

TEST_CASE("detector gain cancels in the sensitivity") {
  auto c = paper_default_config();
  c.scenario.sensitivity_record_time = 0.4;
  c.scenario.sensitivity_segment_bandwidth = 20.0;
  c.scenario.discrimination_points = 25;
  c.scenario.response_freqs = {10.0, 100.0, 300.0, 531.0, 1000.0, 2000.0};
  const auto a = sensitivity_run(validate_config(c));
  c.probe.detector_gain *= 4.0;
  const auto b = sensitivity_run(validate_config(c));
  CHECK(b.coherent.plateau == doctest::Approx(a.coherent.plateau).epsilon(1e-6));
  CHECK(b.squeezed.plateau == doctest::Approx(a.squeezed.plateau).epsilon(1e-6));
  CHECK(b.improvement == doctest::Approx(a.improvement).epsilon(1e-6));
  CHECK(b.response.fit.dc_response == doctest::Approx(4.0 * a.response.fit.dc_response).epsilon(1e-6));
  CHECK(a.coherent.plateau > a.squeezed.plateau);
}

TEST_CASE("sensitivity text export") {
  SensitivityReport r = report_with_plateau(250.0);
  r.freqs = {100.0};
  r.delta_B_min = {2.5e-6};
  r.config_hash = "h";
  r.seed = 9;
  const auto text = format_sensitivity(r, "coherent");
  CHECK(text.find("coherent") != std::string::npos);
  CHECK(text.find("seed 9") != std::string::npos);
  CHECK(text.find("pT") != std::string::npos);
}
