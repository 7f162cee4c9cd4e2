#include "amor/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "amor/core.hpp"
#include "amor/error.hpp"
#include "amor/io.hpp"
#include "amor/parallel.hpp"
#include "amor/pipeline.hpp"
#include "amor/spin.hpp"
#include "amor/units.hpp"

namespace amor {

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) throw DataError("median of an empty set");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

double interp_loglog(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  auto it = std::lower_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return ys.front();
  if (it == xs.end()) return ys.back();
  const auto j = static_cast<std::size_t>(it - xs.begin());
  if (xs[j] == x) return ys[j];
  const double t = std::log(x / xs[j - 1]) / std::log(xs[j] / xs[j - 1]);
  return ys[j - 1] * std::pow(ys[j] / ys[j - 1], t);
}

}  // namespace

DiscriminationCurve discrimination_sweep(const ValidatedConfig& vc_in, double b_low, double b_high,
                                         int n_points) {
  const auto vc = with_fixed_step(vc_in, std::max(std::abs(b_low), std::abs(b_high)));
  const auto& c = vc.config;
  if (n_points < 5) throw DomainError("discrimination_sweep: need at least 5 points");
  if (!(b_high > b_low)) throw DomainError("discrimination_sweep: empty field range");
  const double b_res = c.pump.mod_freq / c.field.gamma;
  const bool straddles = (b_low < b_res && b_res < b_high) || (b_low < -b_res && -b_res < b_high);
  if (!straddles) {
    throw DomainError("discrimination_sweep: range [" + io::format_double(b_low) + ", " +
                      io::format_double(b_high) + "] G does not contain the resonance at +/-" +
                      io::format_double(b_res) + " G");
  }

  LockinSweep raw;
  const auto n = static_cast<std::size_t>(n_points);
  raw.b.resize(n);
  raw.x.resize(n);
  raw.y.resize(n);
  raw.phase = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    raw.b[i] = b_low + (b_high - b_low) * static_cast<double>(i) / static_cast<double>(n - 1);
  parallel_for(n, [&](std::size_t i) {
    const auto [x, y] = steady_lockin(vc, raw.b[i], 0.0, c.scenario.lockin_sweep_average_time);
    raw.x[i] = x;
    raw.y[i] = y;
  });

  const double phase = auto_phase(raw);
  const LockinSweep rotated = rotate_sweep(raw, phase);
  const auto crossings = zero_crossings(rotated, 0.0);
  const auto best = std::max_element(crossings.begin(), crossings.end(),
                                     [](const ZeroCrossing& a, const ZeroCrossing& b) {
                                       return a.slope < b.slope;
                                     });
  if (best == crossings.end()) throw DataError("discrimination_sweep: no zero crossing in range");

  DiscriminationCurve out;
  out.b_grid = rotated.b;
  out.x_values = rotated.x;
  out.y_values = rotated.y;
  out.phase = phase;
  out.zero_crossing = best->b;
  std::size_t k = best->index;
  if (std::abs(out.b_grid[k + 1] - best->b) < std::abs(out.b_grid[k] - best->b)) ++k;
  k = std::clamp<std::size_t>(k, 1, n - 2);
  out.slope_at_crossing =
      (out.x_values[k + 1] - out.x_values[k - 1]) / (out.b_grid[k + 1] - out.b_grid[k - 1]);
  return out;
}

double analytic_discrimination_slope(const ValidatedConfig& vc) {
  const auto& c = vc.config;
  const double g = c.cell.relaxation_Gamma;
  const double r1 = pump_fundamental(c.pump).R1;
  return c.probe.coupling_kappa * vc.derived.effective_gain * units::two_pi * c.field.gamma *
         0.5 * r1 / (g * g);
}

double two_pole_response(const ResponseFit& fit, double f) {
  const double a = f / fit.atomic_pole;
  const double l = f / fit.lockin_pole;
  return fit.dc_response / std::sqrt((1.0 + a * a) * (1.0 + l * l));
}

ResponseFit fit_two_pole(const std::vector<double>& freqs, const std::vector<double>& response,
                         double lockin_pole_hint) {
  const std::size_t n = freqs.size();
  if (n < 3 || response.size() != n) throw DataError("fit_two_pole: need at least 3 points");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(freqs[i] > 0.0) || !(response[i] > 0.0))
      throw DataError("fit_two_pole: frequencies and responses must be positive");
  }

  // Start: 1/H^2 = a + b f^2 + c f^4, rows scaled to relative error.
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd rhs(n);
  const double fscale = *std::max_element(freqs.begin(), freqs.end());
  for (std::size_t i = 0; i < n; ++i) {
    const double u = freqs[i] / fscale;
    const double w = response[i] * response[i];
    A(static_cast<Eigen::Index>(i), 0) = w;
    A(static_cast<Eigen::Index>(i), 1) = w * u * u;
    A(static_cast<Eigen::Index>(i), 2) = w * u * u * u * u;
    rhs(static_cast<Eigen::Index>(i)) = 1.0;
  }
  const Eigen::Vector3d abc = A.colPivHouseholderQr().solve(rhs);
  double h0 = response.front(), fa = fscale, fl = lockin_pole_hint;
  if (abc(0) > 0.0) {
    h0 = 1.0 / std::sqrt(abc(0));
    const double s = abc(1) / abc(0), p = abc(2) / abc(0);
    const double disc = s * s - 4.0 * p;
    if (p > 0.0 && s > 0.0 && disc >= 0.0) {
      const double r1 = 0.5 * (s + std::sqrt(disc)), r2 = 0.5 * (s - std::sqrt(disc));
      fa = fscale / std::sqrt(r1);
      fl = fscale / std::sqrt(r2);
    }
  }

  // Levenberg-Marquardt on log residuals, parameters in log space.
  Eigen::Vector3d p(std::log(h0), std::log(fa), std::log(fl));
  auto residuals = [&](const Eigen::Vector3d& q, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
    r.resize(static_cast<Eigen::Index>(n));
    if (J) J->resize(static_cast<Eigen::Index>(n), 3);
    const double a_pole = std::exp(q(1)), l_pole = std::exp(q(2));
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double ua = std::pow(freqs[i] / a_pole, 2), ul = std::pow(freqs[i] / l_pole, 2);
      r(k) = q(0) - 0.5 * std::log1p(ua) - 0.5 * std::log1p(ul) - std::log(response[i]);
      if (J) {
        (*J)(k, 0) = 1.0;
        (*J)(k, 1) = ua / (1.0 + ua);
        (*J)(k, 2) = ul / (1.0 + ul);
      }
    }
  };
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  residuals(p, r, &J);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  for (int it = 0; it < 200; ++it) {
    const Eigen::Matrix3d JtJ = J.transpose() * J;
    const Eigen::Vector3d g = J.transpose() * r;
    Eigen::Matrix3d damped = JtJ;
    damped.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-12);
    const Eigen::Vector3d step = damped.ldlt().solve(-g);
    const Eigen::Vector3d trial = p + step;
    Eigen::VectorXd rt;
    residuals(trial, rt, nullptr);
    const double trial_cost = rt.squaredNorm();
    if (std::isfinite(trial_cost) && trial_cost < cost) {
      p = trial;
      const double gain = cost - trial_cost;
      cost = trial_cost;
      residuals(p, r, &J);
      lambda = std::max(lambda * 0.3, 1e-12);
      if (gain < 1e-16 * std::max(cost, 1e-30) || step.norm() < 1e-12) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }

  ResponseFit fit;
  fit.dc_response = std::exp(p(0));
  double pa = std::exp(p(1)), pl = std::exp(p(2));
  if (std::abs(std::log(pa / lockin_pole_hint)) < std::abs(std::log(pl / lockin_pole_hint)))
    std::swap(pa, pl);
  fit.atomic_pole = pa;
  fit.lockin_pole = pl;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double rel = two_pole_response(fit, freqs[i]) / response[i] - 1.0;
    ss += rel * rel;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

ResponseSpectrum response_spectrum(const ValidatedConfig& vc_in, double bias_Bz, double phase,
                                   const std::vector<double>& freqs, double injection_amplitude) {
  const auto vc = with_fixed_step(vc_in, std::abs(bias_Bz) + injection_amplitude);
  if (freqs.empty()) throw DomainError("response_spectrum: no frequencies");
  if (!(injection_amplitude > 0.0)) throw DomainError("response_spectrum: amplitude must be > 0");
  if (!std::is_sorted(freqs.begin(), freqs.end()) ||
      std::adjacent_find(freqs.begin(), freqs.end()) != freqs.end() || !(freqs.front() > 0.0)) {
    throw DomainError("response_spectrum: frequencies must be positive and strictly increasing");
  }
  const double fs = vc.config.detection.sample_rate;
  if (freqs.back() >= 0.5 * fs) throw DomainError("response_spectrum: frequency above Nyquist");

  ResponseSpectrum out;
  out.freqs = freqs;
  out.response.resize(freqs.size());
  // Linearity at the lowest frequency, where the response is largest.
  std::complex<double> half;
  parallel_for(freqs.size() + 1, [&](std::size_t i) {
    if (i == freqs.size()) {
      half = injected_tone_response(vc, bias_Bz, phase, 0.5 * injection_amplitude, freqs.front()) /
             (0.5 * injection_amplitude);
      return;
    }
    out.response[i] =
        std::abs(injected_tone_response(vc, bias_Bz, phase, injection_amplitude, freqs[i])) /
        injection_amplitude;
  });
  out.linearity_deviation = std::abs(std::abs(half) / out.response.front() - 1.0);
  if (out.linearity_deviation > 0.02) {
    throw DataError("response_spectrum: response changes by " +
                    io::format_double(100.0 * out.linearity_deviation) +
                    " % when the injection amplitude is halved; use a smaller amplitude");
  }
  for (double r : out.response) {
    if (!(r > 0.0)) throw DataError("response_spectrum: zero response at an injection frequency");
  }
  const double hint = 1.0 / (units::two_pi * vc.config.detection.lockin_time_constant);
  out.fit = fit_two_pole(out.freqs, out.response, hint);
  return out;
}

SensitivityReport sensitivity_spectrum(const Spectrum& noise_asd, const ResponseSpectrum& response,
                                       double band_low, double band_high) {
  if (noise_asd.kind != SpectrumKind::asd)
    throw DataError("sensitivity_spectrum: noise spectrum must be an ASD");
  if (response.freqs.empty()) throw DataError("sensitivity_spectrum: empty response");
  if (!(band_high > band_low)) throw DomainError("sensitivity_spectrum: empty plateau band");
  const double lo = response.freqs.front(), hi = response.freqs.back();

  SensitivityReport out;
  out.band_low = band_low;
  out.band_high = band_high;
  std::vector<double> band;
  for (std::size_t i = 0; i < noise_asd.freqs.size(); ++i) {
    const double f = noise_asd.freqs[i];
    if (f < lo || f > hi) continue;
    const double db = noise_asd.values[i] / interp_loglog(response.freqs, response.response, f);
    out.freqs.push_back(f);
    out.delta_B_min.push_back(db);
    if (f >= band_low && f <= band_high) band.push_back(db);
  }
  if (out.freqs.empty()) throw DataError("sensitivity_spectrum: noise and response do not overlap");
  if (band.empty()) throw DataError("sensitivity_spectrum: no bins inside the plateau band");
  out.plateau = median_of(band) * units::picotesla_per_gauss;
  return out;
}

double improvement_percent(const SensitivityReport& coherent, const SensitivityReport& squeezed) {
  if (coherent.band_low != squeezed.band_low || coherent.band_high != squeezed.band_high)
    throw DataError("improvement_percent: reports use different plateau bands");
  if (!(coherent.plateau > 0.0)) throw DataError("improvement_percent: coherent plateau is zero");
  return 100.0 * (1.0 - squeezed.plateau / coherent.plateau);
}

std::string format_sensitivity(const SensitivityReport& report, const std::string& label) {
  std::vector<double> pt(report.delta_B_min.size());
  for (std::size_t i = 0; i < pt.size(); ++i)
    pt[i] = report.delta_B_min[i] * units::picotesla_per_gauss;
  return io::format_columns(
      {"sensitivity " + label, "config_hash " + report.config_hash,
       "seed " + std::to_string(report.seed),
       "band_Hz " + io::format_double(report.band_low) + " " + io::format_double(report.band_high),
       "plateau_pT_per_rtHz " + io::format_double(report.plateau)},
      {"f_Hz", "dBmin_G_per_rtHz", "dBmin_pT_per_rtHz"}, {report.freqs, report.delta_B_min, pt});
}

std::string format_response(const ResponseSpectrum& response, const std::string& config_hash) {
  std::vector<double> model(response.freqs.size());
  for (std::size_t i = 0; i < model.size(); ++i)
    model[i] = two_pole_response(response.fit, response.freqs[i]);
  return io::format_columns(
      {"response spectrum, lock-in X tone amplitude per gauss", "config_hash " + config_hash,
       "fit_dc_response_V_per_G " + io::format_double(response.fit.dc_response),
       "fit_atomic_pole_Hz " + io::format_double(response.fit.atomic_pole),
       "fit_lockin_pole_Hz " + io::format_double(response.fit.lockin_pole),
       "fit_residual_rms " + io::format_double(response.fit.residual),
       "linearity_deviation " + io::format_double(response.linearity_deviation)},
      {"f_Hz", "response_V_per_G", "fit_V_per_G"}, {response.freqs, response.response, model});
}

std::string format_discrimination(const DiscriminationCurve& curve, const std::string& config_hash) {
  return io::format_columns(
      {"discrimination curve, lock-in tone amplitude", "config_hash " + config_hash,
       "phase_rad " + io::format_double(curve.phase),
       "zero_crossing_G " + io::format_double(curve.zero_crossing),
       "slope_V_per_G " + io::format_double(curve.slope_at_crossing)},
      {"B_G", "X_V", "Y_V"}, {curve.b_grid, curve.x_values, curve.y_values});
}

}  // namespace amor
