#include "amor/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "amor/error.hpp"
#include "amor/fft.hpp"
#include "amor/io.hpp"
#include "amor/units.hpp"

namespace amor {

namespace {

double wrap_phase(double p) {
  p = std::remainder(p, units::two_pi);
  return p <= -units::pi ? p + units::two_pi : p;
}

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

// Cubic through up to four samples around the bracket [i, i+1].
struct LocalCubic {
  double xs[4];
  double ys[4];
  int n;

  double value(double x) const {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      double term = ys[j];
      for (int m = 0; m < n; ++m) {
        if (m != j) term *= (x - xs[m]) / (xs[j] - xs[m]);
      }
      sum += term;
    }
    return sum;
  }

  double derivative(double x) const {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      double dj = 0.0;
      for (int k = 0; k < n; ++k) {
        if (k == j) continue;
        double term = 1.0 / (xs[j] - xs[k]);
        for (int m = 0; m < n; ++m) {
          if (m != j && m != k) term *= (x - xs[m]) / (xs[j] - xs[m]);
        }
        dj += term;
      }
      sum += ys[j] * dj;
    }
    return sum;
  }
};

}  // namespace

DetectorSeries assemble_detector_output(std::span<const double> signal, double signal_rate,
                                        const NoiseSeries& noise, double detector_gain,
                                        std::string provenance) {
  if (signal.size() != noise.samples.size()) {
    throw DataError("assemble_detector_output: signal has " + std::to_string(signal.size()) +
                    " samples, noise has " + std::to_string(noise.samples.size()));
  }
  if (signal_rate != noise.sample_rate) {
    throw DataError("assemble_detector_output: sample rates differ (" +
                    io::format_double(signal_rate) + " vs " + io::format_double(noise.sample_rate) +
                    " Hz)");
  }
  DetectorSeries out;
  out.sample_rate = signal_rate;
  out.provenance = std::move(provenance);
  out.samples.resize(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    out.samples[i] = detector_gain * (signal[i] + noise.samples[i]);
  }
  return out;
}

Lockin::Lockin(double ref_freq, double sample_rate, double phase, double time_constant, int order)
    : ref_(ref_freq, sample_rate, phase),
      alpha_(-std::expm1(-1.0 / (sample_rate * time_constant))),
      order_(order) {
  if (!(ref_freq < sample_rate / 2.0)) {
    throw DomainError("lock-in reference " + io::format_double(ref_freq) +
                      " Hz is at or above Nyquist (" + io::format_double(sample_rate / 2.0) + " Hz)");
  }
  if (order < 1 || order > 4) throw DomainError("lock-in filter order must be 1..4");
  if (!(time_constant > 0.0)) throw DomainError("lock-in time constant must be positive");
}

void Lockin::push(double v) {
  const double mx = 2.0 * v * ref_.cos();
  const double my = -2.0 * v * ref_.sin();
  ref_.advance();
  if (count_++ == 0) {
    for (int s = 0; s < order_; ++s) {
      x_[s] = mx;
      y_[s] = my;
    }
    return;
  }
  double in_x = mx, in_y = my;
  for (int s = 0; s < order_; ++s) {
    x_[s] += alpha_ * (in_x - x_[s]);
    y_[s] += alpha_ * (in_y - y_[s]);
    in_x = x_[s];
    in_y = y_[s];
  }
}

std::pair<double, double> rotate_lockin(double x, double y, double dp) {
  const double c = std::cos(dp), s = std::sin(dp);
  return {x * c + y * s, -x * s + y * c};
}

LockinOutput lockin_demodulate(const DetectorSeries& series, double ref_freq, double phase,
                               double time_constant, int order, std::size_t decimation) {
  if (decimation == 0) throw DomainError("lock-in decimation must be >= 1");
  Lockin lia(ref_freq, series.sample_rate, phase, time_constant, order);
  LockinOutput out;
  out.sample_rate = series.sample_rate / static_cast<double>(decimation);
  out.ref_freq = ref_freq;
  out.phase = phase;
  out.time_constant = time_constant;
  out.filter_order = order;
  out.x_series.reserve(series.samples.size() / decimation + 1);
  out.y_series.reserve(series.samples.size() / decimation + 1);
  for (std::size_t i = 0; i < series.samples.size(); ++i) {
    lia.push(series.samples[i]);
    if (i % decimation == 0) {
      out.x_series.push_back(lia.x());
      out.y_series.push_back(lia.y());
    }
  }
  return out;
}

std::vector<ZeroCrossing> zero_crossings(const LockinSweep& sweep, double dp) {
  const std::size_t n = sweep.b.size();
  if (sweep.x.size() != n || sweep.y.size() != n) throw DataError("sweep columns differ in length");
  const double c = std::cos(dp), s = std::sin(dp);
  std::vector<double> xp(n);
  for (std::size_t i = 0; i < n; ++i) xp[i] = sweep.x[i] * c + sweep.y[i] * s;

  std::vector<ZeroCrossing> out;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = xp[i], b = xp[i + 1];
    if (!((a <= 0.0 && b > 0.0) || (a >= 0.0 && b < 0.0))) continue;
    LocalCubic cubic{};
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = std::min(n - 1, i + 2);
    cubic.n = static_cast<int>(hi - lo + 1);
    for (int j = 0; j < cubic.n; ++j) {
      cubic.xs[j] = sweep.b[lo + j];
      cubic.ys[j] = xp[lo + j];
    }
    // Bisection on the bracket, the cubic keeps the sign change there.
    double left = sweep.b[i], right = sweep.b[i + 1];
    double fl = cubic.value(left);
    if (fl == 0.0) {
      right = left;
    } else {
      for (int it = 0; it < 80 && right - left > 1e-15 * std::max(1.0, std::abs(left)); ++it) {
        const double mid = 0.5 * (left + right);
        const double fm = cubic.value(mid);
        if ((fm < 0.0) == (fl < 0.0)) {
          left = mid;
          fl = fm;
        } else {
          right = mid;
        }
      }
    }
    const double root = 0.5 * (left + right);
    out.push_back({root, cubic.derivative(root), i});
  }
  return out;
}

namespace {

double steepest_rise(const LockinSweep& sweep, double dp) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& zc : zero_crossings(sweep, dp)) best = std::max(best, zc.slope);
  return best;
}

}  // namespace

double auto_phase(const LockinSweep& sweep) {
  constexpr double kStep = 1e-3;
  const int steps = static_cast<int>(std::ceil(units::two_pi / kStep));
  double best_dp = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < steps; ++k) {
    const double dp = -units::pi + kStep * k;
    const double score = steepest_rise(sweep, dp);
    if (score > best) {
      best = score;
      best_dp = dp;
    }
  }
  if (!std::isfinite(best) || best <= 0.0) {
    throw DataError("auto_phase: the sweep has no zero crossing at any phase");
  }
  // Golden-section refinement inside the winning grid cell.
  double a = best_dp - kStep, b = best_dp + kStep;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = steepest_rise(sweep, c), fd = steepest_rise(sweep, d);
  for (int it = 0; it < 40; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = steepest_rise(sweep, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = steepest_rise(sweep, d);
    }
  }
  double refined = 0.5 * (a + b);
  if (steepest_rise(sweep, refined) < best) refined = best_dp;
  return wrap_phase(sweep.phase + refined);
}

LockinSweep rotate_sweep(const LockinSweep& sweep, double phase) {
  LockinSweep out;
  out.b = sweep.b;
  out.phase = phase;
  const double dp = phase - sweep.phase;
  out.x.resize(sweep.b.size());
  out.y.resize(sweep.b.size());
  for (std::size_t i = 0; i < sweep.b.size(); ++i) {
    std::tie(out.x[i], out.y[i]) = rotate_lockin(sweep.x[i], sweep.y[i], dp);
  }
  return out;
}

std::size_t welch_segments(std::size_t length, std::size_t segment_length) {
  const std::size_t hop = segment_length / 2;
  if (length < segment_length || hop == 0) return 0;
  return (length - segment_length) / hop + 1;
}

Spectrum psd_estimate(std::span<const double> series, double sample_rate,
                      double segment_bandwidth, std::size_t averages, Window window) {
  if (!(sample_rate > 0.0) || !(segment_bandwidth > 0.0)) {
    throw DomainError("psd_estimate: sample rate and segment bandwidth must be positive");
  }
  const auto n = static_cast<std::size_t>(std::llround(sample_rate / segment_bandwidth));
  if (n < 4) throw DomainError("psd_estimate: segment bandwidth too wide for the sample rate");
  const std::size_t hop = n / 2;
  const std::size_t available = welch_segments(series.size(), n);
  const std::size_t used = averages == 0 ? available : averages;
  const std::size_t required = n + (used == 0 ? 0 : (used - 1) * hop);
  if (used == 0 || available < used) {
    throw DataError("psd_estimate: " + std::to_string(series.size()) + " samples given, " +
                    std::to_string(required) + " required for " + std::to_string(std::max<std::size_t>(used, 1)) +
                    " averages of " + std::to_string(n) + "-sample segments");
  }

  std::vector<double> w(n, 1.0);
  if (window == Window::hann) {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 * (1.0 - std::cos(units::two_pi * static_cast<double>(i) / static_cast<double>(n)));
    }
  }
  double sum_w = 0.0, sum_w2 = 0.0;
  for (double v : w) {
    sum_w += v;
    sum_w2 += v * v;
  }

  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(series.size());

  RealFft fft(n);
  const std::size_t bins = n / 2 + 1;
  std::vector<double> acc(bins, 0.0);
  std::vector<double> seg(n);
  for (std::size_t s = 0; s < used; ++s) {
    const std::size_t off = s * hop;
    for (std::size_t i = 0; i < n; ++i) seg[i] = (series[off + i] - mean) * w[i];
    const auto spec = fft.forward(seg);
    for (std::size_t k = 0; k < bins; ++k) acc[k] += std::norm(spec[k]);
  }

  Spectrum out;
  out.kind = SpectrumKind::psd;
  out.rbw = sample_rate / static_cast<double>(n);
  out.averages = used;
  out.enbw = sample_rate * sum_w2 / (sum_w * sum_w);
  out.freqs.resize(bins);
  out.values.resize(bins);
  const double scale = 2.0 / (sample_rate * sum_w2 * static_cast<double>(used));
  for (std::size_t k = 0; k < bins; ++k) {
    out.freqs[k] = out.rbw * static_cast<double>(k);
    const bool unpaired = k == 0 || (n % 2 == 0 && k == n / 2);
    out.values[k] = acc[k] * scale * (unpaired ? 0.5 : 1.0);
  }
  return out;
}

Spectrum to_asd(const Spectrum& psd) {
  if (psd.kind != SpectrumKind::psd) throw DomainError("to_asd expects a linear PSD");
  Spectrum out = psd;
  out.kind = SpectrumKind::asd;
  for (auto& v : out.values) v = std::sqrt(v);
  return out;
}

Spectrum sa_trace(std::span<const double> series, double sample_rate, double rbw, double vbw,
                  double center, double span) {
  if (!(center + span / 2.0 < sample_rate / 2.0)) {
    throw DomainError("sa_trace: center + span/2 must stay below Nyquist");
  }
  if (!(vbw > 0.0) || !(rbw >= vbw)) throw DomainError("sa_trace: need rbw >= vbw > 0");
  const auto averages = static_cast<std::size_t>(std::max(1.0, std::round(rbw / vbw)));
  const Spectrum psd = psd_estimate(series, sample_rate, rbw, averages, Window::hann);

  Spectrum out;
  out.kind = SpectrumKind::psd_db;
  out.rbw = psd.rbw;
  out.vbw = vbw;
  out.averages = psd.averages;
  out.enbw = psd.enbw;
  out.reference = "1 V^2/Hz";
  const double lo = center - span / 2.0, hi = center + span / 2.0;
  for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
    if (psd.freqs[k] < lo - 1e-9 || psd.freqs[k] > hi + 1e-9) continue;
    out.freqs.push_back(psd.freqs[k]);
    out.values.push_back(10.0 * std::log10(std::max(psd.values[k], 1e-300)));
  }
  return out;
}

FloorEstimate noise_floor_estimate(const Spectrum& spec, double carrier, double exclusion) {
  std::vector<double> kept;
  for (std::size_t k = 0; k < spec.freqs.size(); ++k) {
    if (std::abs(spec.freqs[k] - carrier) > exclusion) kept.push_back(spec.values[k]);
  }
  if (kept.size() < 10) {
    throw DataError("noise_floor_estimate: only " + std::to_string(kept.size()) +
                    " bins outside the carrier exclusion, need 10");
  }
  FloorEstimate est;
  est.bins = kept.size();
  est.floor = median_of(kept);
  std::vector<double> dev(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) dev[i] = std::abs(kept[i] - est.floor);
  est.spread = 1.4826 * median_of(std::move(dev));
  est.uncertainty = 1.2533 * est.spread / std::sqrt(static_cast<double>(est.bins));
  return est;
}

double band_power(const Spectrum& psd, double freq, double half_width) {
  if (psd.kind != SpectrumKind::psd) throw DomainError("band_power expects a linear PSD");
  double sum = 0.0;
  for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
    if (std::abs(psd.freqs[k] - freq) <= half_width) sum += psd.values[k];
  }
  return sum * psd.rbw;
}

std::string spectrum_kind_name(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::psd: return "PSD";
    case SpectrumKind::asd: return "ASD";
    case SpectrumKind::psd_db: return "PSD_dB";
  }
  return "?";
}

std::string format_spectrum(const Spectrum& spec, const std::vector<std::string>& extra_header) {
  std::string unit;
  switch (spec.kind) {
    case SpectrumKind::psd: unit = spec.unit + "^2/Hz"; break;
    case SpectrumKind::asd: unit = spec.unit + "/sqrt(Hz)"; break;
    case SpectrumKind::psd_db: unit = "dB re " + spec.reference; break;
  }
  std::vector<std::string> header = {
      "kind " + spectrum_kind_name(spec.kind),
      "unit " + unit,
      "rbw_hz " + io::format_double(spec.rbw),
      "vbw_hz " + io::format_double(spec.vbw),
      "averages " + std::to_string(spec.averages),
      "enbw_hz " + io::format_double(spec.enbw),
      "reference " + (spec.reference.empty() ? std::string("none") : spec.reference),
  };
  header.insert(header.end(), extra_header.begin(), extra_header.end());
  return io::format_columns(header, {"freq_hz", "value"}, {spec.freqs, spec.values});
}

}  // namespace amor
