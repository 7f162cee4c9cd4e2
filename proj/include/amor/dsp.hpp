#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "amor/noise.hpp"
#include "amor/oscillator.hpp"

namespace amor {

struct DetectorSeries {
  double sample_rate = 0.0;
  std::vector<double> samples;        // V
  std::string provenance;             // config hash + seed
};

/// v = gain * (phi + n), sample by sample.
DetectorSeries assemble_detector_output(std::span<const double> signal, double signal_rate,
                                        const NoiseSeries& noise, double detector_gain,
                                        std::string provenance = {});

/// Lock-in outputs carry tone amplitude (not RMS):
/// A cos(2 pi f t + phi0) demodulates to X = A cos(phi0 - phase), Y = A sin(phi0 - phase).
struct LockinOutput {
  std::vector<double> x_series;
  std::vector<double> y_series;
  double sample_rate = 0.0;           // output rate after decimation
  double ref_freq = 0.0;
  double phase = 0.0;
  double time_constant = 0.0;
  int filter_order = 1;
};

/// Streaming dual-phase lock-in: mixer followed by `order` identical
/// single-pole low-pass stages. Filter stages start at the first mixed sample.
class Lockin {
 public:
  Lockin(double ref_freq, double sample_rate, double phase, double time_constant, int order);

  void push(double v);
  double x() const { return x_[order_ - 1]; }
  double y() const { return y_[order_ - 1]; }
  std::size_t samples_seen() const { return count_; }

 private:
  Oscillator ref_;
  double alpha_;
  int order_;
  double x_[4] = {};
  double y_[4] = {};
  std::size_t count_ = 0;
};

/// Rotates a lock-in reading from phase p to phase p + dp.
std::pair<double, double> rotate_lockin(double x, double y, double dp);

LockinOutput lockin_demodulate(const DetectorSeries& series, double ref_freq, double phase,
                               double time_constant, int order, std::size_t decimation = 1);

/// Lock-in output versus bias field, all points read at `phase`.
struct LockinSweep {
  std::vector<double> b;              // G
  std::vector<double> x;
  std::vector<double> y;
  double phase = 0.0;
};

struct ZeroCrossing {
  double b = 0.0;                     // interpolated location
  double slope = 0.0;                 // dX/dB at the crossing
  std::size_t index = 0;              // left bracketing index
};

/// All zero crossings of X rotated by dp, with slopes from local cubic
/// interpolation of X and Y.
std::vector<ZeroCrossing> zero_crossings(const LockinSweep& sweep, double dp);

/// Lock-in phase that maximizes the (positive) slope dX/dB at the steepest
/// zero crossing. Resolution better than 1 mrad; result in (-pi, pi].
double auto_phase(const LockinSweep& sweep);

/// Sweep re-expressed at another absolute phase.
LockinSweep rotate_sweep(const LockinSweep& sweep, double phase);

enum class Window { hann, rectangular };
enum class SpectrumKind { psd, asd, psd_db };

struct Spectrum {
  std::vector<double> freqs;          // Hz
  std::vector<double> values;
  SpectrumKind kind = SpectrumKind::psd;
  std::string unit = "V";             // unit of the underlying series
  double rbw = 0.0;                   // bin spacing, Hz
  double vbw = 0.0;
  std::size_t averages = 0;
  double enbw = 0.0;                  // equivalent noise bandwidth, Hz
  std::string reference = {};         // for dB spectra
};

/// Number of 50%-overlapped segments of length n that fit in `length` samples.
std::size_t welch_segments(std::size_t length, std::size_t segment_length);

/// Averaged windowed periodogram (Welch, 50 % overlap), one-sided, mean
/// removed, normalized so sum(PSD) * df equals the mean square. averages = 0
/// uses every segment that fits.
Spectrum psd_estimate(std::span<const double> series, double sample_rate,
                      double segment_bandwidth, std::size_t averages, Window window = Window::hann);

Spectrum to_asd(const Spectrum& psd);

/// Swept-analyzer emulation: PSD with bin spacing rbw, video-averaged over
/// round(rbw / vbw) segments, cropped to center +/- span/2, in dB re 1 unit^2/Hz.
Spectrum sa_trace(std::span<const double> series, double sample_rate, double rbw, double vbw,
                  double center, double span);

struct FloorEstimate {
  double floor = 0.0;
  double uncertainty = 0.0;           // standard error of the median
  double spread = 0.0;                // 1.4826 * MAD
  std::size_t bins = 0;
};

/// Median of the bins farther than `exclusion` from `carrier`.
FloorEstimate noise_floor_estimate(const Spectrum& spec, double carrier, double exclusion);

/// Integrated power within +/- half_width of freq (linear PSD input).
double band_power(const Spectrum& psd, double freq, double half_width);

std::string spectrum_kind_name(SpectrumKind kind);

/// Two-column text (Hz, value) with metadata header lines.
std::string format_spectrum(const Spectrum& spec, const std::vector<std::string>& extra_header);

}  // namespace amor
