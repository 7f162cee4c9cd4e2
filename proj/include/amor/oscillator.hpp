#pragma once

#include <cmath>
#include <cstdint>

#include "amor/units.hpp"

namespace amor {

/// Phase-continuous cos/sin source at a fixed frequency, sampled at
/// t_k = k / sample_rate. The phasor is advanced by complex rotation and
/// re-anchored to the exact value every 1024 samples, so rounding never
/// accumulates across long records.
class Oscillator {
 public:
  Oscillator(double freq_hz, double sample_rate, double phase = 0.0)
      : cycles_per_sample_(freq_hz / sample_rate), phase_(phase) {
    const double step = units::two_pi * cycles_per_sample_;
    step_c_ = std::cos(step);
    step_s_ = std::sin(step);
    anchor();
  }

  double cos() const { return c_; }
  double sin() const { return s_; }
  std::uint64_t index() const { return k_; }

  void advance() {
    ++k_;
    if ((k_ & 1023u) == 0) {
      anchor();
      return;
    }
    const double c = c_ * step_c_ - s_ * step_s_;
    s_ = s_ * step_c_ + c_ * step_s_;
    c_ = c;
  }

 private:
  void anchor() {
    // Reduce the cycle count before scaling by 2 pi to keep the argument small.
    const double cycles = static_cast<double>(k_) * cycles_per_sample_;
    const double frac = cycles - std::floor(cycles);
    const double arg = units::two_pi * frac + phase_;
    c_ = std::cos(arg);
    s_ = std::sin(arg);
  }

  double cycles_per_sample_;
  double phase_;
  double step_c_ = 1.0, step_s_ = 0.0;
  double c_ = 1.0, s_ = 0.0;
  std::uint64_t k_ = 0;
};

}  // namespace amor
