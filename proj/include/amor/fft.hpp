#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace amor {

/// Real-to-complex forward DFT of a fixed length (FFTW, estimate-mode plan so
/// results do not depend on planner timing).
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }

  /// Returns the n/2 + 1 non-negative-frequency bins of sum_k x_k e^{-2 pi i jk/n}.
  std::span<const std::complex<double>> forward(std::span<const double> input);

 private:
  struct Impl;
  std::size_t n_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace amor
