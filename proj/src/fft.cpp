#include "amor/fft.hpp"

#include <algorithm>
#include <mutex>

#include <fftw3.h>

#include "amor/error.hpp"

namespace amor {

namespace {
// FFTW planning is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Impl {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;
};

RealFft::RealFft(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n < 2) throw DomainError("FFT length must be at least 2");
  std::lock_guard lock(planner_mutex());
  impl_->in = fftw_alloc_real(n);
  impl_->out = fftw_alloc_complex(n / 2 + 1);
  if (!impl_->in || !impl_->out) throw NumericError("FFTW allocation failed");
  impl_->plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), impl_->in, impl_->out, FFTW_ESTIMATE);
  if (!impl_->plan) throw NumericError("FFTW planning failed");
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  if (impl_->plan) fftw_destroy_plan(impl_->plan);
  fftw_free(impl_->in);
  fftw_free(impl_->out);
}

std::span<const std::complex<double>> RealFft::forward(std::span<const double> input) {
  if (input.size() != n_) throw DomainError("FFT input length mismatch");
  std::copy(input.begin(), input.end(), impl_->in);
  fftw_execute(impl_->plan);
  return {reinterpret_cast<const std::complex<double>*>(impl_->out), n_ / 2 + 1};
}

}  // namespace amor
