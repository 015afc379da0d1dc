#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace renewal_lab::fft {

/// FFTW planning is not thread-safe; execution on distinct plans is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t v = 1;
  while (v < n) v <<= 1;
  return v;
}

/// Real forward/inverse transform pair of a fixed size with owned, aligned
/// buffers. Plans use FFTW_ESTIMATE so the same size always executes the same
/// operation sequence.
class RealTransform {
 public:
  explicit RealTransform(std::size_t n) : n_(n) {
    real_ = fftw_alloc_real(n);
    spec_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, spec_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec_, real_, FFTW_ESTIMATE);
  }
  RealTransform(const RealTransform&) = delete;
  RealTransform& operator=(const RealTransform&) = delete;
  ~RealTransform() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(forward_);
      fftw_destroy_plan(inverse_);
    }
    fftw_free(real_);
    fftw_free(spec_);
  }

  std::size_t size() const { return n_; }
  std::size_t spectrum_size() const { return n_ / 2 + 1; }
  double* real() { return real_; }
  fftw_complex* spectrum() { return spec_; }

  /// real -> spectrum
  void forward() { fftw_execute(forward_); }
  /// spectrum -> real, unnormalized (scaled by n); destroys the spectrum
  void inverse() { fftw_execute(inverse_); }

  /// Copy x into the real buffer, zero-padding to size().
  void load(std::span<const double> x) {
    const std::size_t m = std::min(x.size(), n_);
    std::copy_n(x.begin(), m, real_);
    std::fill(real_ + m, real_ + n_, 0.0);
  }

 private:
  std::size_t n_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

/// Linear convolution of a and b, first `out_len` coefficients.
inline std::vector<double> convolve(std::span<const double> a, std::span<const double> b, std::size_t out_len) {
  std::vector<double> out(out_len, 0.0);
  if (a.empty() || b.empty() || out_len == 0) return out;
  const std::size_t full = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(full);
  RealTransform ta(n), tb(n);
  ta.load(a);
  tb.load(b);
  ta.forward();
  tb.forward();
  fftw_complex* x = ta.spectrum();
  const fftw_complex* y = tb.spectrum();
  for (std::size_t k = 0; k < ta.spectrum_size(); ++k) {
    const double re = x[k][0] * y[k][0] - x[k][1] * y[k][1];
    const double im = x[k][0] * y[k][1] + x[k][1] * y[k][0];
    x[k][0] = re;
    x[k][1] = im;
  }
  ta.inverse();
  const double scale = 1.0 / static_cast<double>(n);
  const std::size_t m = std::min(out_len, full);
  for (std::size_t i = 0; i < m; ++i) out[i] = ta.real()[i] * scale;
  return out;
}

}  // namespace renewal_lab::fft
