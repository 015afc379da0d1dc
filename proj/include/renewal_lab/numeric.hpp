#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "renewal_lab/error.hpp"

namespace renewal_lab {

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline double compensated_total(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

/// Sum_{j > m} j^{-s} for s > 1. Explicit terms up to a cutoff, then
/// Euler-Maclaurin with four Bernoulli corrections.
inline double hurwitz_tail(double s, std::uint64_t m) {
  if (!(s > 1.0)) fail(ErrorCode::InvalidArgument, "hurwitz_tail needs s > 1");
  constexpr std::uint64_t kCutoff = 64;
  CompensatedSum acc;
  std::uint64_t first = m + 1;
  // Smallest terms first.
  if (first < kCutoff) {
    for (std::uint64_t j = kCutoff - 1; j >= first; --j) {
      acc.add(std::pow(static_cast<double>(j), -s));
      if (j == first) break;
    }
    first = kCutoff;
  }
  const double M = static_cast<double>(first);
  const double base = std::pow(M, -s);
  double rising = s;  // (s)_1
  double em = M * base / (s - 1.0) + 0.5 * base;
  // B2/2!, -B4/4!, B6/6!, -B8/8! applied to derivatives of x^{-s}.
  constexpr double kCoef[4] = {1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0,
                               -1.0 / 1209600.0};
  double power = base / M;  // M^{-s-1}
  for (int k = 0; k < 4; ++k) {
    em += kCoef[k] * rising * power;
    rising *= (s + 2.0 * k + 1.0) * (s + 2.0 * k + 2.0);
    power /= M * M;
  }
  acc.add(em);
  return acc.value();
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope * x.
inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) fail(ErrorCode::InvalidArgument, "least_squares needs >= 2 paired points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit fit;
  fit.points = n;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

/// Quadratic coefficient of the least-squares parabola through (x, y).
inline double quadratic_coefficient(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 3) return 0.0;
  double mx = 0.0;
  for (double v : x) mx += v;
  mx /= static_cast<double>(n);
  // Normal equations in centred coordinates.
  double s2 = 0, s3 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - mx;
    s2 += d * d;
    s3 += d * d * d;
    s4 += d * d * d * d;
    t0 += y[i];
    t1 += d * y[i];
    t2 += d * d * y[i];
  }
  const double s0 = static_cast<double>(n);
  // | s0 0  s2 | |a|   |t0|
  // | 0  s2 s3 | |b| = |t1|
  // | s2 s3 s4 | |c|   |t2|
  const double det = s0 * (s2 * s4 - s3 * s3) + s2 * (0.0 - s2 * s2);
  if (det == 0.0) return 0.0;
  const double det_c = s0 * (s2 * t2 - s3 * t1) + s2 * (0.0 - s2 * t0);
  return det_c / det;
}

/// Log-spaced integer checkpoints {2^k} within [lo, hi].
inline std::vector<std::size_t> dyadic_checkpoints(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> out;
  for (std::size_t v = 1; v <= hi && v != 0; v <<= 1) {
    if (v >= lo) out.push_back(v);
  }
  return out;
}

}  // namespace renewal_lab
