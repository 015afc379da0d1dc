#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "renewal_lab/error.hpp"
#include "renewal_lab/fft.hpp"
#include "renewal_lab/numeric.hpp"

namespace renewal_lab {

/// Coefficients c_0..c_N of sum c_n z^n.
class CoeffSeries {
 public:
  CoeffSeries() = default;
  explicit CoeffSeries(std::vector<double> c) : c_(std::move(c)) {
    for (double x : c_) {
      if (!std::isfinite(x)) fail(ErrorCode::InvalidArgument, "series coefficients must be finite");
    }
  }
  CoeffSeries(std::initializer_list<double> c) : CoeffSeries(std::vector<double>(c)) {}

  std::size_t size() const { return c_.size(); }
  double operator[](std::size_t n) const { return n < c_.size() ? c_[n] : 0.0; }
  std::span<const double> coeffs() const { return c_; }
  const std::vector<double>& vec() const { return c_; }

  /// Value at z = 1 of the finite polynomial.
  double at_one() const { return compensated_total(c_); }

  friend bool operator==(const CoeffSeries&, const CoeffSeries&) = default;

 private:
  std::vector<double> c_;
};

/// Products up to this output length are summed directly in long double.
inline constexpr std::size_t kDirectProductLimit = 8192;

/// c_n = sum_{k<=n} a_k b_{n-k}, n = 0..N.
inline CoeffSeries cauchy_product(const CoeffSeries& a, const CoeffSeries& b, std::size_t N) {
  if (a.size() == 0 || b.size() == 0) return CoeffSeries(std::vector<double>(N + 1, 0.0));
  if (N > a.size() + b.size() - 2) fail(ErrorCode::InvalidArgument, "product length exceeds operand degree");
  if (N + 1 <= kDirectProductLimit) {
    std::vector<double> c(N + 1, 0.0);
    for (std::size_t n = 0; n <= N; ++n) {
      long double s = 0.0L;
      const std::size_t lo = n >= b.size() ? n - b.size() + 1 : 0;
      const std::size_t hi = std::min(n, a.size() - 1);
      for (std::size_t k = lo; k <= hi; ++k) s += static_cast<long double>(a[k]) * b[n - k];
      c[n] = static_cast<double>(s);
    }
    return CoeffSeries(std::move(c));
  }
  const std::size_t la = std::min(a.size(), N + 1), lb = std::min(b.size(), N + 1);
  return CoeffSeries(fft::convolve(a.coeffs().first(la), b.coeffs().first(lb), N + 1));
}

/// (1-z)^{-1} a(z): running sums.
inline CoeffSeries inv_one_minus_z(const CoeffSeries& a) {
  std::vector<double> c(a.size());
  CompensatedSum s;
  for (std::size_t n = 0; n < a.size(); ++n) {
    s.add(a[n]);
    c[n] = s.value();
  }
  return CoeffSeries(std::move(c));
}

/// (1-z)^{-1} a(z) for a series with a(1) = 0, evaluated as minus the tail
/// sums. `tail_mass` is the mass of coefficients beyond the stored ones, so
/// the full series satisfies sum a + tail_mass = 0.
inline CoeffSeries inv_one_minus_z_vanishing(const CoeffSeries& a, double tail_mass = 0.0) {
  std::vector<double> c(a.size());
  CompensatedSum s;
  s.add(tail_mass);
  for (std::size_t n = a.size(); n-- > 0;) {
    c[n] = -s.value();
    s.add(a[n]);
  }
  return CoeffSeries(std::move(c));
}

/// d/dz: c_n = (n+1) a_{n+1}.
inline CoeffSeries differentiate(const CoeffSeries& a) {
  if (a.size() <= 1) return CoeffSeries(std::vector<double>{0.0});
  std::vector<double> c(a.size() - 1);
  for (std::size_t n = 0; n + 1 < a.size(); ++n) c[n] = static_cast<double>(n + 1) * a[n + 1];
  return CoeffSeries(std::move(c));
}

struct IndexWindow {
  std::size_t lo = 0;
  std::size_t hi = 0;  // inclusive
};

struct DecayFit {
  double slope = 0.0;         // d log|c_n| / d log n
  double log_constant = 0.0;  // intercept
  double residual_rms = 0.0;
  double curvature = 0.0;     // second derivative of log|c_n| in log n
  bool curved = false;        // |curvature| above kCurvatureFlag
  std::size_t points = 0;
};

inline constexpr double kCurvatureFlag = 1e-3;

/// Least-squares slope of log|c_n| against log n over the window.
inline DecayFit decay_exponent_fit(const CoeffSeries& c, IndexWindow w) {
  if (w.lo == 0 || w.hi < w.lo || w.hi >= c.size()) fail(ErrorCode::InvalidArgument, "fit window must lie in [1, N]");
  std::vector<double> x, y;
  x.reserve(w.hi - w.lo + 1);
  y.reserve(w.hi - w.lo + 1);
  for (std::size_t n = w.lo; n <= w.hi; ++n) {
    if (c[n] == 0.0) fail(ErrorCode::ZeroCoefficientInWindow, "zero coefficient at n = " + std::to_string(n));
    x.push_back(std::log(static_cast<double>(n)));
    y.push_back(std::log(std::fabs(c[n])));
  }
  DecayFit out;
  out.points = x.size();
  if (x.size() == 1) return out;
  const LinearFit lf = least_squares(x, y);
  out.slope = lf.slope;
  out.log_constant = lf.intercept;
  out.residual_rms = lf.residual_rms;
  out.curvature = 2.0 * quadratic_coefficient(x, y);
  out.curved = std::fabs(out.curvature) > kCurvatureFlag;
  return out;
}

enum class DecayRegime { Power, PowerLog, SuperPolynomial };

inline const char* to_string(DecayRegime r) {
  switch (r) {
    case DecayRegime::Power: return "power";
    case DecayRegime::PowerLog: return "power-log";
    case DecayRegime::SuperPolynomial: return "super-polynomial";
  }
  return "?";
}

inline constexpr double kRegimeTolerance = 0.15;

struct RegimeReport {
  double beta = 0.0;
  DecayRegime predicted = DecayRegime::Power;
  DecayRegime observed = DecayRegime::Power;
  double predicted_exponent = 0.0;  // decay exponent, c_n ~ n^{-exponent}
  double fitted_exponent = 0.0;     // for the power-log regime, fitted on |C_n| / log n
  double fitted_log_constant = 0.0;
  IndexWindow window;
  bool within_tolerance = false;
  bool bound_respected = false;  // fitted exponent >= predicted - tolerance
  CoeffSeries c;
};

/// Coefficients of C(z) = (1-z)^{-1} A(z) B(z) for A(1) = B(1) = 0, formed as
/// (1-z) * [A/(1-z)] * [B/(1-z)] so the product runs on tail sums and the only
/// cancellation left is one first difference.
inline CoeffSeries vanishing_product_over_one_minus_z(const CoeffSeries& a, const CoeffSeries& b, double tail_a = 0.0,
                                                      double tail_b = 0.0) {
  const std::size_t N = std::min(a.size(), b.size()) - 1;
  const CoeffSeries at = inv_one_minus_z_vanishing(a, tail_a);
  const CoeffSeries bt = inv_one_minus_z_vanishing(b, tail_b);
  const CoeffSeries prod = cauchy_product(at, bt, N);
  std::vector<double> c(N + 1);
  c[0] = prod[0];
  for (std::size_t n = 1; n <= N; ++n) c[n] = prod[n] - prod[n - 1];
  return CoeffSeries(std::move(c));
}

/// Fit the decay of C = (1-z)^{-1} A B over the top decade and classify it
/// against n^{-2 beta} (beta < 1), n^{-2} log n (beta = 1), n^{-(beta+1)}
/// (beta > 1). tail_a/tail_b carry the mass beyond the stored coefficients.
inline RegimeReport abstr_regime_check(const CoeffSeries& a, const CoeffSeries& b, double beta, double tail_a = 0.0,
                                       double tail_b = 0.0) {
  if (!(beta > 0.0)) fail(ErrorCode::NonPositiveBeta, "beta must be positive");
  if (std::fabs(a.at_one() + tail_a) > 1e-10 || std::fabs(b.at_one() + tail_b) > 1e-10) {
    fail(ErrorCode::HypothesisViolated, "A(1) and B(1) must vanish");
  }
  RegimeReport rep;
  rep.beta = beta;
  if (beta < 1.0) {
    rep.predicted_exponent = 2.0 * beta;
  } else if (beta == 1.0) {
    rep.predicted_exponent = 2.0;
    rep.predicted = DecayRegime::PowerLog;
  } else {
    rep.predicted_exponent = beta + 1.0;
  }
  rep.c = vanishing_product_over_one_minus_z(a, b, tail_a, tail_b);
  const std::size_t N = rep.c.size() - 1;
  rep.window = {std::max<std::size_t>(2, N / 10), N};

  double peak = 0.0, window_peak = 0.0;
  for (std::size_t n = 0; n <= N; ++n) peak = std::max(peak, std::fabs(rep.c[n]));
  for (std::size_t n = rep.window.lo; n <= N; ++n) window_peak = std::max(window_peak, std::fabs(rep.c[n]));
  if (N < 20 || window_peak <= 1e-14 * peak) {
    rep.observed = DecayRegime::SuperPolynomial;
    rep.fitted_exponent = std::numeric_limits<double>::infinity();
    rep.within_tolerance = false;
    rep.bound_respected = true;
    return rep;
  }
  std::vector<double> scaled(N + 1, 0.0);
  for (std::size_t n = 2; n <= N; ++n) {
    scaled[n] = rep.predicted == DecayRegime::PowerLog ? rep.c[n] / std::log(static_cast<double>(n)) : rep.c[n];
  }
  const DecayFit fit = decay_exponent_fit(CoeffSeries(std::move(scaled)), rep.window);
  rep.fitted_exponent = -fit.slope;
  rep.fitted_log_constant = fit.log_constant;
  rep.observed = rep.predicted;
  rep.within_tolerance = std::fabs(rep.fitted_exponent - rep.predicted_exponent) <= kRegimeTolerance;
  rep.bound_respected = rep.fitted_exponent >= rep.predicted_exponent - kRegimeTolerance;
  return rep;
}

struct RatioRange {
  double min = 0.0;
  double max = 0.0;
};

/// min/max of |c_n| n^2 / log n over the window.
inline RatioRange log_corrected_ratio_range(const CoeffSeries& c, IndexWindow w) {
  if (w.lo < 2 || w.hi < w.lo || w.hi >= c.size()) fail(ErrorCode::InvalidArgument, "window must lie in [2, N]");
  RatioRange r{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t n = w.lo; n <= w.hi; ++n) {
    const double x = static_cast<double>(n);
    const double v = std::fabs(c[n]) * x * x / std::log(x);
    r.min = std::min(r.min, v);
    r.max = std::max(r.max, v);
  }
  return r;
}

/// a_0 = -sum_{n>=1} n^{-(beta+1)}, a_n = n^{-(beta+1)}: the canonical input
/// with A(1) = 0 and coefficients of exact order n^{-(beta+1)}. Returns the
/// series and the mass beyond index N.
struct VanishingPowerSeries {
  CoeffSeries series;
  double tail_mass = 0.0;
};

inline VanishingPowerSeries vanishing_power_series(double beta, std::size_t N) {
  const double s = beta + 1.0;
  std::vector<double> c(N + 1);
  CompensatedSum head;
  for (std::size_t n = N; n >= 1; --n) {
    c[n] = std::pow(static_cast<double>(n), -s);
    head.add(c[n]);
  }
  const double tail = hurwitz_tail(s, N);
  CompensatedSum z;
  z.add(head.value());
  z.add(tail);
  c[0] = -z.value();
  return {CoeffSeries(std::move(c)), tail};
}

inline void write_series_csv(std::ostream& os, const CoeffSeries& c) {
  os << "n,c_n\n";
  char buf[64];
  for (std::size_t n = 0; n < c.size(); ++n) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", n, c[n]);
    os << buf;
  }
}

}  // namespace renewal_lab
