#pragma once

#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "renewal_lab/error.hpp"

namespace renewal_lab {

/// Gamma on [0.1, 50].
inline double gamma_fn(double x) {
  if (!(x >= 0.1 && x <= 50.0)) fail(ErrorCode::OutOfDomain, "gamma_fn needs 0.1 <= x <= 50, got " + std::to_string(x));
  return std::tgamma(x);
}

inline constexpr double kQuadratureTolerance = 1e-10;

namespace detail {

// int_0^b u^{beta-1}(1-u)^{-beta} du for b <= 1/2, with u = s^{1/beta}.
inline double beta_head(double beta, double b) {
  if (b <= 0.0) return 0.0;
  const double inv = 1.0 / beta;
  auto f = [&](double s) { return inv * std::pow(1.0 - std::pow(s, inv), -beta); };
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, std::pow(b, beta), 15,
                                                                                 kQuadratureTolerance * 1e-3, &err);
  return v;
}

}  // namespace detail

/// I_beta(t) = int_0^t u^{beta-1} (1-u)^{-beta} du for 0 < beta < 1.
inline double beta_incomplete(double beta, double t) {
  if (!(beta > 0.0 && beta < 1.0)) fail(ErrorCode::BetaOutOfRange, "beta must lie in (0,1)");
  if (!(t >= 0.0 && t <= 1.0)) fail(ErrorCode::BetaOutOfRange, "t must lie in [0,1]");
  if (t <= 0.5) return detail::beta_head(beta, t);
  // Near 1 swap u -> 1-u, which swaps the exponents.
  return detail::beta_head(beta, 0.5) + detail::beta_head(1.0 - beta, 0.5) - detail::beta_head(1.0 - beta, 1.0 - t);
}

/// E[M_beta^k] = k! Gamma(1+beta)^k / Gamma(1+k beta).
inline double ml_moment(double beta, int k) {
  if (!(beta > 0.0 && beta <= 1.0)) fail(ErrorCode::BetaOutOfRange, "beta must lie in (0,1]");
  if (k < 0) fail(ErrorCode::InvalidArgument, "moment order must be nonnegative");
  const double lg = std::lgamma(static_cast<double>(k) + 1.0) + k * std::lgamma(1.0 + beta) - std::lgamma(1.0 + k * beta);
  return std::exp(lg);
}

}  // namespace renewal_lab
