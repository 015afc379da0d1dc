#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "renewal_lab/chain_mc.hpp"
#include "renewal_lab/error.hpp"
#include "renewal_lab/laws.hpp"
#include "renewal_lab/numeric.hpp"
#include "renewal_lab/special.hpp"

namespace renewal_lab {

/// 1 - phi(theta), phi(theta) = sum_n a_n e^{i n theta}. Mass beyond the table
/// enters through its real part only; its oscillating part is O(n_max^{-beta-1}/theta).
inline std::complex<double> one_minus_characteristic(const ReturnLaw& law, double theta) {
  const auto mass = law.masses();
  CompensatedSum re, im;
  for (std::size_t n = 1; n < mass.size(); ++n) {
    if (mass[n] == 0.0) continue;
    const double x = theta * static_cast<double>(n);
    const double half = std::sin(0.5 * x);
    re.add(2.0 * mass[n] * half * half);
    im.add(-mass[n] * std::sin(x));
  }
  re.add(law.truncation_remainder());
  return {re.value(), im.value()};
}

inline std::vector<double> default_theta_grid() {
  std::vector<double> g;
  for (int k = 0; k < 8; ++k) g.push_back(0.1 * std::ldexp(1.0, -k));
  return g;
}

inline constexpr double kCBetaSlopeTolerance = 0.03;
inline constexpr double kCBetaResidualTolerance = 0.01;

struct CBetaEstimate {
  double modulus = 0.0;  // |C_beta|
  double slope = 0.0;    // d log|1 - phi| / d log theta
  double beta = 0.0;
  double residual_rms = 0.0;
  bool accepted = false;
  std::vector<double> theta;
  std::vector<double> abs_one_minus_phi;
};

/// Fit log|1 - phi(theta)| = log|C_beta| + beta log theta on the grid.
/// beta defaults to the law's tail index.
inline CBetaEstimate estimate_c_beta(const ReturnLaw& law, const std::vector<double>& theta_grid = default_theta_grid(),
                                     std::optional<double> beta = std::nullopt) {
  CBetaEstimate est;
  est.beta = beta ? *beta : law.beta();
  if (theta_grid.size() < 2) fail(ErrorCode::InvalidArgument, "theta grid needs at least two points");
  std::vector<double> x, y;
  for (double th : theta_grid) {
    if (!(th > 0.0 && th < M_PI)) fail(ErrorCode::InvalidArgument, "theta must lie in (0, pi)");
    const double v = std::abs(one_minus_characteristic(law, th));
    est.theta.push_back(th);
    est.abs_one_minus_phi.push_back(v);
    x.push_back(std::log(th));
    y.push_back(std::log(v));
  }
  const LinearFit fit = least_squares(x, y);
  // Fix the slope at beta for the modulus; the free slope is the diagnostic.
  CompensatedSum c;
  for (std::size_t i = 0; i < x.size(); ++i) c.add(y[i] - est.beta * x[i]);
  est.modulus = std::exp(c.value() / static_cast<double>(x.size()));
  est.slope = fit.slope;
  est.residual_rms = fit.residual_rms;
  est.accepted = std::fabs(fit.slope - est.beta) <= kCBetaSlopeTolerance && fit.residual_rms <= kCBetaResidualTolerance;
  return est;
}

/// sup_x |F_a(x) - F_b(x)| of two empirical laws.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::InvalidArgument, "empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

inline constexpr double kKsTolerance = 0.02;

struct StableScalingReport {
  double beta = 0.0;
  std::uint64_t m1 = 0, m2 = 0;
  std::uint64_t samples = 0;
  double ks = 0.0;
  bool converged = false;
};

inline constexpr std::uint64_t kStableTagFirst = 4;
inline constexpr std::uint64_t kStableTagSecond = 5;

/// KS distance between m^{-1/beta} tau_m at m1 and m2.
inline StableScalingReport stable_scaling_check(const ReturnLaw& law, std::uint64_t m1, std::uint64_t m2,
                                                const SimConfig& cfg, std::optional<double> beta = std::nullopt) {
  StableScalingReport rep;
  rep.beta = beta ? *beta : law.beta();
  if (!(rep.beta > 0.0 && rep.beta < 1.0)) fail(ErrorCode::BetaOutOfRange, "beta must lie in (0,1)");
  if (m1 < 1 || m2 < 4 * m1) fail(ErrorCode::InvalidArgument, "need m1 >= 1 and m2 >= 4 m1");
  rep.m1 = m1;
  rep.m2 = m2;
  rep.samples = cfg.samples;
  auto scaled = [&](std::uint64_t m, std::uint64_t tag) {
    const auto raw = sample_hitting_sums(law, m, cfg, tag);
    const double s = std::pow(static_cast<double>(m), -1.0 / rep.beta);
    std::vector<double> v(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) v[i] = static_cast<double>(raw[i]) * s;
    return v;
  };
  rep.ks = ks_distance(scaled(m1, kStableTagFirst), scaled(m2, kStableTagSecond));
  rep.converged = rep.ks <= kKsTolerance;
  return rep;
}

}  // namespace renewal_lab
