#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "renewal_lab/error.hpp"
#include "renewal_lab/laws.hpp"
#include "renewal_lab/numeric.hpp"

namespace renewal_lab {

/// Largest horizon the O(m n^2) convolution tables accept.
inline constexpr std::size_t kOccupationMaxN = 20000;

/// F[m] = P(S_n <= m) = P(tau_m >= n), m = 0..m_max, where S_n counts visits
/// to the base state in [0, n-1] (time 0 included).
struct OccupationTable {
  std::size_t n = 0;
  std::vector<double> F;
  ReturnLaw law;

  std::size_t m_max() const { return F.size() - 1; }
  /// P(S_n = k), k <= m_max.
  double pmf(std::size_t k) const { return k == 0 ? F[0] : F[k] - F[k - 1]; }
};

namespace detail {

inline void check_occupation_size(std::size_t n, std::size_t m_max) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "n must be at least 1");
  if (m_max > n) fail(ErrorCode::InvalidArgument, "m_max must not exceed n");
  if (n > kOccupationMaxN) fail(ErrorCode::CapacityExceeded, "occupation tables limited to n <= 20000");
}

}  // namespace detail

/// m-fold convolution of the return law truncated at lag n; mass reaching n
/// or beyond leaves the table and is counted in F.
inline OccupationTable sn_distribution(const ReturnLaw& law, std::size_t n, std::size_t m_max) {
  detail::check_occupation_size(n, m_max);
  std::vector<long double> a(n, 0.0L);
  for (std::size_t j = 1; j < n; ++j) a[j] = law.mass(j);
  std::vector<long double> d(n, 0.0L), next(n);
  d[0] = 1.0L;  // tau_0 = 0
  OccupationTable tab{n, std::vector<double>(m_max + 1, 0.0), law};
  for (std::size_t m = 0; m <= m_max; ++m) {
    if (m > 0) {
      std::fill(next.begin(), next.end(), 0.0L);
      for (std::size_t s = 0; s < n; ++s) {
        if (d[s] == 0.0L) continue;
        for (std::size_t t = s + 1; t < n; ++t) next[t] += d[s] * a[t - s];
      }
      d.swap(next);
    }
    long double below = 0.0L;
    for (long double x : d) below += x;
    const double f = std::min(1.0, static_cast<double>(1.0L - below));
    tab.F[m] = m == 0 ? std::max(0.0, f) : std::max(tab.F[m - 1], f);
  }
  return tab;
}

/// P(S_n = k), k = 0..n, by forward DP over the chain's age (time since the last
/// visit). Independent of the convolution route.
inline std::vector<double> occupation_pmf_by_states(const ReturnLaw& law, std::size_t n) {
  detail::check_occupation_size(n, n);
  // Hazard of returning after age j: a_{j+1} / P(tau > j).
  std::vector<long double> hazard(n + 1, 0.0L);
  for (std::size_t j = 0; j <= n; ++j) {
    const long double surv = law.tail(j);
    hazard[j] = surv > 0.0L ? static_cast<long double>(law.mass(j + 1)) / surv : 1.0L;
  }
  // P[age][visits] at the current time.
  std::vector<std::vector<long double>> P(n + 1, std::vector<long double>(n + 2, 0.0L)), Q = P;
  P[0][1] = 1.0L;  // time 0: at the base state, one visit
  for (std::size_t t = 1; t < n; ++t) {
    for (auto& row : Q) std::fill(row.begin(), row.end(), 0.0L);
    for (std::size_t age = 0; age < t; ++age) {
      for (std::size_t v = 1; v <= t; ++v) {
        const long double x = P[age][v];
        if (x == 0.0L) continue;
        const long double h = hazard[age];
        Q[0][v + 1] += x * h;
        Q[age + 1][v] += x * (1.0L - h);
      }
    }
    P.swap(Q);
  }
  std::vector<long double> acc(n + 2, 0.0L);
  for (const auto& row : P) {
    for (std::size_t v = 0; v < row.size(); ++v) acc[v] += row[v];
  }
  std::vector<double> pmf(n + 1);
  for (std::size_t k = 0; k <= n; ++k) pmf[k] = static_cast<double>(acc[k]);
  return pmf;
}

struct RatioAudit {
  std::size_t n = 0, m = 0;
  double p = 0.0;
  double lhs = 0.0;           // p^m P(tau_m >= n)
  double sum_factor = 0.0;    // sum_{k=1..m} p^{m-k} P(S_n = k)
  double joint_factor = 0.0;  // sum_{k=1..m} p^{k-1} P(S_n = k)
  double product = 0.0;
  double gap = 0.0;  // |lhs - product|
  double rel_gap = 0.0;
};

inline constexpr std::size_t kExactScaleN = 60;

inline RatioAudit ratio_identity_audit(const OccupationTable& tab, double p, std::size_t m) {
  require_probability(p);
  if (m < 1 || m > tab.m_max()) fail(ErrorCode::InvalidArgument, "m must lie in [1, m_max]");
  RatioAudit r;
  r.n = tab.n;
  r.m = m;
  r.p = p;
  r.lhs = std::pow(p, static_cast<double>(m)) * tab.F[m];
  CompensatedSum s, j;
  for (std::size_t k = 1; k <= m; ++k) {
    s.add(std::pow(p, static_cast<double>(m - k)) * tab.pmf(k));
    j.add(std::pow(p, static_cast<double>(k - 1)) * tab.pmf(k));
  }
  r.sum_factor = s.value();
  r.joint_factor = j.value();
  r.product = r.sum_factor * r.joint_factor;
  r.gap = std::fabs(r.lhs - r.product);
  r.rel_gap = r.product > 0.0 ? r.gap / r.product : 0.0;
  return r;
}

inline RatioAudit ratio_identity_audit(const ReturnLaw& law, double p, std::size_t n, std::size_t m) {
  require_probability(p);
  if (n > kExactScaleN) fail(ErrorCode::CapacityExceeded, "identity audit limited to n <= 60");
  if (m > n) fail(ErrorCode::InvalidArgument, "m must not exceed n");
  return ratio_identity_audit(sn_distribution(law, n, m), p, m);
}

struct AbelDecomposition {
  std::size_t m = 0;
  double p = 0.0;
  double W_direct = 0.0;  // sum_{k=1..m} p^{m-k} P(S_n = k)
  double W_abel = 0.0;    // F_m - (1-p) sum_{k=1..m-1} p^{m-1-k} F_k
  double F_m = 0.0;
  double lower = 0.0;  // p^{m-1} F_m
  bool provable_bounds_hold = false;
  bool paper_sandwich_holds = false;  // F_m <= W <= (1+p) F_m
};

inline constexpr double kBoundSlack = 1e-12;

inline AbelDecomposition abel_decomposition(const OccupationTable& tab, double p, std::size_t m) {
  if (!(p > 0.0 && p <= 1.0)) fail(ErrorCode::POutOfRange, "p must lie in (0,1]");
  if (m < 1 || m > tab.m_max()) fail(ErrorCode::InvalidArgument, "m must lie in [1, m_max]");
  AbelDecomposition d;
  d.m = m;
  d.p = p;
  d.F_m = tab.F[m];
  CompensatedSum direct, abel;
  for (std::size_t k = 1; k <= m; ++k) direct.add(std::pow(p, static_cast<double>(m - k)) * tab.pmf(k));
  for (std::size_t k = 1; k < m; ++k) abel.add(std::pow(p, static_cast<double>(m - 1 - k)) * tab.F[k]);
  d.W_direct = direct.value();
  d.W_abel = d.F_m - (1.0 - p) * abel.value();
  d.lower = std::pow(p, static_cast<double>(m - 1)) * d.F_m;
  const double W = d.W_direct;
  d.provable_bounds_hold = W >= d.lower - kBoundSlack && W <= d.F_m + kBoundSlack;
  d.paper_sandwich_holds = W >= d.F_m - kBoundSlack && W <= (1.0 + p) * d.F_m + kBoundSlack;
  return d;
}

/// P(tau_m >= n | first m returns survive). Marks are independent of the
/// excursion lengths, so this is the unconditioned P(tau_m >= n).
inline double survivor_conditioned_tail(const ReturnLaw& law, double p, std::size_t n, std::size_t m) {
  require_probability(p);
  return sn_distribution(law, n, m).F[m];
}

struct SurvivorRow {
  double t = 0.0;
  std::size_t m = 0;
  double W = 0.0;
  double F_m = 0.0;
  double ratio = 0.0;  // W / F_m
  double lower = 0.0;  // p^{m-1}
  double survivor_mass = 0.0;
  bool bounds_hold = false;
};

struct SurvivorReport {
  double beta = 0.0, p = 0.0;
  std::size_t n = 0;
  std::vector<SurvivorRow> rows;
};

/// m = floor(n^beta t), clamped to [1, n].
inline SurvivorReport prop_surv_finite_report(const ReturnLaw& law, double p, std::size_t n,
                                              const std::vector<double>& t_grid) {
  require_probability(p);
  const double beta = law.beta();
  if (!(beta > 0.0 && beta < 1.0)) fail(ErrorCode::BetaOutOfRange, "beta must lie in (0,1)");
  SurvivorReport rep{beta, p, n, {}};
  std::vector<std::size_t> ms;
  std::size_t m_top = 1;
  for (double t : t_grid) {
    if (!(t > 0.0)) fail(ErrorCode::InvalidArgument, "t must be positive");
    const double raw = std::floor(std::pow(static_cast<double>(n), beta) * t);
    const std::size_t m = std::clamp<std::size_t>(static_cast<std::size_t>(raw), 1, n);
    ms.push_back(m);
    m_top = std::max(m_top, m);
  }
  const OccupationTable tab = sn_distribution(law, n, m_top);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const std::size_t m = ms[i];
    const AbelDecomposition d = abel_decomposition(tab, p, m);
    const RatioAudit ra = ratio_identity_audit(tab, p, m);
    SurvivorRow row;
    row.t = t_grid[i];
    row.m = m;
    row.W = d.W_direct;
    row.F_m = d.F_m;
    row.ratio = d.F_m > 0.0 ? d.W_direct / d.F_m : 0.0;
    row.lower = std::pow(p, static_cast<double>(m - 1));
    row.survivor_mass = ra.joint_factor;
    row.bounds_hold = d.provable_bounds_hold;
    rep.rows.push_back(row);
  }
  return rep;
}

/// Event probabilities of the marked-renewal model by exhaustive enumeration of
/// excursion lengths and survival marks. Lengths of n or more are lumped.
struct EnumeratedProbabilities {
  std::vector<double> pmf;  // P(S_n = k), k = 0..n
  double tau_tail = 0.0;    // P(tau_m >= n)
  double lhs = 0.0;         // P(tau_m >= n, first m returns alive)
  double joint = 0.0;       // P(S_n <= m, every return before n alive)
  double sum_factor = 0.0;  // P(S_n <= m, returns S_n..m-1 alive)
  double survivors = 0.0;   // P(first m returns alive)
};

inline EnumeratedProbabilities enumerate_marked_paths(const ReturnLaw& law, double p, std::size_t n, std::size_t m) {
  require_probability(p);
  if (n < 1 || n > 10 || m < 1 || m > 3) fail(ErrorCode::CapacityExceeded, "enumeration limited to n <= 10, m <= 3");
  struct Step {
    std::size_t len;
    double prob;
  };
  std::vector<Step> steps;
  for (std::size_t j = 1; j < n; ++j) {
    if (law.mass(j) > 0.0) steps.push_back({j, law.mass(j)});
  }
  if (law.tail(n - 1) > 0.0) steps.push_back({n, law.tail(n - 1)});

  EnumeratedProbabilities out;
  out.pmf.assign(n + 1, 0.0);
  const std::size_t depth = std::max(m, n);
  std::vector<std::size_t> times(depth + 1, 0);
  std::vector<bool> alive(depth + 1, true);
  std::function<void(std::size_t, double)> rec = [&](std::size_t r, double w) {
    // r returns drawn so far; times[r] is the r-th return time (capped at n).
    if (r == depth || (times[r] >= n && r >= m)) {
      std::size_t S = 1;
      while (S <= r && times[S] < n) ++S;  // visits at 0 and returns before n
      out.pmf[S] += w;
      bool first_m = true;
      for (std::size_t i = 1; i <= m; ++i) first_m = first_m && alive[i];
      const bool tail = times[m] >= n;
      if (tail) out.tau_tail += w;
      if (first_m) out.survivors += w;
      if (tail && first_m) out.lhs += w;
      if (S <= m) {
        bool before = true;
        for (std::size_t i = 1; i < S; ++i) before = before && alive[i];
        if (before) out.joint += w;
        bool after = true;
        for (std::size_t i = S; i < m; ++i) after = after && alive[i];
        if (after) out.sum_factor += w;
      }
      return;
    }
    if (times[r] >= n) {
      // Lengths no longer matter; only the marks do.
      times[r + 1] = n;
      for (int mark = 0; mark < 2; ++mark) {
        alive[r + 1] = mark == 1;
        rec(r + 1, w * (mark == 1 ? p : 1.0 - p));
      }
      return;
    }
    for (const Step& s : steps) {
      times[r + 1] = std::min(n, times[r] + s.len);
      for (int mark = 0; mark < 2; ++mark) {
        alive[r + 1] = mark == 1;
        rec(r + 1, w * s.prob * (mark == 1 ? p : 1.0 - p));
      }
    }
  };
  rec(0, 1.0);
  return out;
}

}  // namespace renewal_lab
