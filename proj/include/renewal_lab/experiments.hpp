#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "renewal_lab/chain_mc.hpp"
#include "renewal_lab/distributions.hpp"
#include "renewal_lab/grid.hpp"
#include "renewal_lab/laws.hpp"
#include "renewal_lab/numeric.hpp"
#include "renewal_lab/occupation.hpp"
#include "renewal_lab/renewal.hpp"
#include "renewal_lab/report.hpp"
#include "renewal_lab/series.hpp"
#include "renewal_lab/special.hpp"

namespace renewal_lab {

// ---------------------------------------------------------------- arcsine

/// K = C^2 p q^{-1} (1-p)^{-2}, q = 1/(1+2 beta).
inline double arcsine_constant(double beta, double p, double C) {
  return C * C * p / arcsine_q(beta) / ((1.0 - p) * (1.0 - p));
}

/// K I_beta(t).
inline double arcsine_limit(double beta, double p, double C, double t) {
  return arcsine_constant(beta, p, C) * beta_incomplete(beta, t);
}

/// The C entering K: a_n = C n^{-(beta+1)}.
inline double arcsine_c(const ReturnLaw& law) { return law.mass_coef(); }

struct ArcsineSum {
  double from_one = 0.0;   // j = 0 term dropped
  double from_zero = 0.0;  // j = 0 term u_0 P(defective tau > n) kept
};

/// F_n(t) = sum_{0 <= j <= (nt)^{1/q}} u_{floor(j^q)} P(defective tau > n - floor(j^q)),
/// grouped by k = floor(j^q) with integer multiplicities.
class ArcsineExact {
 public:
  ArcsineExact(const TransientLaw& tl, std::uint64_t n, const RenewalOptions& opt = {})
      : tl_(tl), n_(n), grid_(arcsine_q(tl.base().beta())) {
    if (n < 1) fail(ErrorCode::InvalidArgument, "n must be at least 1");
    u_ = renewal_fast(tl, n, opt).u;
  }

  std::uint64_t n() const { return n_; }
  double q() const { return grid_.q(); }

  ArcsineSum operator()(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) fail(ErrorCode::InvalidArgument, "t must lie in [0,1]");
    const std::uint64_t J = grid_.last_index_below(static_cast<double>(n_) * t);
    const std::uint64_t k_top = grid_.at(J);
    CompensatedSum s;
    std::uint64_t lo = grid_.first_index(1);
    for (std::uint64_t k = 1; k <= k_top; ++k) {
      const std::uint64_t next = grid_.first_index(k + 1);
      const std::uint64_t hi = std::min(J, next - 1);
      if (hi >= lo) s.add(static_cast<double>(hi - lo + 1) * u_[k] * tl_.defective_tail(n_ - k));
      lo = next;
    }
    ArcsineSum out;
    out.from_one = s.value();
    s.add(u_[0] * tl_.defective_tail(n_));
    out.from_zero = s.value();
    return out;
  }

 private:
  TransientLaw tl_;
  std::uint64_t n_;
  PowerGrid grid_;
  std::vector<double> u_;
};

inline ArcsineSum exact_arcsine_sum(const TransientLaw& tl, std::uint64_t n, double t) { return ArcsineExact(tl, n)(t); }

inline constexpr double kArcsineRatioTolerance = 0.05;

/// Inclusive "start:stop:count".
inline std::vector<double> parse_t_grid(const std::string& spec) {
  const auto a = spec.find(':');
  const auto b = a == std::string::npos ? a : spec.find(':', a + 1);
  if (b == std::string::npos) fail(ErrorCode::InvalidArgument, "t-grid must look like start:stop:count");
  double lo = 0.0, hi = 0.0;
  long count = 0;
  try {
    std::size_t used = 0;
    lo = std::stod(spec.substr(0, a), &used);
    if (used != a) throw std::invalid_argument("lo");
    hi = std::stod(spec.substr(a + 1, b - a - 1), &used);
    if (used != b - a - 1) throw std::invalid_argument("hi");
    count = std::stol(spec.substr(b + 1), &used);
    if (used != spec.size() - b - 1) throw std::invalid_argument("count");
  } catch (const std::logic_error&) {
    fail(ErrorCode::InvalidArgument, "t-grid must look like start:stop:count");
  }
  if (count < 1 || (count == 1 && lo != hi) || hi < lo) fail(ErrorCode::InvalidArgument, "bad t-grid bounds or count");
  std::vector<double> g;
  for (long i = 0; i < count; ++i) {
    g.push_back(count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return g;
}

inline constexpr const char* kDefaultTGrid = "0.1:0.9:9";

struct ArcsineConfig {
  double beta = 0.5;
  double p = 0.5;
  std::vector<std::uint64_t> n_list{10000};
  std::vector<double> t_grid = parse_t_grid(kDefaultTGrid);
  std::size_t n_max = std::size_t{1} << 20;
  SimConfig sim;
  bool run_mc = true;
};

inline Json sim_meta(const SimConfig& cfg) {
  Json j;
  j["seed"] = cfg.seed;
  j["samples"] = cfg.samples;
  return j;
}

inline ExperimentReport arcsine_convergence_report(const ArcsineConfig& c) {
  ExperimentReport rep("arcsine");
  const ReturnLaw law = power_law_return(c.beta, c.n_max);
  const TransientLaw tl(law, c.p);
  const bool assert_mode = c.beta > 0.0 && c.beta < 1.0;
  const double C = arcsine_c(law);
  auto& m = rep.meta();
  m["beta"] = c.beta;
  m["p"] = c.p;
  m["n_list"] = c.n_list;
  m["t_grid"] = c.t_grid;
  m["n_max"] = c.n_max;
  m["q"] = arcsine_q(c.beta);
  m["C"] = C;
  m["C_convention"] = "a_n = C n^-(beta+1)";
  m["c_tail"] = law.c_tail();
  m["mode"] = assert_mode ? "asserted" : "audit-only";
  if (assert_mode) {
    m["K"] = arcsine_constant(c.beta, c.p, C);
    m["tail_factor"] = c.p / c.beta;
  }
  if (c.run_mc) m["mc"] = sim_meta(c.sim);

  auto& tab = rep.table("arcsine", {"n", "t", "F_n", "F_n_with_j0", "limit", "ratio", "ratio_tail_corrected", "mc_cdf",
                                    "mc_stderr", "mc_weighted", "mc_weighted_stderr", "mc_gap", "mc_z"});
  const double nan = std::nan("");
  std::vector<std::vector<double>> ratios(c.n_list.size());
  for (std::size_t i = 0; i < c.n_list.size(); ++i) {
    const std::uint64_t n = c.n_list[i];
    const ArcsineExact exact(tl, n);
    ArcsineMc mc;
    if (c.run_mc) {
      SimConfig sim = c.sim;
      mc = mc_arcsine_cdf(tl, n, c.t_grid, sim);
    }
    for (std::size_t k = 0; k < c.t_grid.size(); ++k) {
      const double t = c.t_grid[k];
      const ArcsineSum F = exact(t);
      const double lim = assert_mode ? arcsine_limit(c.beta, c.p, C, t) : nan;
      const double ratio = assert_mode && lim > 0.0 ? F.from_one / lim : nan;
      ratios[i].push_back(ratio);
      const double corrected = ratio * c.beta / c.p;
      double mcv = nan, mcse = nan, w = nan, wse = nan, gap = nan, z = nan;
      if (c.run_mc) {
        mcv = mc.cdf[k];
        mcse = mc.stderr_cdf[k];
        w = mc.weighted[k];
        wse = mc.stderr_weighted[k];
        gap = w - F.from_one;
        z = wse > 0.0 ? gap / wse : (gap == 0.0 ? 0.0 : nan);
      }
      tab.add({n, t, F.from_one, F.from_zero, lim, ratio, corrected, mcv, mcse, w, wse, gap, z});
    }
  }
  if (assert_mode) {
    const auto& last = ratios.back();
    double worst = 0.0;
    for (double r : last) worst = std::max(worst, std::fabs(r - 1.0));
    rep.verdict("arcsine-ratio-final-n", true, worst <= kArcsineRatioTolerance, kArcsineRatioTolerance,
                "max |F_n/(K I_beta) - 1| at the largest n = " + format_double(worst));
    bool monotone = true;
    for (std::size_t k = 0; k < c.t_grid.size(); ++k) {
      for (std::size_t i = 1; i < ratios.size(); ++i) {
        if (std::fabs(ratios[i][k] - 1.0) > std::fabs(ratios[i - 1][k] - 1.0)) monotone = false;
      }
    }
    rep.verdict("arcsine-ratio-monotone", false, monotone, 0.0, monotone ? "monotone in n" : "not monotone in n");
  }
  if (c.run_mc) rep.verdict("mc-vs-exact", false, true, 0.0, "see mc_z column");
  return rep;
}

// ---------------------------------------------------------------- section 3

inline constexpr double kSection3Tolerance = 0.05;

inline ExperimentReport section3_sweep(const std::vector<double>& betas, const std::vector<double>& ps, std::size_t N,
                                       std::size_t n_max = std::size_t{1} << 16) {
  ExperimentReport rep("section3");
  rep.meta()["betas"] = betas;
  rep.meta()["ps"] = ps;
  rep.meta()["N"] = N;
  rep.meta()["n_max"] = n_max;
  auto& fin = rep.table("final", {"beta", "p", "N", "r_N", "R_N", "u_N_over_g_N_times_(1-p)^2"});
  auto& trend = rep.table("trend", {"beta", "p", "n", "r_n", "R_n"});
  for (double beta : betas) {
    const ReturnLaw law = power_law_return(beta, n_max);
    for (double p : ps) {
      const TransientLaw tl(law, p);
      const RenewalSequence rs = renewal_fast(tl, N);
      const auto r = diag_pointwise(rs);
      const auto R = diag_tailsum(rs);
      for (std::size_t n : dyadic_checkpoints(2, N)) trend.add({beta, p, n, r[n], R[n]});
      const double rescaled = rs.u[N] / tl.g(N) * (1.0 - p) * (1.0 - p);
      fin.add({beta, p, N, r[N], R[N], rescaled});
      const std::string id = "beta=" + format_double(beta) + ",p=" + format_double(p);
      rep.verdict("pointwise " + id, true, std::fabs(r[N] - 1.0) <= kSection3Tolerance, kSection3Tolerance,
                  "r_N = " + format_double(r[N]));
      rep.verdict("tailsum " + id, true, std::fabs(R[N] - 1.0) <= kSection3Tolerance, kSection3Tolerance,
                  "R_N = " + format_double(R[N]));
    }
  }
  return rep;
}

// ---------------------------------------------------------------- section 5

inline constexpr double kExactTolerance = 1e-12;
inline constexpr double kMcSigmas = 3.0;

struct Section5Config {
  std::vector<double> ps{0.3, 0.5, 0.7};
  std::vector<std::size_t> ns{2, 5, 10, 20, 40, 60};
  std::size_t m_cap = 8;
  std::vector<double> t_grid = parse_t_grid(kDefaultTGrid);
  std::size_t survivor_n = 400;
  SimConfig sim{7, 1, 200000, 0};
  bool run_mc = true;
};

inline ExperimentReport section5_audit(const ReturnLaw& law, const Section5Config& c) {
  ExperimentReport rep("section5");
  auto& m = rep.meta();
  m["ps"] = c.ps;
  m["ns"] = c.ns;
  m["m_cap"] = c.m_cap;
  m["t_grid"] = c.t_grid;
  m["law_n_max"] = law.n_max();
  if (law.has_tail_index()) m["beta"] = law.beta();
  if (c.run_mc) m["mc"] = sim_meta(c.sim);

  auto& audit = rep.table("identity", {"n", "m", "p", "lhs", "sum_factor", "joint_factor", "product", "gap", "W", "F_m",
                                       "paper_sandwich_holds"});
  double abel_worst = 0.0, dual_worst = 0.0, enum_worst = 0.0;
  bool bounds_ok = true, sandwich_all = true;
  std::size_t enum_cases = 0;
  for (std::size_t n : c.ns) {
    const std::size_t mm = std::min(n, c.m_cap);
    const OccupationTable tab = sn_distribution(law, n, n);
    if (n <= kExactScaleN) {
      const auto pmf = occupation_pmf_by_states(law, n);
      CompensatedSum F;
      for (std::size_t k = 0; k <= n; ++k) {
        F.add(pmf[k]);
        dual_worst = std::max(dual_worst, std::fabs(F.value() - tab.F[k]));
      }
    }
    for (double p : c.ps) {
      for (std::size_t mi = 1; mi <= mm; ++mi) {
        const RatioAudit ra = ratio_identity_audit(tab, p, mi);
        const AbelDecomposition ad = abel_decomposition(tab, p, mi);
        abel_worst = std::max(abel_worst, std::fabs(ad.W_direct - ad.W_abel));
        bounds_ok = bounds_ok && ad.provable_bounds_hold;
        sandwich_all = sandwich_all && ad.paper_sandwich_holds;
        audit.add({n, mi, p, ra.lhs, ra.sum_factor, ra.joint_factor, ra.product, ra.gap, ad.W_direct, ad.F_m,
                   ad.paper_sandwich_holds});
        if (n <= 10 && mi <= 3) {
          const EnumeratedProbabilities e = enumerate_marked_paths(law, p, n, mi);
          ++enum_cases;
          enum_worst = std::max({enum_worst, std::fabs(e.lhs - ra.lhs), std::fabs(e.sum_factor - ra.sum_factor),
                                 std::fabs(e.joint - ra.joint_factor), std::fabs(e.tau_tail - tab.F[mi]),
                                 std::fabs(e.survivors - std::pow(p, static_cast<double>(mi)))});
          for (std::size_t k = 0; k <= n; ++k) enum_worst = std::max(enum_worst, std::fabs(e.pmf[k] - tab.pmf(k)));
        }
      }
    }
  }
  rep.verdict("duality-vs-state-dp", true, dual_worst <= kExactTolerance, kExactTolerance,
              "max |F_conv - F_dp| = " + format_double(dual_worst));
  rep.verdict("abel-identity", true, abel_worst <= kExactTolerance, kExactTolerance,
              "max |W_direct - W_abel| = " + format_double(abel_worst));
  rep.verdict("provable-bounds", true, bounds_ok, kBoundSlack, "p^{m-1} F_m <= W <= F_m");
  if (enum_cases > 0) {
    rep.verdict("enumeration-oracle", true, enum_worst <= kExactTolerance, kExactTolerance,
                std::to_string(enum_cases) + " cases, max deviation " + format_double(enum_worst));
  }
  rep.verdict("upper-sandwich", false, sandwich_all, kBoundSlack,
              sandwich_all ? "held on every row" : "violated on some rows; see paper_sandwich_holds");
  rep.verdict("ratio-identity", false, true, 0.0, "factorization gap per row; see gap column");

  if (law.has_tail_index() && law.beta() < 1.0) {
    auto& surv = rep.table("survivor", {"p", "n", "t", "m", "W", "F_m", "ratio", "lower", "survivor_mass", "bounds_hold"});
    for (double p : c.ps) {
      const SurvivorReport sr = prop_surv_finite_report(law, p, c.survivor_n, c.t_grid);
      for (const auto& r : sr.rows) {
        surv.add({p, sr.n, r.t, r.m, r.W, r.F_m, r.ratio, r.lower, r.survivor_mass, r.bounds_hold});
      }
    }
  }

  if (c.run_mc) {
    auto& mc = rep.table("survivor_mc", {"p", "n", "m", "exact", "mc", "stderr", "survivors", "z"});
    bool all_ok = true;
    const double p = c.ps.front();
    for (std::size_t n : {std::size_t{10}, std::size_t{40}}) {
      for (std::size_t mi : {std::size_t{1}, std::size_t{3}}) {
        const double exact = survivor_conditioned_tail(law, p, n, mi);
        const SurvivorMc s = mc_survivor_conditioned(TransientLaw(law, p), n, mi, c.sim);
        const double z = s.stderr_estimate > 0.0 ? (s.estimate - exact) / s.stderr_estimate : 0.0;
        all_ok = all_ok && std::fabs(z) <= kMcSigmas;
        mc.add({p, n, mi, exact, s.estimate, s.stderr_estimate, s.survivors, z});
      }
    }
    rep.verdict("survivor-mc", true, all_ok, kMcSigmas, "|z| <= 3 binomial standard errors");
  }
  return rep;
}

// ---------------------------------------------------------------- Darling-Kac

inline constexpr double kDarlingKacTolerance = 0.05;

inline ExperimentReport darling_kac_report(double beta, std::uint64_t n, const SimConfig& sim,
                                           std::size_t n_max = std::size_t{1} << 20) {
  ExperimentReport rep("darling-kac");
  const ReturnLaw law = power_law_return(beta, n_max);
  const DarlingKacMc dk = mc_darling_kac_baseline(law, n, sim);
  auto& m = rep.meta();
  m["beta"] = beta;
  m["n"] = n;
  m["n_max"] = n_max;
  m["mc"] = sim_meta(sim);
  m["c_tail"] = dk.c_tail;
  m["normalization"] = "Gamma(1-beta) Gamma(1+beta) c_tail n^-beta S_n";
  const double target1 = ml_moment(beta, 1), target2 = ml_moment(beta, 2);
  auto& tab = rep.table("moments", {"moment", "empirical", "stderr", "target", "literal_empirical"});
  tab.add({1, dk.mean, dk.stderr_mean, target1, dk.literal_mean});
  tab.add({2, dk.second, dk.stderr_second, target2, dk.literal_second});
  const double e1 = std::fabs(dk.mean / target1 - 1.0), e2 = std::fabs(dk.second / target2 - 1.0);
  rep.verdict("first-moment", true, e1 <= kDarlingKacTolerance, kDarlingKacTolerance,
              "relative error " + format_double(e1));
  rep.verdict("second-moment", true, e2 <= kDarlingKacTolerance, kDarlingKacTolerance,
              "relative error " + format_double(e2));
  const double l1 = std::fabs(dk.literal_mean / target1 - 1.0);
  rep.verdict("literal-normalization", false, l1 <= kDarlingKacTolerance, kDarlingKacTolerance,
              "c_tail^-1 n^-beta S_n mean off by " + format_double(l1));
  return rep;
}

// ---------------------------------------------------------------- series

inline constexpr double kLogRatioSpread = 2.0;

inline ExperimentReport series_report(double beta, std::size_t N) {
  ExperimentReport rep("series-check");
  rep.meta()["beta"] = beta;
  rep.meta()["N"] = N;
  rep.meta()["input"] = "a_0 = -sum_{n>=1} n^-(beta+1), a_n = n^-(beta+1); b = a";
  const VanishingPowerSeries v = vanishing_power_series(beta, N);
  const RegimeReport r = abstr_regime_check(v.series, v.series, beta, v.tail_mass, v.tail_mass);
  auto& tab = rep.table("regime", {"beta", "predicted_regime", "observed_regime", "predicted_exponent",
                                   "fitted_exponent", "fitted_log_constant", "window_lo", "window_hi", "bound_respected"});
  tab.add({beta, to_string(r.predicted), to_string(r.observed), r.predicted_exponent, r.fitted_exponent,
           r.fitted_log_constant, r.window.lo, r.window.hi, r.bound_respected});
  auto& coeffs = rep.table("coefficients", {"n", "C_n"});
  for (std::size_t n : dyadic_checkpoints(1, N)) coeffs.add({n, r.c[n]});
  rep.verdict("decay-exponent", true, r.within_tolerance, kRegimeTolerance,
              "fitted " + format_double(r.fitted_exponent) + " vs predicted " + format_double(r.predicted_exponent));
  rep.verdict("upper-bound", false, r.bound_respected, kRegimeTolerance, "decay at least as fast as predicted");
  if (beta == 1.0 && N >= 1000) {
    const RatioRange rr = log_corrected_ratio_range(r.c, {1000, N});
    rep.table("log_ratio", {"window_lo", "window_hi", "min", "max"}).add({1000, N, rr.min, rr.max});
    rep.verdict("log-corrected-ratio-bounded", true, rr.min > 0.0 && rr.max <= kLogRatioSpread * rr.min,
                kLogRatioSpread, "C_n n^2/log n in [" + format_double(rr.min) + ", " + format_double(rr.max) + "]");
  }
  return rep;
}

}  // namespace renewal_lab
