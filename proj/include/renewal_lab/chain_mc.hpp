#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "renewal_lab/error.hpp"
#include "renewal_lab/grid.hpp"
#include "renewal_lab/laws.hpp"
#include "renewal_lab/rng.hpp"
#include "renewal_lab/sampler.hpp"
#include "renewal_lab/special.hpp"

namespace renewal_lab {

/// Results depend on (seed, samples, law, parameters) only. Path i always uses
/// stream i, so `shards` changes the schedule and never the numbers.
struct SimConfig {
  std::uint64_t seed = 0;
  unsigned shards = 1;
  std::uint64_t samples = 1;
  std::uint64_t horizon = 0;
};

inline constexpr const char* kShardsEnv = "RENEWAL_LAB_SHARDS";

/// Shard count after the environment override.
inline unsigned effective_shards(const SimConfig& cfg) {
  if (const char* env = std::getenv(kShardsEnv)) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<unsigned>(v);
  }
  return std::max(1u, cfg.shards);
}

inline void validate(const SimConfig& cfg) {
  if (cfg.samples < 1) fail(ErrorCode::InvalidArgument, "samples must be at least 1");
  if (cfg.shards < 1) fail(ErrorCode::InvalidArgument, "shards must be at least 1");
}

/// Stream ids: path index in the low 48 bits, experiment tag above.
inline std::uint64_t stream_id(std::uint64_t path, std::uint64_t tag = 0) { return (tag << 48) | path; }

/// Runs body(acc, path_index) over [0, samples) split into contiguous shards,
/// one thread each, then folds the shard accumulators in shard order.
/// Acc must provide merge(const Acc&); only exact (integer) state belongs there.
template <class Acc, class Body>
Acc parallel_for_paths(const SimConfig& cfg, const Acc& zero, Body body) {
  validate(cfg);
  const unsigned shards = static_cast<unsigned>(std::min<std::uint64_t>(effective_shards(cfg), cfg.samples));
  std::vector<Acc> acc(shards, zero);
  std::vector<std::exception_ptr> errors(shards);
  auto run = [&](unsigned s) {
    try {
      const std::uint64_t lo = cfg.samples * s / shards, hi = cfg.samples * (s + 1) / shards;
      for (std::uint64_t i = lo; i < hi; ++i) body(acc[s], i);
    } catch (...) {
      errors[s] = std::current_exception();
    }
  };
  if (shards == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(shards);
    for (unsigned s = 0; s < shards; ++s) pool.emplace_back(run, s);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  Acc out = zero;
  for (const Acc& a : acc) out.merge(a);
  return out;
}

/// Surviving renewal epochs up to the horizon. The excursion that ends the
/// record is kept: either it returned dead (death_time), or it overshot the
/// horizon (next_return, next_alive).
struct TerminatingPath {
  std::vector<std::uint64_t> epochs{0};
  std::optional<std::uint64_t> death_time;
  bool alive_at_horizon = false;
  std::uint64_t next_return = 0;
  bool next_alive = false;
  std::uint64_t horizon = 0;

  std::uint64_t last_epoch() const { return epochs.back(); }
  /// Surviving returns before death (excludes time 0).
  std::size_t returns() const { return epochs.size() - 1; }
};

inline std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return a > kSaturatedLength - std::min(b, kSaturatedLength) ? kSaturatedLength : a + b;
}

inline TerminatingPath sample_path(const TransientLaw& tl, const ExcursionSampler& sampler, RandomStream& rng,
                                   std::uint64_t horizon) {
  if (horizon < 1) fail(ErrorCode::InvalidArgument, "horizon must be at least 1");
  TerminatingPath path;
  path.horizon = horizon;
  std::uint64_t t = 0;
  for (;;) {
    const std::uint64_t next = saturating_add(t, sampler.draw(rng));
    const bool alive = rng.bernoulli(tl.p());
    if (next > horizon) {
      path.alive_at_horizon = true;
      path.next_return = next;
      path.next_alive = alive;
      return path;
    }
    if (!alive) {
      path.death_time = next;
      return path;
    }
    path.epochs.push_back(next);
    t = next;
  }
}

/// Path `index` of the configuration's seed.
inline TerminatingPath sample_path(const TransientLaw& tl, const SimConfig& cfg, std::uint64_t horizon,
                                   std::uint64_t index = 0) {
  const ExcursionSampler sampler(tl.base());
  RandomStream rng(cfg.seed, stream_id(index));
  return sample_path(tl, sampler, rng, horizon);
}

struct LastVisit {
  std::uint64_t z_hat = 0;   // max j <= n with floor(j^q) a surviving epoch
  std::uint64_t z_ring = 0;  // last surviving epoch <= floor(n^q)
  double discrepancy = 0.0;  // |z_hat - z_ring^{1/q}|
};

inline LastVisit last_visit_grid(const TerminatingPath& path, std::uint64_t n, double q) {
  if (!(q > 0.0 && q < 1.0)) fail(ErrorCode::QOutOfRange, "q must lie in (0,1)");
  const PowerGrid grid(q);
  const std::uint64_t m = grid.at(n);
  if (path.horizon < m) fail(ErrorCode::InvalidArgument, "path horizon shorter than floor(n^q)");
  LastVisit lv;
  const auto it = std::upper_bound(path.epochs.begin(), path.epochs.end(), m);
  lv.z_ring = *(it - 1);
  lv.z_hat = lv.z_ring == m ? n : std::min(n, grid.first_index(lv.z_ring + 1) - 1);
  lv.discrepancy = std::fabs(static_cast<double>(lv.z_hat) - std::pow(static_cast<double>(lv.z_ring), 1.0 / q));
  return lv;
}

inline double arcsine_q(double beta) { return 1.0 / (1.0 + 2.0 * beta); }

struct ArcsineMc {
  std::uint64_t n = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<double> t;
  std::vector<std::uint64_t> count;  // paths with V <= t, V = last surviving epoch <= n, over n
  std::vector<double> cdf;
  std::vector<double> stderr_cdf;
  // Unbiased estimate of the grid-weighted sum F_n(t) (j = 0 term dropped):
  // weight = #{1 <= j <= (nt)^{1/q} : floor(j^q) = L} on paths whose next return is alive and beyond n.
  std::vector<double> weighted;
  std::vector<double> stderr_weighted;
  std::uint64_t alive_at_horizon = 0;
};

namespace detail {

struct ArcsineAcc {
  std::vector<std::uint64_t> count, wsum;
  std::vector<unsigned __int128> wsq;
  std::uint64_t alive = 0;
  void merge(const ArcsineAcc& o) {
    for (std::size_t i = 0; i < count.size(); ++i) {
      count[i] += o.count[i];
      wsum[i] += o.wsum[i];
      wsq[i] += o.wsq[i];
    }
    alive += o.alive;
  }
};

inline double binomial_se(double phat, double N) { return std::sqrt(std::max(0.0, phat * (1.0 - phat)) / N); }

}  // namespace detail

inline constexpr std::uint64_t kArcsineTag = 1;

inline ArcsineMc mc_arcsine_cdf(const TransientLaw& tl, std::uint64_t n, const std::vector<double>& t_grid,
                                const SimConfig& cfg) {
  const double beta = tl.base().beta();
  if (n < 1) fail(ErrorCode::InvalidArgument, "n must be at least 1");
  for (double t : t_grid) {
    if (!(t >= 0.0 && t <= 1.0)) fail(ErrorCode::InvalidArgument, "t must lie in [0,1]");
  }
  const PowerGrid grid(arcsine_q(beta));
  const ExcursionSampler sampler(tl.base());
  std::vector<std::uint64_t> J(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) J[i] = grid.last_index_below(static_cast<double>(n) * t_grid[i]);

  const std::size_t T = t_grid.size();
  detail::ArcsineAcc zero{std::vector<std::uint64_t>(T, 0), std::vector<std::uint64_t>(T, 0),
                          std::vector<unsigned __int128>(T, 0), 0};
  const auto acc = parallel_for_paths(cfg, zero, [&](detail::ArcsineAcc& a, std::uint64_t i) {
    RandomStream rng(cfg.seed, stream_id(i, kArcsineTag));
    const TerminatingPath path = sample_path(tl, sampler, rng, n);
    const std::uint64_t L = path.last_epoch();
    const bool straddles = path.alive_at_horizon && path.next_alive;
    if (path.alive_at_horizon) ++a.alive;
    for (std::size_t k = 0; k < T; ++k) {
      if (static_cast<double>(L) <= static_cast<double>(n) * t_grid[k]) ++a.count[k];
      if (straddles && L >= 1) {
        const std::uint64_t w = grid.multiplicity(L, J[k]);
        a.wsum[k] += w;
        a.wsq[k] += static_cast<unsigned __int128>(w) * w;
      }
    }
  });

  ArcsineMc out;
  out.n = n;
  out.samples = cfg.samples;
  out.seed = cfg.seed;
  out.t = t_grid;
  out.count = acc.count;
  out.alive_at_horizon = acc.alive;
  const double N = static_cast<double>(cfg.samples);
  for (std::size_t k = 0; k < T; ++k) {
    const double phat = static_cast<double>(acc.count[k]) / N;
    out.cdf.push_back(phat);
    out.stderr_cdf.push_back(detail::binomial_se(phat, N));
    const double mean = static_cast<double>(acc.wsum[k]) / N;
    const double second = static_cast<double>(acc.wsq[k]) / N;
    out.weighted.push_back(mean);
    out.stderr_weighted.push_back(std::sqrt(std::max(0.0, second - mean * mean) / N));
  }
  return out;
}

struct DarlingKacMc {
  std::uint64_t n = 0;
  std::uint64_t samples = 0;
  double beta = 0.0;
  double c_tail = 0.0;
  double scale = 0.0;          // Gamma(1-beta) Gamma(1+beta) c_tail n^{-beta}
  double literal_scale = 0.0;  // c_tail^{-1} n^{-beta}
  double mean = 0.0, stderr_mean = 0.0;
  double second = 0.0, stderr_second = 0.0;
  double literal_mean = 0.0, literal_second = 0.0;
  std::uint64_t sum_s = 0;
  unsigned __int128 sum_s2 = 0;
};

/// Visits to the base state in [0, n-1] of the recurrent chain.
inline std::uint64_t occupation_count(const ExcursionSampler& sampler, RandomStream& rng, std::uint64_t n) {
  std::uint64_t visits = 0, t = 0;
  while (t < n) {
    ++visits;
    t = saturating_add(t, sampler.draw(rng));
  }
  return visits;
}

inline constexpr std::uint64_t kDarlingKacTag = 2;

/// Moments of the normalized occupation count, recurrent case (p = 1).
inline DarlingKacMc mc_darling_kac_baseline(const ReturnLaw& law, std::uint64_t n, const SimConfig& cfg) {
  const double beta = law.beta();
  if (!(beta > 0.0 && beta < 1.0)) fail(ErrorCode::BetaOutOfRange, "beta must lie in (0,1)");
  if (n < 1) fail(ErrorCode::InvalidArgument, "n must be at least 1");
  const ExcursionSampler sampler(law);
  struct Acc {
    std::uint64_t s = 0;
    unsigned __int128 s2 = 0;
    unsigned __int128 s4 = 0;
    void merge(const Acc& o) {
      s += o.s;
      s2 += o.s2;
      s4 += o.s4;
    }
  };
  const Acc acc = parallel_for_paths(cfg, Acc{}, [&](Acc& a, std::uint64_t i) {
    RandomStream rng(cfg.seed, stream_id(i, kDarlingKacTag));
    const std::uint64_t S = occupation_count(sampler, rng, n);
    const auto S2 = static_cast<unsigned __int128>(S) * S;
    a.s += S;
    a.s2 += S2;
    a.s4 += S2 * S2;
  });
  DarlingKacMc out;
  out.n = n;
  out.samples = cfg.samples;
  out.beta = beta;
  out.c_tail = law.c_tail();
  const double nb = std::pow(static_cast<double>(n), -beta);
  out.scale = std::tgamma(1.0 - beta) * std::tgamma(1.0 + beta) * out.c_tail * nb;
  out.literal_scale = nb / out.c_tail;
  out.sum_s = acc.s;
  out.sum_s2 = acc.s2;
  const double N = static_cast<double>(cfg.samples);
  const double m1 = static_cast<double>(acc.s) / N, m2 = static_cast<double>(acc.s2) / N;
  const double m4 = static_cast<double>(acc.s4) / N;
  const double k = out.scale;
  out.mean = k * m1;
  out.second = k * k * m2;
  out.stderr_mean = k * std::sqrt(std::max(0.0, m2 - m1 * m1) / N);
  out.stderr_second = k * k * std::sqrt(std::max(0.0, m4 - m2 * m2) / N);
  out.literal_mean = out.literal_scale * m1;
  out.literal_second = out.literal_scale * out.literal_scale * m2;
  return out;
}

struct SurvivorMc {
  std::uint64_t n = 0, m = 0;
  std::uint64_t attempted = 0;
  std::uint64_t survivors = 0;  // first m returns all alive
  std::uint64_t hits = 0;       // survivors with tau_m >= n
  double estimate = 0.0;
  double stderr_estimate = 0.0;
};

inline constexpr std::uint64_t kSurvivorTag = 3;

/// P(tau_m >= n | first m returns survive), by rejection.
inline SurvivorMc mc_survivor_conditioned(const TransientLaw& tl, std::uint64_t n, std::uint64_t m,
                                          const SimConfig& cfg) {
  if (m < 1) fail(ErrorCode::InvalidArgument, "m must be at least 1");
  const ExcursionSampler sampler(tl.base());
  struct Acc {
    std::uint64_t survivors = 0, hits = 0;
    void merge(const Acc& o) {
      survivors += o.survivors;
      hits += o.hits;
    }
  };
  const Acc acc = parallel_for_paths(cfg, Acc{}, [&](Acc& a, std::uint64_t i) {
    RandomStream rng(cfg.seed, stream_id(i, kSurvivorTag));
    std::uint64_t t = 0;
    bool alive = true;
    for (std::uint64_t k = 0; k < m; ++k) {
      t = saturating_add(t, sampler.draw(rng));
      if (!rng.bernoulli(tl.p())) alive = false;
    }
    if (!alive) return;
    ++a.survivors;
    if (t >= n) ++a.hits;
  });
  SurvivorMc out;
  out.n = n;
  out.m = m;
  out.attempted = cfg.samples;
  out.survivors = acc.survivors;
  out.hits = acc.hits;
  if (acc.survivors > 0) {
    const double S = static_cast<double>(acc.survivors);
    out.estimate = static_cast<double>(acc.hits) / S;
    out.stderr_estimate = detail::binomial_se(out.estimate, S);
  }
  return out;
}

/// tau_m = sum of m excursions, one sample per path.
inline std::vector<std::uint64_t> sample_hitting_sums(const ReturnLaw& law, std::uint64_t m, const SimConfig& cfg,
                                                      std::uint64_t tag) {
  const ExcursionSampler sampler(law);
  std::vector<std::uint64_t> out(cfg.samples);
  struct Acc {
    void merge(const Acc&) {}
  };
  parallel_for_paths(cfg, Acc{}, [&](Acc&, std::uint64_t i) {
    RandomStream rng(cfg.seed, stream_id(i, tag));
    std::uint64_t t = 0;
    for (std::uint64_t k = 0; k < m; ++k) t = saturating_add(t, sampler.draw(rng));
    out[i] = t;
  });
  return out;
}

}  // namespace renewal_lab
