#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <vector>

#include "renewal_lab/error.hpp"
#include "renewal_lab/fft.hpp"
#include "renewal_lab/laws.hpp"
#include "renewal_lab/numeric.hpp"

namespace renewal_lab {

struct RenewalOptions {
  std::size_t max_n = std::size_t{1} << 25;
};

/// u_0..u_N of the defective renewal process driven by g, with tail sums
/// sum_{j>n} u_j = (1-p)^{-1} - sum_{j<=n} u_j.
struct RenewalSequence {
  TransientLaw law;
  std::vector<double> u;
  std::vector<double> tail;

  double p() const { return law.p(); }
  std::size_t size() const { return u.size(); }
  std::size_t N() const { return u.size() - 1; }
};

/// u(1) = (1 - g(1))^{-1} = (1-p)^{-1}.
inline double total_mass(const TransientLaw& tl) { return 1.0 / (1.0 - tl.p()); }

namespace detail {

inline void check_capacity(std::size_t N, const RenewalOptions& opt) {
  if (N > opt.max_n) fail(ErrorCode::CapacityExceeded, "renewal length exceeds configured bound");
}

inline std::vector<double> tail_from_partial_sums(const std::vector<double>& u, double total) {
  std::vector<double> tail(u.size());
  CompensatedSum partial;
  partial.add(total);
  for (std::size_t n = 0; n < u.size(); ++n) {
    partial.add(-u[n]);
    tail[n] = partial.value();
  }
  return tail;
}

inline RenewalSequence finish(const TransientLaw& tl, std::vector<double> u) {
  RenewalSequence rs{tl, std::move(u), {}};
  rs.tail = tail_from_partial_sums(rs.u, total_mass(tl));
  return rs;
}

}  // namespace detail

/// Direct O(N^2) recursion u_n = sum_{j=1..n} g_j u_{n-j} with Kahan
/// summation spread over independent lanes.
inline RenewalSequence renewal_direct(const TransientLaw& tl, std::size_t N, const RenewalOptions& opt = {}) {
  detail::check_capacity(N, opt);
  const std::vector<double> g = tl.g_vector(N);
  std::vector<double> u(N + 1, 0.0);
  // rev[N - k] = u_k, so u_{n-j} for j = 1..n is read with ascending stride.
  std::vector<double> rev(N + 1, 0.0);
  u[0] = 1.0;
  rev[N] = 1.0;
  constexpr std::size_t kLanes = 8;
  for (std::size_t n = 1; n <= N; ++n) {
    std::array<double, kLanes> s{}, c{};
    const double* gp = g.data() + 1;
    const double* up = rev.data() + (N - n + 1);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
      for (std::size_t l = 0; l < kLanes; ++l) {
        const double y = gp[i + l] * up[i + l] - c[l];
        const double t = s[l] + y;
        c[l] = (t - s[l]) - y;
        s[l] = t;
      }
    }
    CompensatedSum total;
    for (; i < n; ++i) total.add(gp[i] * up[i]);
    for (std::size_t l = 0; l < kLanes; ++l) {
      total.add(s[l]);
      total.add(-c[l]);
    }
    u[n] = total.value();
    rev[N - n] = u[n];
  }
  return detail::finish(tl, std::move(u));
}

namespace detail {

/// Divide-and-conquer online convolution for u = 1 + g * u.
///
/// Pairs (k, j = n - k) are split three ways: lags j <= H are summed
/// directly for every n, pairs with k < H and j > H are summed directly, and
/// pairs with k >= H and j > H go through cyclic FFT products between sibling
/// halves. Keeping the large-magnitude head of both sequences out of the
/// transforms bounds the FFT rounding by the tails, so tiny far coefficients
/// keep their relative accuracy.
class OnlineRenewal {
 public:
  static constexpr std::size_t kHead = 64;

  OnlineRenewal(const TransientLaw& tl, std::size_t N) : N_(N) {
    P_ = fft::next_pow2(std::max<std::size_t>(N + 1, kHead));
    g_ = tl.g_vector(P_);
    u_.assign(P_, 0.0);
    acc_.assign(P_, 0.0);
  }

  std::vector<double> run() {
    solve(0, P_);
    u_.resize(N_ + 1);
    return std::move(u_);
  }

 private:
  struct Level {
    std::unique_ptr<fft::RealTransform> work;
    std::vector<std::array<double, 2>> g_spectrum;
  };

  Level& level(std::size_t L) {
    auto it = levels_.find(L);
    if (it != levels_.end()) return it->second;
    Level lv;
    lv.work = std::make_unique<fft::RealTransform>(L);
    double* x = lv.work->real();
    for (std::size_t d = 0; d < L; ++d) x[d] = d > kHead ? g_[d] : 0.0;
    lv.work->forward();
    lv.g_spectrum.resize(lv.work->spectrum_size());
    for (std::size_t k = 0; k < lv.g_spectrum.size(); ++k) {
      lv.g_spectrum[k] = {lv.work->spectrum()[k][0], lv.work->spectrum()[k][1]};
    }
    return levels_.emplace(L, std::move(lv)).first->second;
  }

  void solve(std::size_t l, std::size_t r) {
    if (l > N_) return;
    if (r - l <= kHead) {
      base(l, r);
      return;
    }
    const std::size_t mid = l + (r - l) / 2;
    solve(l, mid);
    if (mid > kHead && mid <= N_) contribute(l, mid, r);
    solve(mid, r);
  }

  void contribute(std::size_t l, std::size_t mid, std::size_t r) {
    const std::size_t L = r - l;
    Level& lv = level(L);
    double* x = lv.work->real();
    for (std::size_t d = 0; d < L / 2; ++d) {
      const std::size_t k = l + d;
      x[d] = k >= kHead ? u_[k] : 0.0;
    }
    std::fill(x + L / 2, x + L, 0.0);
    lv.work->forward();
    fftw_complex* s = lv.work->spectrum();
    for (std::size_t k = 0; k < lv.g_spectrum.size(); ++k) {
      const double re = s[k][0] * lv.g_spectrum[k][0] - s[k][1] * lv.g_spectrum[k][1];
      const double im = s[k][0] * lv.g_spectrum[k][1] + s[k][1] * lv.g_spectrum[k][0];
      s[k][0] = re;
      s[k][1] = im;
    }
    lv.work->inverse();
    const double scale = 1.0 / static_cast<double>(L);
    const std::size_t hi = std::min(r, N_ + 1);
    for (std::size_t n = mid; n < hi; ++n) acc_[n] += x[n - l] * scale;
  }

  void base(std::size_t l, std::size_t r) {
    const std::size_t hi = std::min(r, N_ + 1);
    for (std::size_t n = l; n < hi; ++n) {
      if (n == 0) {
        u_[0] = 1.0;
        continue;
      }
      double near = 0.0;
      const std::size_t jmax = std::min(kHead, n);
      for (std::size_t j = 1; j <= jmax; ++j) near += g_[j] * u_[n - j];
      double head = 0.0;
      if (n > kHead) {
        const std::size_t kmax = std::min(kHead, n - kHead);
        for (std::size_t k = 0; k < kmax; ++k) head += u_[k] * g_[n - k];
      }
      u_[n] = acc_[n] + near + head;
    }
  }

  std::size_t N_;
  std::size_t P_;
  std::vector<double> g_, u_, acc_;
  std::map<std::size_t, Level> levels_;
};

}  // namespace detail

/// Same contract as renewal_direct in O(N log^2 N).
inline RenewalSequence renewal_fast(const TransientLaw& tl, std::size_t N, const RenewalOptions& opt = {}) {
  detail::check_capacity(N, opt);
  detail::OnlineRenewal engine(tl, N);
  return detail::finish(tl, engine.run());
}

/// R_n = sum_{j>n} u_j / ((1-p)^{-2} sum_{j>n} g_j), n = 0..N.
inline std::vector<double> diag_tailsum(const RenewalSequence& rs) {
  rs.law.base().require_power();
  const double scale = 1.0 / ((1.0 - rs.p()) * (1.0 - rs.p()));
  std::vector<double> out(rs.size());
  for (std::size_t n = 0; n < rs.size(); ++n) out[n] = rs.tail[n] / (scale * rs.law.defective_tail(n));
  return out;
}

/// r_n = u_n / ((1-p)^{-2} g_n), n = 1..N; entry 0 is NaN.
inline std::vector<double> diag_pointwise(const RenewalSequence& rs) {
  rs.law.base().require_power();
  const double scale = 1.0 / ((1.0 - rs.p()) * (1.0 - rs.p()));
  std::vector<double> out(rs.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t n = 1; n < rs.size(); ++n) out[n] = rs.u[n] / (scale * rs.law.g(n));
  return out;
}

/// CSV columns n,u_n,tail_u,ratio_pointwise,ratio_tailsum for the given rows.
inline void write_renewal_csv(std::ostream& os, const RenewalSequence& rs, const std::vector<std::size_t>& rows) {
  const bool diag = rs.law.base().has_tail_index();
  std::vector<double> rp, rt;
  if (diag) {
    rp = diag_pointwise(rs);
    rt = diag_tailsum(rs);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  os << "n,u_n,tail_u,ratio_pointwise,ratio_tailsum\n";
  char buf[200];
  for (std::size_t n : rows) {
    if (n >= rs.size()) continue;
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", n, rs.u[n], rs.tail[n], diag ? rp[n] : nan,
                  diag ? rt[n] : nan);
    os << buf;
  }
}

}  // namespace renewal_lab
