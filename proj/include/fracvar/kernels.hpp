#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fracvar/errors.hpp"
#include "fracvar/grid.hpp"
#include "fracvar/sum.hpp"

namespace fracvar {

enum class ProcessFamily { Fbm, BifBm, TrifBm, NthFbm };

inline const char* family_name(ProcessFamily f) {
  switch (f) {
    case ProcessFamily::Fbm: return "fbm";
    case ProcessFamily::BifBm: return "bifbm";
    case ProcessFamily::TrifBm: return "trifbm";
    case ProcessFamily::NthFbm: return "nfbm";
  }
  return "?";
}

// One of the four centered Gaussian process families, identified by its
// covariance kernel parameters: H alone (fBm), (H, K) (bifractional and
// trifractional), or (n, H) with n-1 < H < n (n-th order fBm).
struct ProcessSpec {
  ProcessFamily family = ProcessFamily::Fbm;
  double hurst = 0.5;
  double k = 1.0;   // BifBm / TrifBm only
  int order = 1;    // NthFbm only

  static ProcessSpec fbm(double hurst) { return {ProcessFamily::Fbm, hurst, 1.0, 1}; }
  static ProcessSpec bifbm(double hurst, double k) {
    return {ProcessFamily::BifBm, hurst, k, 1};
  }
  static ProcessSpec trifbm(double hurst, double k) {
    return {ProcessFamily::TrifBm, hurst, k, 1};
  }
  static ProcessSpec nth_fbm(int order, double hurst) {
    return {ProcessFamily::NthFbm, hurst, 1.0, order};
  }
};

inline bool same_spec(const ProcessSpec& a, const ProcessSpec& b) {
  if (a.family != b.family) return false;
  switch (a.family) {
    case ProcessFamily::Fbm: return a.hurst == b.hurst;
    case ProcessFamily::BifBm:
    case ProcessFamily::TrifBm: return a.hurst == b.hurst && a.k == b.k;
    case ProcessFamily::NthFbm: return a.hurst == b.hurst && a.order == b.order;
  }
  return false;
}

inline void validate(const ProcessSpec& spec) {
  const double H = spec.hurst;
  const double K = spec.k;
  switch (spec.family) {
    case ProcessFamily::Fbm:
      if (!(H > 0.0 && H < 1.0)) {
        throw ParameterOutOfRange("fbm: H must satisfy 0 < H < 1, got H=" +
                                  std::to_string(H));
      }
      return;
    case ProcessFamily::BifBm: {
      if (!(H > 0.0 && H < 1.0)) {
        throw ParameterOutOfRange("bifbm: H must satisfy 0 < H < 1, got H=" +
                                  std::to_string(H));
      }
      const bool base_range = K > 0.0 && K <= 1.0;
      const bool extended_range = K > 1.0 && K < 2.0 && H * K < 1.0;
      if (!base_range && !extended_range) {
        throw ParameterOutOfRange(
            "bifbm: need 0 < K <= 1, or 1 < K < 2 with H*K < 1; got K=" +
            std::to_string(K) + ", H*K=" + std::to_string(H * K));
      }
      return;
    }
    case ProcessFamily::TrifBm:
      if (!(H > 0.0 && H < 1.0)) {
        throw ParameterOutOfRange("trifbm: H must satisfy 0 < H < 1, got H=" +
                                  std::to_string(H));
      }
      if (!(K > 0.0 && K < 1.0)) {
        throw ParameterOutOfRange(
            K == 1.0 ? "trifbm: K = 1 gives the identically-zero kernel"
                     : "trifbm: K must satisfy 0 < K < 1, got K=" + std::to_string(K));
      }
      return;
    case ProcessFamily::NthFbm:
      if (spec.order < 1) {
        throw ParameterOutOfRange("nfbm: order must be a positive integer");
      }
      if (!(H > spec.order - 1 && H < spec.order)) {
        throw ParameterOutOfRange("nfbm: H must satisfy n-1 < H < n, got H=" +
                                  std::to_string(H) + " with n=" +
                                  std::to_string(spec.order));
      }
      return;
  }
  throw ParameterOutOfRange("unknown process family");
}

namespace detail {

// Raw kernel formulas, no validation and no boundary convention. Tests probe
// these directly (cancellation and degeneracy checks).

inline double fbm_cov(double H, double s, double t) {
  const double e = 2.0 * H;
  return 0.5 * (std::pow(s, e) + std::pow(t, e) - std::pow(std::abs(t - s), e));
}

inline double bifbm_cov(double H, double K, double s, double t) {
  const double e = 2.0 * H;
  return std::pow(2.0, -K) * (std::pow(std::pow(s, e) + std::pow(t, e), K) -
                              std::pow(std::abs(t - s), e * K));
}

inline double trifbm_cov(double H, double K, double s, double t) {
  const double e = 2.0 * H;
  const double ek = e * K;
  return std::pow(s, ek) + std::pow(t, ek) - std::pow(std::pow(s, e) + std::pow(t, e), K);
}

// Generalized binomial coefficient (a choose j) via the product formula.
inline double generalized_binomial(double a, int j) {
  double r = 1.0;
  for (int i = 1; i <= j; ++i) {
    r *= (a - static_cast<double>(j - i)) / static_cast<double>(i);
  }
  return r;
}

// Normalizing constant of the n-th order kernel, 1 / (Gamma(2H+1) |sin(pi H)|).
inline double nth_fbm_scale(double H) {
  return 1.0 / (std::tgamma(2.0 * H + 1.0) * std::abs(std::sin(std::numbers::pi * H)));
}

inline double nth_fbm_cov(int n, double H, double s, double t) {
  const double e = 2.0 * H;
  const double s_e = std::pow(s, e);
  const double t_e = std::pow(t, e);
  double series = 0.0;
  for (int j = 0; j < n; ++j) {
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    series += sign * generalized_binomial(e, j) *
              (std::pow(t / s, j) * s_e + std::pow(s / t, j) * t_e);
  }
  const double inner = std::pow(std::abs(t - s), e) - series;
  const double parity = (n % 2 == 0) ? 1.0 : -1.0;
  return parity * 0.5 * nth_fbm_scale(H) * inner;
}

}  // namespace detail

// Covariance kernel value at (s, t). All four families start from zero, so
// the s=0 / t=0 boundary is pinned to exactly 0 (for NthFbm this is the
// continuous limit; for the others it is the algebraic value).
inline double covariance(const ProcessSpec& spec, double s, double t) {
  validate(spec);
  if (s < 0.0 || t < 0.0) throw DomainError("covariance: times must be nonnegative");
  if (s == 0.0 || t == 0.0) return 0.0;
  switch (spec.family) {
    case ProcessFamily::Fbm: return detail::fbm_cov(spec.hurst, s, t);
    case ProcessFamily::BifBm: return detail::bifbm_cov(spec.hurst, spec.k, s, t);
    case ProcessFamily::TrifBm: return detail::trifbm_cov(spec.hurst, spec.k, s, t);
    case ProcessFamily::NthFbm: return detail::nth_fbm_cov(spec.order, spec.hurst, s, t);
  }
  throw ParameterOutOfRange("unknown process family");
}

// Kernel matrix over a grid of strictly positive times. The t=0 point is the
// sampler's business, not the matrix's: a zero row/column would make the
// factorization singular. Upper triangle is computed and mirrored, so the
// result is symmetric by construction and entry (i,j), i<=j, is bitwise equal
// to covariance(spec, g_i, g_j).
inline Eigen::MatrixXd covariance_matrix(const ProcessSpec& spec,
                                         const Grid& grid) {
  validate(spec);
  const auto& pts = grid.points;
  const auto n = static_cast<Eigen::Index>(pts.size());
  for (double p : pts) {
    if (!(p > 0.0)) throw DomainError("covariance_matrix: grid points must be positive");
  }
  Eigen::MatrixXd m(n, n);
  const double e = 2.0 * spec.hurst;

  switch (spec.family) {
    case ProcessFamily::Fbm: {
      std::vector<double> pe(pts.size());
      for (std::size_t i = 0; i < pts.size(); ++i) pe[i] = std::pow(pts[i], e);
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
          m(i, j) = 0.5 * (pe[i] + pe[j] - std::pow(std::abs(pts[j] - pts[i]), e));
        }
      }
      break;
    }
    case ProcessFamily::BifBm: {
      const double K = spec.k;
      const double scale = std::pow(2.0, -K);
      std::vector<double> pe(pts.size());
      for (std::size_t i = 0; i < pts.size(); ++i) pe[i] = std::pow(pts[i], e);
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
          m(i, j) = scale * (std::pow(pe[i] + pe[j], K) -
                             std::pow(std::abs(pts[j] - pts[i]), e * K));
        }
      }
      break;
    }
    case ProcessFamily::TrifBm: {
      const double K = spec.k;
      std::vector<double> pe(pts.size()), pek(pts.size());
      for (std::size_t i = 0; i < pts.size(); ++i) {
        pe[i] = std::pow(pts[i], e);
        pek[i] = std::pow(pts[i], e * K);
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
          m(i, j) = pek[i] + pek[j] - std::pow(pe[i] + pe[j], K);
        }
      }
      break;
    }
    case ProcessFamily::NthFbm: {
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
          m(i, j) = detail::nth_fbm_cov(spec.order, spec.hurst, pts[i], pts[j]);
        }
      }
      break;
    }
  }
  m.triangularView<Eigen::StrictlyLower>() = m.transpose();
  return m;
}

// Partition-norm exponent of the bifractional weighted-QV limit theorem:
// gamma = max(1/(2-2HK), 1) for K in (0,1], 1/(min(1,2H)+1-2HK) for K in (1,2).
// The theorem skips K=1; the first branch reproduces the fBm condition there.
inline double gamma_exponent(double hurst, double k) {
  validate(ProcessSpec::bifbm(hurst, k));
  const double hk = hurst * k;
  if (k <= 1.0) return std::max(1.0 / (2.0 - 2.0 * hk), 1.0);
  return 1.0 / (std::min(1.0, 2.0 * hurst) + 1.0 - 2.0 * hk);
}

inline std::vector<double> default_jump_schedule() {
  return {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7};
}

struct JumpEstimate {
  double value = 0.0;          // last (finest-h) estimate of D^- - D^+
  bool converged = false;
  std::vector<double> estimates;  // one per schedule entry
};

// Estimates the jump f_r(t) = D^-(t) - D^+(t) of the one-sided derivatives of
// s -> r(s,t) at s=t by difference quotients [r(t,t)-r(s,t)]/(t-s) along a
// decreasing h schedule. Flagged divergent when the magnitudes grow
// monotonically by more than a factor of 2 between consecutive h's, which is
// how a |t-s|^(2H-1), H < 1/2, blow-up presents at desk precision.
inline JumpEstimate baxter_jump(const ProcessSpec& spec, double t,
                                std::vector<double> h_schedule = default_jump_schedule()) {
  validate(spec);
  if (h_schedule.empty()) throw DomainError("baxter_jump: empty h schedule");
  for (std::size_t i = 1; i < h_schedule.size(); ++i) {
    if (!(h_schedule[i] < h_schedule[i - 1])) {
      throw DomainError("baxter_jump: h schedule must be strictly decreasing");
    }
  }
  if (!(h_schedule.back() > 0.0)) throw DomainError("baxter_jump: h must be positive");
  if (!(t > h_schedule.front())) {
    throw DomainError("baxter_jump: t - h leaves the domain; t must exceed max h");
  }

  JumpEstimate out;
  const double rtt = covariance(spec, t, t);
  for (double h : h_schedule) {
    const double d_minus = (rtt - covariance(spec, t - h, t)) / h;
    const double d_plus = (rtt - covariance(spec, t + h, t)) / (-h);
    out.estimates.push_back(d_minus - d_plus);
  }
  bool growing = out.estimates.size() > 1;
  for (std::size_t i = 1; i < out.estimates.size(); ++i) {
    if (!(std::abs(out.estimates[i]) > 2.0 * std::abs(out.estimates[i - 1]))) {
      growing = false;
      break;
    }
  }
  out.value = out.estimates.back();
  out.converged = !growing;
  return out;
}

// Midpoint-rule quadrature of the pointwise jump estimates over [a, b]. The
// almost-sure quadratic variation of the process over [a,b] equals this
// integral for kernels where the jump estimate converges.
inline double baxter_integral(const ProcessSpec& spec, double a, double b,
                              std::size_t panels = 256,
                              std::vector<double> h_schedule = default_jump_schedule()) {
  validate(spec);
  if (!(a > 0.0 && b > a)) throw DomainError("baxter_integral: need 0 < a < b");
  if (panels < 1) throw DomainError("baxter_integral: need at least one panel");
  const double dx = (b - a) / static_cast<double>(panels);
  KahanSum acc;
  for (std::size_t i = 0; i < panels; ++i) {
    const double mid = a + (static_cast<double>(i) + 0.5) * dx;
    const JumpEstimate jump = baxter_jump(spec, mid, h_schedule);
    if (!jump.converged) {
      throw DivergentJump("baxter_integral: jump estimate diverges at t=" +
                          std::to_string(mid));
    }
    acc.add(jump.value * dx);
  }
  return acc.value();
}

}  // namespace fracvar
