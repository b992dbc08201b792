#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracvar/errors.hpp"
#include "fracvar/grid.hpp"
#include "fracvar/kernels.hpp"
#include "fracvar/sampler.hpp"
#include "fracvar/sum.hpp"

namespace fracvar {

// A computed statistic together with its theoretical reference value, when
// the limit theorems provide one. Statistics whose stated limit is infinite
// carry no reference and set divergent_expected instead.
struct StatisticResult {
  std::string name;
  double value = 0.0;
  std::optional<double> reference;
  std::optional<double> rel_error;
  bool divergent_expected = false;
  std::map<std::string, double> meta;

  void set_reference(double ref) {
    reference = ref;
    if (ref != 0.0) rel_error = std::abs(value - ref) / std::abs(ref);
  }
};

// k-th order increment sum_i (-1)^i C(k,i) f(t + (i/k) h) over values sampled
// on a uniform grid; the k+1 evaluation points are start, start+step, ...
inline double kth_increment(std::span<const double> values, int k,
                            std::size_t start_index, std::size_t step) {
  if (k < 1) throw DomainError("kth_increment: k must be a positive integer");
  if (step < 1) throw DomainError("kth_increment: step must be positive");
  const std::size_t last = start_index + static_cast<std::size_t>(k) * step;
  if (values.empty() || last >= values.size()) {
    throw IndexError("kth_increment: evaluation points fall off the grid");
  }
  double binom = 1.0;
  double acc = 0.0;
  for (int i = 0; i <= k; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    acc += sign * binom * values[start_index + static_cast<std::size_t>(i) * step];
    binom = binom * static_cast<double>(k - i) / static_cast<double>(i + 1);
  }
  return acc;
}

// V_k(m, H) = 1/2 sum_{i,j=0}^k (-1)^{i+j+1} C(k,i) C(k,j) |m + (i-j)/k|^{2H}.
// This is the mean square of the k-th order increment of an fBm at lag m;
// V_2(0,H) = 2^{2-2H} - 1.
inline double v_k_constant(int k, double m, double hurst) {
  if (k < 1) throw ParameterOutOfRange("v_k_constant: k must be a positive integer");
  if (!(m >= 0.0)) throw ParameterOutOfRange("v_k_constant: m must be nonnegative");
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw ParameterOutOfRange("v_k_constant: H must satisfy 0 < H < 1");
  }
  std::vector<double> binom(static_cast<std::size_t>(k) + 1);
  binom[0] = 1.0;
  for (int i = 0; i < k; ++i) {
    binom[i + 1] = binom[i] * static_cast<double>(k - i) / static_cast<double>(i + 1);
  }
  KahanSum acc;
  for (int i = 0; i <= k; ++i) {
    for (int j = 0; j <= k; ++j) {
      const double sign = ((i + j + 1) % 2 == 0) ? 1.0 : -1.0;
      const double lag = std::abs(m + static_cast<double>(i - j) / static_cast<double>(k));
      acc.add(sign * binom[i] * binom[j] * std::pow(lag, 2.0 * hurst));
    }
  }
  return 0.5 * acc.value();
}

namespace detail {

inline int require_dyadic(const PathSample& path, const char* who) {
  const int level = dyadic_level_of(path.grid);
  if (level < 0) {
    throw DomainError(std::string(who) + ": path grid must be dyadic (uniform, 2^n intervals from 0)");
  }
  return level;
}

inline double quadratic_variation(const PathSample& path) {
  KahanSum acc;
  for (std::size_t i = 1; i < path.values.size(); ++i) {
    const double d = path.values[i] - path.values[i - 1];
    acc.add(d * d);
  }
  return acc.value();
}

}  // namespace detail

// sum_k |X(t_k) - X(t_{k-1})|^p over a dyadic grid. For an fBm path the
// reference is the p-variation trichotomy: 0 when pH > 1, T when pH = 1,
// divergent when pH < 1.
inline StatisticResult p_variation_sum(const PathSample& path, double p) {
  if (!(p > 0.0)) throw DomainError("p_variation_sum: p must be positive");
  const int level = detail::require_dyadic(path, "p_variation_sum");
  KahanSum acc;
  for (std::size_t i = 1; i < path.values.size(); ++i) {
    const double d = path.values[i] - path.values[i - 1];
    acc.add(p == 2.0 ? d * d : std::pow(std::abs(d), p));
  }
  StatisticResult res;
  res.name = "p_variation";
  res.value = acc.value();
  res.meta = {{"p", p},
              {"level", static_cast<double>(level)},
              {"n", static_cast<double>(path.grid.intervals())}};
  if (path.spec.family == ProcessFamily::Fbm) {
    const double ph = p * path.spec.hurst;
    if (std::abs(ph - 1.0) <= 1e-12) {
      res.set_reference(path.grid.horizon);
    } else if (ph > 1.0) {
      res.set_reference(0.0);
    } else {
      res.divergent_expected = true;
    }
  }
  return res;
}

// sum_k (X(t_k) - X(t_{k-1}))^2 / (t_k - t_{k-1})^w. With w = 2HK - 1 and a
// bifractional path the reference is the weighted-QV limit 2^{1-K} T; the
// K = 1 boundary is the fBm case with reference T.
inline StatisticResult weighted_qv(const PathSample& path, double weight_exponent) {
  if (path.grid.size() < 2) throw DomainError("weighted_qv: degenerate grid");
  KahanSum acc;
  for (std::size_t i = 1; i < path.values.size(); ++i) {
    const double d = path.values[i] - path.values[i - 1];
    const double dt = path.grid.points[i] - path.grid.points[i - 1];
    acc.add((d * d) * std::pow(dt, -weight_exponent));
  }
  StatisticResult res;
  res.name = "weighted_qv";
  res.value = acc.value();
  res.meta = {{"weight_exponent", weight_exponent},
              {"n", static_cast<double>(path.grid.intervals())}};
  const ProcessSpec& spec = path.spec;
  if (spec.family == ProcessFamily::BifBm &&
      std::abs(weight_exponent - (2.0 * spec.hurst * spec.k - 1.0)) <= 1e-9) {
    res.set_reference(std::pow(2.0, 1.0 - spec.k) * path.grid.horizon);
  } else if (spec.family == ProcessFamily::Fbm &&
             std::abs(weight_exponent - (2.0 * spec.hurst - 1.0)) <= 1e-9) {
    res.set_reference(path.grid.horizon);
  }
  return res;
}

// Exact expectation of sum_k scale * (dt_k)^(-w) (X(t_k) - X(t_{k-1}))^2 for
// the centered Gaussian path of `spec`: each increment variance comes straight
// from the kernel, no sampling involved.
inline double expected_qv(const ProcessSpec& spec, const Grid& grid,
                          double weight_exponent, double scale = 1.0) {
  validate(spec);
  if (grid.size() < 2) throw DomainError("expected_qv: degenerate grid");
  KahanSum acc;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double a = grid.points[i - 1];
    const double b = grid.points[i];
    const double inc_var = covariance(spec, b, b) + covariance(spec, a, a) -
                           2.0 * covariance(spec, a, b);
    acc.add(scale * inc_var * std::pow(b - a, -weight_exponent));
  }
  return acc.value();
}

// Oracle calibration of the trifractional critical scaling. The expected
// dyadic QV of [0,1] decays geometrically level by level; the per-level log2
// drop is the critical alpha, and 2^(alpha n) E_n at the finest level is the
// stabilized limit the scaled sum is compared against.
struct TrifbmCalibration {
  double hurst = 0.0;
  double k = 0.0;
  int min_level = 0;
  int max_level = 0;
  double critical_alpha = 0.0;
  double limit = 0.0;
  std::vector<double> log2_expected;  // log2 E_level, level = min_level..max_level
};

inline TrifbmCalibration calibrate_trifbm(double hurst, double k, int min_level = 10,
                                          int max_level = 15) {
  const ProcessSpec spec = ProcessSpec::trifbm(hurst, k);
  validate(spec);
  if (min_level < 2 || max_level <= min_level || max_level > 18) {
    throw DomainError("calibrate_trifbm: need 2 <= min_level < max_level <= 18");
  }
  TrifbmCalibration cal;
  cal.hurst = hurst;
  cal.k = k;
  cal.min_level = min_level;
  cal.max_level = max_level;
  for (int level = min_level; level <= max_level; ++level) {
    const Grid g = uniform_grid(1.0, std::size_t{1} << level);
    cal.log2_expected.push_back(std::log2(expected_qv(spec, g, 0.0)));
  }
  const std::size_t last = cal.log2_expected.size() - 1;
  cal.critical_alpha = cal.log2_expected[last - 1] - cal.log2_expected[last];
  cal.limit = std::exp2(cal.critical_alpha * static_cast<double>(max_level) +
                        cal.log2_expected[last]);
  return cal;
}

// 2^(alpha n) sum_k (X(k T/2^n) - X((k-1) T/2^n))^2 on a dyadic level-n grid.
// For a trifractional path with HK <= 1/2 the critical exponent and limit come
// from the oracle calibration above; away from the critical alpha the
// reference follows the trichotomy (0 below, divergent above). For HK > 1/2
// the critical exponent is 1 and no finite limit value is claimed there.
inline StatisticResult scaled_dyadic_sum(const PathSample& path, double alpha) {
  const int level = detail::require_dyadic(path, "scaled_dyadic_sum");
  const double raw = detail::quadratic_variation(path);
  StatisticResult res;
  res.name = "scaled_dyadic_sum";
  res.value = std::exp2(alpha * static_cast<double>(level)) * raw;
  res.meta = {{"alpha", alpha}, {"level", static_cast<double>(level)}};
  if (path.spec.family == ProcessFamily::TrifBm) {
    const double hk = path.spec.hurst * path.spec.k;
    if (hk <= 0.5 + 1e-12) {
      const TrifbmCalibration cal = calibrate_trifbm(path.spec.hurst, path.spec.k);
      if (std::abs(alpha - cal.critical_alpha) <= 1e-6) {
        res.set_reference(cal.limit);
      } else if (alpha < cal.critical_alpha) {
        res.set_reference(0.0);
      } else {
        res.divergent_expected = true;
      }
    } else {
      if (alpha < 1.0) {
        res.set_reference(0.0);
      } else if (alpha > 1.0) {
        res.divergent_expected = true;
      }
    }
  }
  return res;
}

// (1/n) sum_{m=0}^{n-1} [X(m) - 2X(m+1/2) + X(m+1)]^2 for an fBm sampled on
// the half-integer grid of [0, n]; the almost-sure limit is V_2(0, H).
inline StatisticResult kurchenko_statistic(const PathSample& path, std::size_t n) {
  if (path.spec.family != ProcessFamily::Fbm) {
    throw DomainError("kurchenko_statistic: path spec must be an fBm");
  }
  if (n == 0) throw DomainError("kurchenko_statistic: n must be positive");
  if (path.grid.size() != 2 * n + 1) {
    throw GridMismatch("kurchenko_statistic: grid must be {i/2 : i = 0..2n}");
  }
  for (std::size_t i = 0; i < path.grid.size(); ++i) {
    if (std::abs(path.grid.points[i] - 0.5 * static_cast<double>(i)) > 1e-9) {
      throw GridMismatch("kurchenko_statistic: grid must be {i/2 : i = 0..2n}");
    }
  }
  KahanSum acc;
  for (std::size_t m = 0; m < n; ++m) {
    const double d = path.values[2 * m] - 2.0 * path.values[2 * m + 1] +
                     path.values[2 * m + 2];
    acc.add(d * d);
  }
  StatisticResult res;
  res.name = "kurchenko";
  res.value = acc.value() / static_cast<double>(n);
  res.meta = {{"n", static_cast<double>(n)}, {"H", path.spec.hurst}};
  res.set_reference(v_k_constant(2, 0.0, path.spec.hurst));
  return res;
}

// Inverts V_2(0, H) = 2^(2-2H) - 1: H = (2 - log2(statistic + 1)) / 2. The
// statistic must lie in the range (0, 3) of V_2(0, .) on H in (0, 1).
inline double estimate_hurst_v2(double statistic) {
  if (!(statistic > 0.0 && statistic < 3.0)) {
    throw OutOfRange("estimate_hurst_v2: statistic must lie in (0, 3)");
  }
  return (2.0 - std::log2(statistic + 1.0)) / 2.0;
}

}  // namespace fracvar
