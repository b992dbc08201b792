#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fracvar/errors.hpp"
#include "fracvar/kernels.hpp"
#include "fracvar/sampler.hpp"
#include "fracvar/variation.hpp"

namespace fracvar {

struct Hypothesis {
  ProcessSpec spec;
  std::string label;
};

// Outcome of a two-hypothesis discrimination: per-hypothesis discrepancies
// between the observed statistic and each hypothesis's almost-sure limit,
// the argmin hypothesis, and the normalized margin |d1-d2| / max(d1,d2).
struct DiscriminationResult {
  std::array<std::string, 2> labels;
  std::array<double, 2> discrepancies{0.0, 0.0};
  std::string selected;
  double margin = 0.0;
  std::vector<StatisticResult> statistics;
  std::vector<std::string> warnings;
};

namespace detail {

// Argmin selection with a deterministic tie-break to the lexicographically
// smaller label (margin 0). Selection is invariant under scaling both
// discrepancies by a positive constant.
inline void select_hypothesis(DiscriminationResult& result) {
  const double d1 = result.discrepancies[0];
  const double d2 = result.discrepancies[1];
  const double hi = std::max(d1, d2);
  if (hi <= 0.0 || std::abs(d1 - d2) <= 1e-12 * hi) {
    result.selected = std::min(result.labels[0], result.labels[1]);
    result.margin = 0.0;
    return;
  }
  result.selected = d1 < d2 ? result.labels[0] : result.labels[1];
  result.margin = std::abs(d1 - d2) / hi;
}

inline double log_discrepancy(double value, double reference, const char* who) {
  if (!(value > 0.0) || !(reference > 0.0)) {
    throw DomainError(std::string(who) + ": log-scale comparison needs positive statistic and reference");
  }
  return std::abs(std::log(value) - std::log(reference));
}

}  // namespace detail

// Classifies one path between two bifractional hypotheses by the weighted-QV
// limit: under (H_i, K_i) the statistic with exponent 2 H_i K_i - 1 converges
// to 2^(1-K_i) T, so the hypothesis whose limit is closer on the log scale
// wins. The limit theorem needs K_1 != K_2 and equal gamma exponents; unequal
// gammas degrade the hypothesis but not the computation, so they only warn.
inline DiscriminationResult discriminate_bifbm(const PathSample& path,
                                               const Hypothesis& h1,
                                               const Hypothesis& h2) {
  validate(h1.spec);
  validate(h2.spec);
  if (h1.spec.family != ProcessFamily::BifBm || h2.spec.family != ProcessFamily::BifBm) {
    throw DomainError("discriminate_bifbm: both hypotheses must be bifractional");
  }
  if (std::abs(h1.spec.k - h2.spec.k) <= 1e-12) {
    throw HypothesesIndistinguishable(
        "discriminate_bifbm: K_1 = K_2, the separation hypothesis of the limit theorem fails");
  }

  DiscriminationResult result;
  result.labels = {h1.label, h2.label};

  const double g1 = gamma_exponent(h1.spec.hurst, h1.spec.k);
  const double g2 = gamma_exponent(h2.spec.hurst, h2.spec.k);
  double gamma = std::max(g1, g2);
  if (std::abs(g1 - g2) > 1e-12) {
    result.warnings.push_back("gamma exponents differ (" + std::to_string(g1) + " vs " +
                              std::to_string(g2) + "); proceeding with the larger one");
  }
  const std::size_t n = path.grid.intervals();
  if (n >= 4) {
    std::vector<double> norms;
    norms.reserve(n - 1);
    for (std::size_t m = 2; m <= n; ++m) {
      norms.push_back(path.grid.horizon / static_cast<double>(m));
    }
    if (!check_partition_schedule(norms, gamma)) {
      result.warnings.push_back("partition schedule advisory failed at gamma=" +
                                std::to_string(gamma));
    }
  }

  const Hypothesis* hyp[2] = {&h1, &h2};
  for (int i = 0; i < 2; ++i) {
    const ProcessSpec& spec = hyp[i]->spec;
    const double exponent = 2.0 * spec.hurst * spec.k - 1.0;
    StatisticResult stat = weighted_qv(path, exponent);
    stat.reference.reset();
    stat.rel_error.reset();
    stat.set_reference(std::pow(2.0, 1.0 - spec.k) * path.grid.horizon);
    result.discrepancies[i] =
        detail::log_discrepancy(stat.value, *stat.reference, "discriminate_bifbm");
    result.statistics.push_back(std::move(stat));
  }
  detail::select_hypothesis(result);
  return result;
}

// Classifies one dyadic path between two trifractional hypotheses with
// H_i K_i <= 1/2 and distinct products. Each hypothesis is scored at its own
// oracle-calibrated critical alpha against the exact expected statistic at
// the path's level, on the log scale.
inline DiscriminationResult discriminate_trifbm(const PathSample& path,
                                                const Hypothesis& h1,
                                                const Hypothesis& h2) {
  validate(h1.spec);
  validate(h2.spec);
  if (h1.spec.family != ProcessFamily::TrifBm || h2.spec.family != ProcessFamily::TrifBm) {
    throw DomainError("discriminate_trifbm: both hypotheses must be trifractional");
  }
  for (const Hypothesis* h : {&h1, &h2}) {
    if (h->spec.hurst * h->spec.k > 0.5 + 1e-12) {
      throw ParameterOutOfRange("discriminate_trifbm: requires H*K <= 1/2, got " +
                                std::to_string(h->spec.hurst * h->spec.k));
    }
  }
  if (std::abs(h1.spec.hurst * h1.spec.k - h2.spec.hurst * h2.spec.k) <= 1e-12) {
    throw HypothesesIndistinguishable(
        "discriminate_trifbm: H_1 K_1 = H_2 K_2, the separation hypothesis fails");
  }
  const int level = dyadic_level_of(path.grid);
  if (level < 8) {
    throw DomainError("discriminate_trifbm: dyadic level must be at least 8");
  }

  DiscriminationResult result;
  result.labels = {h1.label, h2.label};
  const double raw = detail::quadratic_variation(path);

  const Hypothesis* hyp[2] = {&h1, &h2};
  for (int i = 0; i < 2; ++i) {
    const ProcessSpec& spec = hyp[i]->spec;
    const TrifbmCalibration cal = calibrate_trifbm(spec.hurst, spec.k);
    const double scale = std::exp2(cal.critical_alpha * static_cast<double>(level));
    StatisticResult stat;
    stat.name = "scaled_dyadic_sum";
    stat.value = scale * raw;
    stat.meta = {{"alpha", cal.critical_alpha}, {"level", static_cast<double>(level)}};
    stat.set_reference(scale * expected_qv(spec, path.grid, 0.0));
    result.discrepancies[i] =
        detail::log_discrepancy(stat.value, *stat.reference, "discriminate_trifbm");
    result.statistics.push_back(std::move(stat));
  }
  detail::select_hypothesis(result);
  return result;
}

// Classifies one fBm path on a half-integer grid between two Hurst indices by
// the second-order increment statistic, whose limit is V_2(0, H). The
// statistic-space log distance is authoritative; the equivalent estimator-
// space rule is cross-checked and any disagreement is reported as a warning.
inline DiscriminationResult discriminate_fbm(const PathSample& path,
                                             const Hypothesis& h1,
                                             const Hypothesis& h2) {
  validate(h1.spec);
  validate(h2.spec);
  if (h1.spec.family != ProcessFamily::Fbm || h2.spec.family != ProcessFamily::Fbm) {
    throw DomainError("discriminate_fbm: both hypotheses must be fBm");
  }
  if (std::abs(h1.spec.hurst - h2.spec.hurst) <= 1e-12) {
    throw HypothesesIndistinguishable("discriminate_fbm: H_1 = H_2");
  }
  if (path.grid.size() < 3 || path.grid.size() % 2 == 0) {
    throw GridMismatch("discriminate_fbm: path must live on the half-integer grid of [0, n]");
  }
  const std::size_t n = (path.grid.size() - 1) / 2;
  const StatisticResult stat = kurchenko_statistic(path, n);

  DiscriminationResult result;
  result.labels = {h1.label, h2.label};
  const double limits[2] = {v_k_constant(2, 0.0, h1.spec.hurst),
                            v_k_constant(2, 0.0, h2.spec.hurst)};
  for (int i = 0; i < 2; ++i) {
    StatisticResult s = stat;
    s.reference.reset();
    s.rel_error.reset();
    s.set_reference(limits[i]);
    result.discrepancies[i] = detail::log_discrepancy(s.value, limits[i], "discriminate_fbm");
    result.statistics.push_back(std::move(s));
  }
  detail::select_hypothesis(result);

  // Estimator-space cross-check: argmin of |H_hat - H_i| must agree.
  if (stat.value > 0.0 && stat.value < 3.0) {
    const double h_hat = estimate_hurst_v2(stat.value);
    const double e1 = std::abs(h_hat - h1.spec.hurst);
    const double e2 = std::abs(h_hat - h2.spec.hurst);
    const std::string alt = e1 < e2 ? h1.label : (e2 < e1 ? h2.label : std::min(h1.label, h2.label));
    if (alt != result.selected && result.margin > 0.0) {
      result.warnings.push_back(
          "estimator-space rule disagrees; statistic-space selection kept");
    }
  } else {
    result.warnings.push_back("statistic outside (0,3); estimator-space cross-check skipped");
  }
  return result;
}

inline DiscriminationResult discriminate_fbm(const PathSample& path, double hurst1,
                                             double hurst2) {
  return discriminate_fbm(path, Hypothesis{ProcessSpec::fbm(hurst1), "H1"},
                          Hypothesis{ProcessSpec::fbm(hurst2), "H2"});
}

struct PowerStudyResult {
  double rate = 0.0;           // fraction of paths whose selection matched the truth
  std::string truth_label;
  std::vector<DiscriminationResult> records;  // ordered by seed index
};

// Samples `paths` independent paths of the truth process (seeds base_seed,
// base_seed+1, ...) and runs the family's discriminator on each. fBm truths
// on dyadic grids go through the circulant fast path; everything else factors
// the kernel once and reuses it.
inline PowerStudyResult power_study(const ProcessSpec& truth, const Hypothesis& h1,
                                    const Hypothesis& h2, std::size_t paths,
                                    std::uint64_t base_seed, const Grid& grid) {
  validate(truth);
  if (paths == 0) throw DomainError("power_study: paths must be positive");
  if (h1.spec.family != truth.family || h2.spec.family != truth.family) {
    throw DomainError("power_study: hypotheses must match the truth's process family");
  }
  if (h1.label == h2.label) throw DomainError("power_study: hypothesis labels must differ");
  const bool truth_is_h1 = same_spec(truth, h1.spec);
  if (!truth_is_h1 && !same_spec(truth, h2.spec)) {
    throw DomainError("power_study: truth must equal one of the hypotheses");
  }

  PowerStudyResult out;
  out.truth_label = truth_is_h1 ? h1.label : h2.label;

  const int level = dyadic_level_of(grid);
  const bool circulant = truth.family == ProcessFamily::Fbm && level >= 1 &&
                         level <= kCirculantLevelCap;

  auto classify = [&](const PathSample& path) {
    switch (truth.family) {
      case ProcessFamily::Fbm: return discriminate_fbm(path, h1, h2);
      case ProcessFamily::BifBm: return discriminate_bifbm(path, h1, h2);
      case ProcessFamily::TrifBm: return discriminate_trifbm(path, h1, h2);
      default:
        throw DomainError("power_study: no discriminator for this process family");
    }
  };

  std::size_t hits = 0;
  if (circulant) {
    for (std::size_t i = 0; i < paths; ++i) {
      const PathSample path =
          sample_fbm_circulant(truth.hurst, level, grid.horizon, base_seed + i);
      DiscriminationResult r = classify(path);
      if (r.selected == out.truth_label) ++hits;
      out.records.push_back(std::move(r));
    }
  } else {
    CholeskySampler sampler(truth, grid);
    for (std::size_t i = 0; i < paths; ++i) {
      DiscriminationResult r = classify(sampler.draw(base_seed + i));
      if (r.selected == out.truth_label) ++hits;
      out.records.push_back(std::move(r));
    }
  }
  out.rate = static_cast<double>(hits) / static_cast<double>(paths);
  return out;
}

}  // namespace fracvar
