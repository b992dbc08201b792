#include <algorithm>
#include <catch2/catch.hpp>
#include <cmath>
#include <vector>

#include "fracvar/sampler.hpp"
#include "fracvar/variation.hpp"

using namespace fracvar;

namespace {

// Test-side oracle: expected weighted QV summed directly from the raw kernel,
// independent of expected_qv's code path.
double oracle_expected_qv(const ProcessSpec& spec, const Grid& grid, double we) {
  auto cov = [&](double s, double t) -> double {
    if (s == 0.0 || t == 0.0) return 0.0;
    switch (spec.family) {
      case ProcessFamily::Fbm: return detail::fbm_cov(spec.hurst, s, t);
      case ProcessFamily::BifBm: return detail::bifbm_cov(spec.hurst, spec.k, s, t);
      case ProcessFamily::TrifBm: return detail::trifbm_cov(spec.hurst, spec.k, s, t);
      default: return detail::nth_fbm_cov(spec.order, spec.hurst, s, t);
    }
  };
  double acc = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double a = grid.points[i - 1];
    const double b = grid.points[i];
    acc += (cov(b, b) + cov(a, a) - 2.0 * cov(a, b)) * std::pow(b - a, -we);
  }
  return acc;
}

// Test-side oracle: E[f(t) - 2 f(t+1/2) + f(t+1)]^2 as the quadratic form
// c' C c of the fbm kernel, independent of the V_k double-sum route.
double oracle_second_increment_meansq(double hurst, double t) {
  const double pts[3] = {t, t + 0.5, t + 1.0};
  const double coef[3] = {1.0, -2.0, 1.0};
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double c = (pts[i] == 0.0 || pts[j] == 0.0)
                           ? 0.0
                           : detail::fbm_cov(hurst, pts[i], pts[j]);
      acc += coef[i] * coef[j] * c;
    }
  }
  return acc;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

PathSample deterministic_path(std::vector<double> pts, std::vector<double> vals,
                              ProcessSpec spec = ProcessSpec::fbm(0.5)) {
  PathSample p;
  p.grid = make_grid(std::move(pts));
  p.values = std::move(vals);
  p.spec = spec;
  p.seed = 0;
  return p;
}

}  // namespace

TEST_CASE("kth_increment") {
  // second differences annihilate affine functions
  const std::vector<double> affine = {1.0, 1.5, 2.0, 2.5, 3.0};
  REQUIRE(kth_increment(affine, 2, 0, 1) == 0.0);
  REQUIRE(kth_increment(affine, 2, 0, 2) == 0.0);
  // f(t) = t^2 on {0, 1/2, 1}: 0 - 2/4 + 1 = 1/2
  const std::vector<double> square = {0.0, 0.25, 1.0};
  REQUIRE(kth_increment(square, 2, 0, 1) == Approx(0.5));
  // k = 1 is the forward difference up to the sign the increment definition
  // carries: sum_i (-1)^i C(1,i) f = f(t) - f(t+h)
  REQUIRE(kth_increment(square, 1, 1, 1) == Approx(-0.75));
  REQUIRE_THROWS_AS(kth_increment(square, 2, 1, 1), IndexError);
  REQUIRE_THROWS_AS(kth_increment(square, 0, 0, 1), DomainError);
}

TEST_CASE("v_k_constant closed form sweep") {
  // V_2(0,H) = 2^(2-2H) - 1 on a 99-point sweep, max deviation <= 1e-12
  for (int i = 1; i <= 99; ++i) {
    const double h = i / 100.0;
    REQUIRE(std::abs(v_k_constant(2, 0.0, h) - (std::pow(2.0, 2.0 - 2.0 * h) - 1.0)) <=
            1e-12);
  }
  REQUIRE(v_k_constant(2, 0.0, 0.5) == Approx(1.0).epsilon(1e-13));
  REQUIRE(v_k_constant(2, 0.0, 0.75) == Approx(0.41421356237309515).epsilon(1e-12));
  REQUIRE_THROWS_AS(v_k_constant(0, 0.0, 0.5), ParameterOutOfRange);
  REQUIRE_THROWS_AS(v_k_constant(2, -1.0, 0.5), ParameterOutOfRange);
  REQUIRE_THROWS_AS(v_k_constant(2, 0.0, 1.0), ParameterOutOfRange);
}

TEST_CASE("v_k_constant equals the kernel quadratic form") {
  for (double h : {0.3, 0.5, 0.7}) {
    for (double t : {0.0, 1.0, 3.0}) {
      REQUIRE(oracle_second_increment_meansq(h, t) ==
              Approx(v_k_constant(2, 0.0, h)).epsilon(1e-10));
    }
  }
}

TEST_CASE("p_variation_sum") {
  SECTION("deterministic arithmetic") {
    const auto p = deterministic_path({0.0, 0.25, 0.5, 0.75, 1.0}, {0.0, 1.0, 0.0, 1.0, 0.0});
    REQUIRE(p_variation_sum(p, 2.0).value == 4.0);
    REQUIRE(p_variation_sum(p, 1.0).value == 4.0);
  }
  SECTION("grid and p validation") {
    const auto bad = deterministic_path({0.0, 0.3, 1.0}, {0.0, 1.0, 0.0});
    REQUIRE_THROWS_AS(p_variation_sum(bad, 2.0), DomainError);
    const auto ok = deterministic_path({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0});
    REQUIRE_THROWS_AS(p_variation_sum(ok, 0.0), DomainError);
  }
  SECTION("fbm reference trichotomy") {
    const auto mk = [](double hurst) {
      PathSample p;
      p.grid = dyadic_grid(2.0, 3);
      p.values.assign(9, 0.0);
      p.spec = ProcessSpec::fbm(hurst);
      return p;
    };
    const StatisticResult zero = p_variation_sum(mk(0.7), 2.0);  // pH = 1.4
    REQUIRE(zero.reference == 0.0);
    REQUIRE_FALSE(zero.rel_error.has_value());
    REQUIRE_FALSE(zero.divergent_expected);
    const StatisticResult qv = p_variation_sum(mk(0.5), 2.0);  // pH = 1
    REQUIRE(qv.reference == 2.0);
    const StatisticResult div = p_variation_sum(mk(0.3), 2.0);  // pH = 0.6
    REQUIRE_FALSE(div.reference.has_value());
    REQUIRE(div.divergent_expected);
  }
}

TEST_CASE("weighted_qv") {
  SECTION("exponent 0 equals p-variation with p=2 bit for bit") {
    const PathSample p = sample_fbm_circulant(0.35, 8, 1.0, 3);
    REQUIRE(weighted_qv(p, 0.0).value == p_variation_sum(p, 2.0).value);
  }
  SECTION("bifbm reference at the matching exponent") {
    PathSample p;
    p.grid = uniform_grid(2.0, 8);
    p.values.assign(9, 0.0);
    p.spec = ProcessSpec::bifbm(0.6, 0.5);
    const StatisticResult r = weighted_qv(p, 2.0 * 0.6 * 0.5 - 1.0);
    REQUIRE(r.reference == Approx(std::pow(2.0, 0.5) * 2.0).epsilon(1e-13));
    REQUIRE_FALSE(weighted_qv(p, 0.1).reference.has_value());
    // K = 1 boundary: fbm with exponent 2H-1 references T
    p.spec = ProcessSpec::fbm(0.6);
    REQUIRE(weighted_qv(p, 0.2).reference == Approx(2.0).epsilon(1e-13));
  }
  SECTION("degenerate grid") {
    PathSample p;
    p.grid = make_grid({0.0});
    p.values = {0.0};
    p.spec = ProcessSpec::fbm(0.5);
    REQUIRE_THROWS_AS(weighted_qv(p, 0.0), DomainError);
  }
}

TEST_CASE("expected_qv closed forms") {
  // BM: sum of increment variances = T exactly
  REQUIRE(expected_qv(ProcessSpec::fbm(0.5), uniform_grid(2.0, 64), 0.0) ==
          Approx(2.0).epsilon(1e-12));
  // stationary increments: n (T/n)^2H
  for (double h : {0.3, 0.7}) {
    const std::size_t n = 128;
    REQUIRE(expected_qv(ProcessSpec::fbm(h), uniform_grid(1.0, n), 0.0) ==
            Approx(n * std::pow(1.0 / n, 2.0 * h)).epsilon(1e-10));
  }
  // matches the test-side oracle on every family
  const ProcessSpec specs[] = {ProcessSpec::fbm(0.7), ProcessSpec::bifbm(0.6, 0.5),
                               ProcessSpec::trifbm(0.5, 0.8), ProcessSpec::nth_fbm(2, 1.5)};
  for (const auto& spec : specs) {
    const Grid g = uniform_grid(1.5, 64);
    REQUIRE(expected_qv(spec, g, -0.25) ==
            Approx(oracle_expected_qv(spec, g, -0.25)).epsilon(1e-12));
  }
  // weighted-QV limit: within 2% of 2^(1-K) at n = 4096
  REQUIRE(expected_qv(ProcessSpec::bifbm(0.6, 0.5), uniform_grid(1.0, 4096), -0.4) ==
          Approx(std::pow(2.0, 0.5)).epsilon(0.02));
}

TEST_CASE("trifbm calibration reproduces the oracle decay") {
  SECTION("(0.5, 0.8)") {
    const TrifbmCalibration cal = calibrate_trifbm(0.5, 0.8);
    REQUIRE(cal.critical_alpha == Approx(0.78329024).epsilon(1e-6));
    REQUIRE(std::abs(cal.critical_alpha - 2.0 * 0.5 * 0.8) <= 0.05);
    // frozen expectations (independent brute-force oracle values)
    REQUIRE(std::exp2(cal.log2_expected.front()) == Approx(0.002025539618).epsilon(1e-8));
    REQUIRE(std::exp2(cal.log2_expected.back()) == Approx(0.000137223064).epsilon(1e-8));
    // limit = 2^(alpha* max_level) E_max
    REQUIRE(cal.limit ==
            Approx(std::exp2(cal.critical_alpha * 15.0 + cal.log2_expected.back()))
                .epsilon(1e-12));
  }
  SECTION("(0.4, 0.5)") {
    const TrifbmCalibration cal = calibrate_trifbm(0.4, 0.5);
    REQUIRE(cal.critical_alpha == Approx(0.39979807).epsilon(1e-6));
    REQUIRE(std::abs(cal.critical_alpha - 2.0 * 0.4 * 0.5) <= 0.05);
  }
  REQUIRE_THROWS_AS(calibrate_trifbm(0.5, 1.0), ParameterOutOfRange);
  REQUIRE_THROWS_AS(calibrate_trifbm(0.5, 0.8, 12, 12), DomainError);
}

TEST_CASE("scaled_dyadic_sum") {
  SECTION("deterministic arithmetic") {
    const auto p = deterministic_path({0.0, 0.25, 0.5, 0.75, 1.0}, {0.0, 1.0, 0.0, 1.0, 0.0});
    REQUIRE(scaled_dyadic_sum(p, 0.5).value == Approx(std::exp2(1.0) * 4.0).epsilon(1e-13));
    REQUIRE(scaled_dyadic_sum(p, 0.0).value == Approx(4.0).epsilon(1e-13));
  }
  SECTION("trifbm reference logic at HK <= 1/2") {
    PathSample p;
    p.grid = dyadic_grid(1.0, 8);
    p.values.assign(p.grid.size(), 0.0);
    p.spec = ProcessSpec::trifbm(0.5, 0.8);
    const TrifbmCalibration cal = calibrate_trifbm(0.5, 0.8);
    const StatisticResult at = scaled_dyadic_sum(p, cal.critical_alpha);
    REQUIRE(at.reference == Approx(cal.limit).epsilon(1e-12));
    const StatisticResult below = scaled_dyadic_sum(p, cal.critical_alpha - 0.2);
    REQUIRE(below.reference == 0.0);
    const StatisticResult above = scaled_dyadic_sum(p, cal.critical_alpha + 0.2);
    REQUIRE(above.divergent_expected);
    REQUIRE_FALSE(above.reference.has_value());
  }
  SECTION("trifbm trichotomy at HK > 1/2 has critical exponent 1") {
    PathSample p;
    p.grid = dyadic_grid(1.0, 8);
    p.values.assign(p.grid.size(), 0.0);
    p.spec = ProcessSpec::trifbm(0.9, 0.7);  // HK = 0.63
    REQUIRE(scaled_dyadic_sum(p, 0.9).reference == 0.0);
    REQUIRE(scaled_dyadic_sum(p, 1.1).divergent_expected);
    REQUIRE_FALSE(scaled_dyadic_sum(p, 1.0).reference.has_value());
  }
  SECTION("non-dyadic grid") {
    const auto bad = deterministic_path({0.0, 0.3, 1.0}, {0.0, 1.0, 0.0});
    REQUIRE_THROWS_AS(scaled_dyadic_sum(bad, 0.5), DomainError);
  }
}

TEST_CASE("kurchenko_statistic") {
  SECTION("affine path gives zero") {
    const std::size_t n = 4;
    Grid g = half_integer_grid(n);
    std::vector<double> vals(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) vals[i] = 2.0 + 3.0 * g.points[i];
    auto p = deterministic_path(std::move(g.points), std::move(vals), ProcessSpec::fbm(0.4));
    p.grid = half_integer_grid(n);
    REQUIRE(kurchenko_statistic(p, n).value == 0.0);
  }
  SECTION("hand-computed value and reference") {
    const std::size_t n = 2;
    auto p = deterministic_path({0.0, 0.5, 1.0, 1.5, 2.0}, {0.0, 1.0, 0.0, 1.0, 0.0},
                                ProcessSpec::fbm(0.3));
    // terms: (0 - 2 + 0)^2 and (0 - 2 + 0)^2 -> (4 + 4)/2
    const StatisticResult r = kurchenko_statistic(p, n);
    REQUIRE(r.value == Approx(4.0));
    REQUIRE(*r.reference == Approx(1.6390158215457884).epsilon(1e-12));
  }
  SECTION("grid structure is enforced") {
    auto p = deterministic_path({0.0, 0.5, 1.0}, {0.0, 0.0, 0.0}, ProcessSpec::fbm(0.5));
    REQUIRE_THROWS_AS(kurchenko_statistic(p, 2), GridMismatch);
    auto q = deterministic_path({0.0, 0.4, 1.0}, {0.0, 0.0, 0.0}, ProcessSpec::fbm(0.5));
    REQUIRE_THROWS_AS(kurchenko_statistic(q, 1), GridMismatch);
    auto r = deterministic_path({0.0, 0.5, 1.0}, {0.0, 0.0, 0.0}, ProcessSpec::bifbm(0.5, 0.5));
    REQUIRE_THROWS_AS(kurchenko_statistic(r, 1), DomainError);
  }
}

TEST_CASE("estimate_hurst_v2") {
  REQUIRE(estimate_hurst_v2(1.0) == Approx(0.5).epsilon(1e-14));
  for (double h : {0.2, 0.5, 0.8}) {
    REQUIRE(std::abs(estimate_hurst_v2(v_k_constant(2, 0.0, h)) - h) <= 1e-12);
  }
  REQUIRE_THROWS_AS(estimate_hurst_v2(3.5), OutOfRange);
  REQUIRE_THROWS_AS(estimate_hurst_v2(0.0), OutOfRange);
  REQUIRE_THROWS_AS(estimate_hurst_v2(-1.0), OutOfRange);
}

TEST_CASE("Monte Carlo means agree with the exact oracle within 3 standard errors") {
  struct Case {
    ProcessSpec spec;
    Grid grid;
    double we;
  };
  const Case cases[] = {
      {ProcessSpec::fbm(0.5), dyadic_grid(1.0, 9), 0.0},
      {ProcessSpec::fbm(0.7), dyadic_grid(1.0, 9), 0.0},
      {ProcessSpec::bifbm(0.6, 0.5), uniform_grid(1.0, 512), -0.4},
      {ProcessSpec::trifbm(0.5, 0.8), dyadic_grid(1.0, 9), 0.0},
  };
  const int nseeds = 60;
  for (const auto& c : cases) {
    CholeskySampler sampler(c.spec, c.grid);
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < nseeds; ++i) {
      const PathSample p = sampler.draw(400 + i);
      const double v = weighted_qv(p, c.we).value;
      acc += v;
      acc2 += v * v;
    }
    const double mean = acc / nseeds;
    const double se = std::sqrt((acc2 / nseeds - mean * mean) / nseeds);
    const double oracle = oracle_expected_qv(c.spec, c.grid, c.we);
    INFO(family_name(c.spec.family) << " H=" << c.spec.hurst);
    REQUIRE(std::abs(mean - oracle) <= 3.0 * se);
  }
  // kurchenko statistic: per-term mean square is V_2(0,H) exactly
  {
    const std::size_t n = 64;
    CholeskySampler sampler(ProcessSpec::fbm(0.3), half_integer_grid(n));
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < nseeds; ++i) {
      const double v = kurchenko_statistic(sampler.draw(900 + i), n).value;
      acc += v;
      acc2 += v * v;
    }
    const double mean = acc / nseeds;
    const double se = std::sqrt((acc2 / nseeds - mean * mean) / nseeds);
    REQUIRE(std::abs(mean - v_k_constant(2, 0.0, 0.3)) <= 3.0 * se);
  }
}

TEST_CASE("fbm p-variation trichotomy medians over subsampled paths") {
  // pH > 1: strictly decreasing per-level medians; pH < 1: strictly increasing
  for (double h : {0.7, 0.3}) {
    std::vector<std::vector<double>> per_level(13);
    for (std::uint64_t s = 1; s <= 10; ++s) {
      const PathSample p = sample_fbm_circulant(h, 12, 1.0, s);
      for (int lev = 8; lev <= 12; ++lev) {
        per_level[lev].push_back(p_variation_sum(restrict_dyadic(p, lev), 2.0).value);
      }
    }
    double prev = -1.0;
    for (int lev = 8; lev <= 12; ++lev) {
      const double m = median(per_level[lev]);
      if (lev > 8) {
        if (h > 0.5) {
          REQUIRE(m < prev);
        } else {
          REQUIRE(m > prev);
        }
      }
      prev = m;
    }
  }
}

TEST_CASE("hurst estimator is consistent at desk scale") {
  // median |H_hat - H| over 20 seeds at n = 256
  for (double h : {0.3, 0.5, 0.7}) {
    std::vector<double> errs;
    for (std::uint64_t s = 1; s <= 20; ++s) {
      const PathSample p =
          sample_fbm_circulant(h, 9, 256.0, s);  // half-integer grid of [0,256]
      errs.push_back(std::abs(estimate_hurst_v2(kurchenko_statistic(p, 256).value) - h));
    }
    REQUIRE(median(errs) <= 0.05);
  }
}
