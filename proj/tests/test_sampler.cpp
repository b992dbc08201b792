#include <algorithm>
#include <catch2/catch.hpp>
#include <cmath>
#include <vector>

#include "fracvar/sampler.hpp"
#include "fracvar/variation.hpp"

using namespace fracvar;

namespace {

double sample_variance_at_end(const ProcessSpec& spec, int nseeds) {
  CholeskySampler sampler(spec, make_grid({0.0, 1.0}));
  double acc = 0.0;
  for (int i = 0; i < nseeds; ++i) {
    const PathSample p = sampler.draw(static_cast<std::uint64_t>(i));
    acc += p.values[1] * p.values[1];
  }
  return acc / nseeds;
}

}  // namespace

TEST_CASE("grid factories") {
  SECTION("uniform") {
    const Grid g = uniform_grid(1.0, 2);
    REQUIRE(g.points == std::vector<double>{0.0, 0.5, 1.0});
    REQUIRE(g.norm == Approx(0.5));
    REQUIRE(uniform_grid(2.0, 4).points == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
    REQUIRE(uniform_grid(1.0, 1 << 10).size() == 1025);
    REQUIRE(uniform_grid(1.0, 1 << 10).norm == Approx(std::pow(2.0, -10)));
    REQUIRE_THROWS_AS(uniform_grid(0.0, 4), DomainError);
    REQUIRE_THROWS_AS(uniform_grid(1.0, 0), DomainError);
  }
  SECTION("dyadic") {
    REQUIRE(dyadic_grid(1.0, 1).points == std::vector<double>{0.0, 0.5, 1.0});
    REQUIRE(dyadic_grid(1.0, 3).size() == 9);
    REQUIRE(dyadic_grid(1.0, 3).points[3] == Approx(3.0 / 8.0));
    REQUIRE_THROWS_AS(dyadic_grid(1.0, 17), DomainError);
    REQUIRE_THROWS_AS(dyadic_grid(1.0, 0), DomainError);
  }
  SECTION("half-integer") {
    const Grid g = half_integer_grid(3);
    REQUIRE(g.size() == 7);
    REQUIRE(g.points[1] == Approx(0.5));
    REQUIRE(g.horizon == Approx(3.0));
  }
  SECTION("make_grid validation") {
    REQUIRE_THROWS_AS(make_grid({0.5, 0.5}), DomainError);
    REQUIRE_THROWS_AS(make_grid({-0.1, 0.5}), DomainError);
    REQUIRE_THROWS_AS(make_grid({}), DomainError);
  }
  SECTION("dyadic level detection") {
    REQUIRE(dyadic_level_of(dyadic_grid(1.0, 5)) == 5);
    REQUIRE(dyadic_level_of(uniform_grid(1.0, 6)) == -1);
    REQUIRE(dyadic_level_of(make_grid({0.1, 0.6, 1.1})) == -1);
  }
}

TEST_CASE("sample_path is deterministic and starts at zero") {
  const ProcessSpec spec = ProcessSpec::bifbm(0.6, 0.5);
  const Grid grid = uniform_grid(1.0, 16);
  const PathSample a = sample_path(spec, grid, 123);
  const PathSample b = sample_path(spec, grid, 123);
  REQUIRE(a.values == b.values);
  REQUIRE(a.values[0] == 0.0);
  REQUIRE(a.values.size() == grid.size());
  const PathSample c = sample_path(spec, grid, 124);
  REQUIRE(a.values != c.values);
}

TEST_CASE("batch sampling derives per-path seeds as base + index") {
  const ProcessSpec spec = ProcessSpec::trifbm(0.5, 0.8);
  const Grid grid = uniform_grid(1.0, 8);
  const auto batch = sample_paths(spec, grid, 10, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    REQUIRE(batch[i].values == sample_path(spec, grid, 10 + i).values);
  }
}

TEST_CASE("marginal law at t=1 matches the kernel for every family") {
  const int nseeds = 10000;
  struct Probe {
    ProcessSpec spec;
    double var;
  };
  const Probe probes[] = {
      {ProcessSpec::fbm(0.5), 1.0},
      {ProcessSpec::bifbm(0.6, 0.5), 1.0},
      {ProcessSpec::trifbm(0.5, 0.5), 2.0 - std::sqrt(2.0)},
      {ProcessSpec::nth_fbm(2, 1.5), 1.0 / 3.0},
  };
  for (const auto& probe : probes) {
    const double v = sample_variance_at_end(probe.spec, nseeds);
    REQUIRE(v == Approx(probe.var).epsilon(0.05));
  }
}

TEST_CASE("sampler requires a grid that starts at zero") {
  REQUIRE_THROWS_AS(sample_path(ProcessSpec::fbm(0.5), make_grid({0.5, 1.0}), 1),
                    DomainError);
}

TEST_CASE("circulant path: quadratic variation of BM near T") {
  const PathSample p = sample_fbm_circulant(0.5, 10, 1.0, 4);
  REQUIRE(p.values[0] == 0.0);
  REQUIRE(p.grid.size() == 1025);
  REQUIRE(p_variation_sum(p, 2.0).value == Approx(1.0).epsilon(0.05));
  // determinism
  REQUIRE(sample_fbm_circulant(0.5, 10, 1.0, 4).values == p.values);
  REQUIRE_THROWS_AS(sample_fbm_circulant(1.2, 10, 1.0, 4), ParameterOutOfRange);
  REQUIRE_THROWS_AS(sample_fbm_circulant(0.5, 23, 1.0, 4), DomainError);
}

TEST_CASE("circulant path covariance matches the fbm kernel") {
  // cov(X(0.25), X(0.75)) over 20000 paths within 3 standard errors
  const double H = 0.7;
  const int level = 4;  // 16 steps; 0.25 and 0.75 are grid points
  const int npaths = 20000;
  double acc = 0.0, acc2 = 0.0;
  for (int i = 0; i < npaths; ++i) {
    const PathSample p = sample_fbm_circulant(H, level, 1.0, 1000 + i);
    const double prod = p.values[4] * p.values[12];
    acc += prod;
    acc2 += prod * prod;
  }
  const double mean = acc / npaths;
  const double se = std::sqrt((acc2 / npaths - mean * mean) / npaths);
  const double kernel = covariance(ProcessSpec::fbm(H), 0.25, 0.75);
  REQUIRE(std::abs(mean - kernel) <= 3.0 * se);
}

TEST_CASE("circulant and Cholesky fbm increments agree in law (KS)") {
  const double H = 0.6;
  const int level = 5;
  const std::size_t m = std::size_t{1} << level;
  const int npaths = 313;  // ~1e4 increments per sampler
  const double scale = std::pow(1.0 / static_cast<double>(m), H);

  std::vector<double> a, b;
  CholeskySampler chol(ProcessSpec::fbm(H), dyadic_grid(1.0, level));
  for (int i = 0; i < npaths; ++i) {
    const PathSample pc = sample_fbm_circulant(H, level, 1.0, 777 + i);
    const PathSample pd = chol.draw(50000 + i);
    for (std::size_t j = 1; j <= m; ++j) {
      a.push_back((pc.values[j] - pc.values[j - 1]) / scale);
      b.push_back((pd.values[j] - pd.values[j - 1]) / scale);
    }
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  // two-sample KS distance
  double ks = 0.0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    if (a[ia] <= b[ib]) {
      ++ia;
    } else {
      ++ib;
    }
    ks = std::max(ks, std::abs(static_cast<double>(ia) / a.size() -
                               static_cast<double>(ib) / b.size()));
  }
  const double crit =
      1.628 * std::sqrt(static_cast<double>(a.size() + b.size()) /
                        (static_cast<double>(a.size()) * static_cast<double>(b.size())));
  REQUIRE(ks <= crit);  // 1% level
}

TEST_CASE("restrict_dyadic subsamples a path consistently") {
  const PathSample p = sample_fbm_circulant(0.5, 6, 1.0, 9);
  const PathSample r = restrict_dyadic(p, 4);
  REQUIRE(r.grid.size() == 17);
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    REQUIRE(r.grid.points[i] == p.grid.points[4 * i]);
    REQUIRE(r.values[i] == p.values[4 * i]);
  }
  REQUIRE_THROWS_AS(restrict_dyadic(p, 7), DomainError);
}

TEST_CASE("check_partition_schedule finite-range proxy") {
  auto norms = [](auto f, int lo, int hi) {
    std::vector<double> v;
    for (int n = lo; n <= hi; ++n) v.push_back(f(n));
    return v;
  };
  // 1/n beats any log power
  REQUIRE(check_partition_schedule(norms([](int n) { return 1.0 / n; }, 2, 64), 1.0));
  // 1/log(n+1) keeps the product at constant order
  REQUIRE_FALSE(check_partition_schedule(
      norms([](int n) { return 1.0 / std::log(n + 1.0); }, 2, 64), 1.0));
  // 1/n still beats (log n)^2.6316 over the finite range
  REQUIRE(check_partition_schedule(norms([](int n) { return 1.0 / n; }, 2, 64), 2.6316));
  REQUIRE_THROWS_AS(check_partition_schedule({}, 1.0), DomainError);
  const double bad[] = {0.5, -0.1};
  REQUIRE_THROWS_AS(check_partition_schedule(bad, 1.0), DomainError);
  const double some[] = {0.5, 0.4};
  REQUIRE_THROWS_AS(check_partition_schedule(some, 0.5), DomainError);
}
