#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "fracvar/errors.hpp"
#include "fracvar/fft.hpp"

namespace fracvar {

// Dense Cholesky sampling is O(n^3); dyadic grids are capped at 2^16+1 points.
inline constexpr int kDyadicLevelCap = 16;
// The FFT fast path for fBm is O(n log n) and allows finer grids.
inline constexpr int kCirculantLevelCap = 22;

// Partition of [0, horizon]: strictly increasing points with norm = max
// spacing. Factories produce grids that start at 0; generic point sets are
// accepted as long as they are nonnegative and strictly increasing.
struct Grid {
  std::vector<double> points;
  double horizon = 0.0;
  double norm = 0.0;

  std::size_t size() const { return points.size(); }
  std::size_t intervals() const { return points.empty() ? 0 : points.size() - 1; }
};

inline Grid make_grid(std::vector<double> pts) {
  if (pts.empty()) throw DomainError("grid must contain at least one point");
  if (pts.front() < 0.0) throw DomainError("grid points must be nonnegative");
  double norm = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double dt = pts[i] - pts[i - 1];
    if (dt <= 0.0) throw DomainError("grid points must be strictly increasing");
    norm = std::max(norm, dt);
  }
  Grid g;
  g.horizon = pts.back();
  g.norm = norm;
  g.points = std::move(pts);
  return g;
}

// {0, T/n, 2T/n, ..., T}
inline Grid uniform_grid(double horizon, std::size_t n) {
  if (!(horizon > 0.0)) throw DomainError("uniform_grid: horizon must be positive");
  if (n == 0) throw DomainError("uniform_grid: n must be positive");
  std::vector<double> pts(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    pts[i] = horizon * static_cast<double>(i) / static_cast<double>(n);
  }
  Grid g;
  g.points = std::move(pts);
  g.horizon = horizon;
  g.norm = horizon / static_cast<double>(n);
  return g;
}

// Uniform grid with 2^level intervals.
inline Grid dyadic_grid(double horizon, int level) {
  if (level < 1) throw DomainError("dyadic_grid: level must be positive");
  if (level > kDyadicLevelCap) {
    throw DomainError("dyadic_grid: level exceeds cap of 16 (O(n^3) factorization)");
  }
  return uniform_grid(horizon, std::size_t{1} << level);
}

// {0, 1/2, 1, ..., n}: the evaluation grid of the second-order increment
// statistic on [0, n].
inline Grid half_integer_grid(std::size_t n) {
  if (n == 0) throw DomainError("half_integer_grid: n must be positive");
  return uniform_grid(static_cast<double>(n), 2 * n);
}

inline bool is_uniform(const Grid& g, double rtol = 1e-9) {
  if (g.size() < 2) return false;
  const double mean = g.horizon / static_cast<double>(g.intervals());
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (std::abs((g.points[i] - g.points[i - 1]) - mean) > rtol * mean) return false;
  }
  return true;
}

// Level of a dyadic grid of [0,T] (uniform, starts at 0, 2^k intervals), or
// -1 when the grid has no such structure.
inline int dyadic_level_of(const Grid& g, double rtol = 1e-9) {
  if (g.size() < 2 || g.points.front() != 0.0) return -1;
  if (!is_power_of_two(g.intervals())) return -1;
  if (!is_uniform(g, rtol)) return -1;
  int level = 0;
  for (std::size_t n = g.intervals(); n > 1; n >>= 1) ++level;
  return level;
}

}  // namespace fracvar
