#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "fracvar/errors.hpp"
#include "fracvar/fft.hpp"
#include "fracvar/grid.hpp"
#include "fracvar/kernels.hpp"
#include "fracvar/rng.hpp"

namespace fracvar {

// One realized path: values over grid.points, values[0] = 0, together with
// the spec and seed that produced it.
struct PathSample {
  Grid grid;
  std::vector<double> values;
  ProcessSpec spec;
  std::uint64_t seed = 0;
};

// Exact Gaussian sampler: factors the kernel matrix once and draws any number
// of paths from it. The t=0 point is excluded from the factored matrix (its
// row/column is identically zero) and re-inserted as a deterministic 0.
class CholeskySampler {
 public:
  CholeskySampler(ProcessSpec spec, Grid grid) : spec_(spec), grid_(std::move(grid)) {
    validate(spec_);
    if (grid_.size() < 2 || grid_.points.front() != 0.0) {
      throw DomainError("sampler: grid must start at t=0 and contain at least 2 points");
    }
    const Grid tail =
        make_grid(std::vector<double>(grid_.points.begin() + 1, grid_.points.end()));
    // The trifractional and n-th order kernels are smooth off-diagonal and
    // numerically near-singular on fine grids; a small diagonal inflation
    // ladder recovers a usable factor. Decomposition runs in place (these
    // matrices reach 0.5 GB); a failed attempt clobbers the buffer, so retries
    // rebuild the kernel matrix.
    double max_diag = 0.0;
    for (double eps : {0.0, 1e-12, 1e-10, 1e-8}) {
      Eigen::MatrixXd work = covariance_matrix(spec_, tail);
      if (eps == 0.0) max_diag = work.diagonal().maxCoeff();
      if (eps > 0.0) work.diagonal().array() += eps * max_diag;
      Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(work);
      if (llt.info() == Eigen::Success) {
        chol_ = std::move(work);  // lower triangle holds L; upper is ignored
        return;
      }
    }
    throw NotPositiveDefinite(
        "sampler: covariance matrix not positive definite after jitter ladder");
  }

  // Values are L z with z the standard-normal stream of `seed`; identical
  // (spec, grid, seed) give bit-identical paths.
  PathSample draw(std::uint64_t seed) const {
    const auto n = chol_.rows();
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      z(i) = normal_variate(seed, static_cast<std::uint64_t>(i));
    }
    Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>() * z;
    PathSample out;
    out.grid = grid_;
    out.values.resize(grid_.size());
    out.values[0] = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) out.values[static_cast<std::size_t>(i) + 1] = v(i);
    out.spec = spec_;
    out.seed = seed;
    return out;
  }

  const Grid& grid() const { return grid_; }
  const ProcessSpec& spec() const { return spec_; }

 private:
  ProcessSpec spec_;
  Grid grid_;
  Eigen::MatrixXd chol_;
};

inline PathSample sample_path(const ProcessSpec& spec, const Grid& grid,
                              std::uint64_t seed) {
  return CholeskySampler(spec, grid).draw(seed);
}

// Batch helper: one factorization, paths with seeds base_seed + i.
inline std::vector<PathSample> sample_paths(const ProcessSpec& spec, const Grid& grid,
                                            std::uint64_t base_seed, std::size_t count) {
  CholeskySampler sampler(spec, grid);
  std::vector<PathSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sampler.draw(base_seed + i));
  return out;
}

// Circulant-embedding (Davies-Harte) fBm sampler: exact in distribution,
// O(n log n). Generates unit-spacing fractional Gaussian noise from the
// stationary increment autocovariance, cumulates, and rescales to spacing
// T/2^level by self-similarity. Not bit-compatible with sample_path — only
// the law agrees.
inline PathSample sample_fbm_circulant(double hurst, int level, double horizon,
                                       std::uint64_t seed) {
  validate(ProcessSpec::fbm(hurst));
  if (level < 1 || level > kCirculantLevelCap) {
    throw DomainError("sample_fbm_circulant: level must be in [1, 22]");
  }
  if (!(horizon > 0.0)) throw DomainError("sample_fbm_circulant: horizon must be positive");

  const std::size_t m = std::size_t{1} << level;
  const std::size_t big = 2 * m;
  const double e = 2.0 * hurst;

  // fGn autocovariance c(j) at unit spacing, embedded in a circulant of size 2m.
  std::vector<double> c(m + 1);
  c[0] = 1.0;
  for (std::size_t j = 1; j <= m; ++j) {
    const double dj = static_cast<double>(j);
    c[j] = 0.5 * (std::pow(dj + 1.0, e) - 2.0 * std::pow(dj, e) + std::pow(dj - 1.0, e));
  }
  std::vector<std::complex<double>> eig(big);
  for (std::size_t j = 0; j <= m; ++j) eig[j] = c[j];
  for (std::size_t j = 1; j < m; ++j) eig[big - j] = c[j];
  fft_pow2(eig);

  double max_eig = 0.0, min_eig = 0.0;
  for (const auto& l : eig) {
    max_eig = std::max(max_eig, l.real());
    min_eig = std::min(min_eig, l.real());
  }
  if (min_eig < -1e-9 * max_eig) {
    throw EmbeddingNotNonnegative(
        "sample_fbm_circulant: circulant eigenvalues have a negative entry");
  }

  // Spectral synthesis: hermitian-symmetric coefficients so the transform is
  // real with the embedded covariance. Normal draws are consumed in a fixed
  // index order so the path is a pure function of (H, level, T, seed).
  const auto lam = [&](std::size_t k) { return std::max(eig[k].real(), 0.0); };
  std::vector<std::complex<double>> coef(big);
  const double inv_big = 1.0 / static_cast<double>(big);
  coef[0] = std::sqrt(lam(0) * inv_big) * normal_variate(seed, 0);
  coef[m] = std::sqrt(lam(m) * inv_big) * normal_variate(seed, 1);
  for (std::size_t k = 1; k < m; ++k) {
    const double scale = std::sqrt(lam(k) * inv_big * 0.5);
    const double re = scale * normal_variate(seed, 2 * k);
    const double im = scale * normal_variate(seed, 2 * k + 1);
    coef[k] = {re, im};
    coef[big - k] = {re, -im};
  }
  fft_pow2(coef);

  const double dt = horizon / static_cast<double>(m);
  const double step_scale = std::pow(dt, hurst);
  PathSample out;
  out.grid = uniform_grid(horizon, m);
  out.values.resize(m + 1);
  out.values[0] = 0.0;
  double level_sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    level_sum += step_scale * coef[j].real();
    out.values[j + 1] = level_sum;
  }
  out.spec = ProcessSpec::fbm(hurst);
  out.seed = seed;
  return out;
}

// Restriction of a dyadic path to a coarser dyadic level of the same horizon.
inline PathSample restrict_dyadic(const PathSample& path, int level) {
  const int have = dyadic_level_of(path.grid);
  if (have < 0) throw GridMismatch("restrict_dyadic: path grid is not dyadic");
  if (level < 0 || level > have) {
    throw DomainError("restrict_dyadic: target level exceeds the path's level");
  }
  const std::size_t stride = std::size_t{1} << (have - level);
  PathSample out;
  std::vector<double> pts, vals;
  for (std::size_t i = 0; i < path.grid.size(); i += stride) {
    pts.push_back(path.grid.points[i]);
    vals.push_back(path.values[i]);
  }
  out.grid = make_grid(std::move(pts));
  out.values = std::move(vals);
  out.spec = path.spec;
  out.seed = path.seed;
  return out;
}

// Finite-range proxy for the partition-norm condition |pi_n| = o((log n)^-gamma).
// Over the supplied range the product s_n = norms[n] * (log n)^gamma must peak
// in the first half, be non-increasing from the peak on, and end clearly below
// the peak. Advisory only: a finite range cannot certify an asymptotic o(.).
inline bool check_partition_schedule(std::span<const double> norms, double gamma,
                                     int first_index = 2) {
  if (norms.empty()) throw DomainError("check_partition_schedule: empty norm sequence");
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
    throw DomainError("check_partition_schedule: gamma must be finite and >= 1");
  }
  if (first_index < 2) throw DomainError("check_partition_schedule: first index must be >= 2");
  std::vector<double> s(norms.size());
  for (std::size_t i = 0; i < norms.size(); ++i) {
    if (!(norms[i] > 0.0)) {
      throw DomainError("check_partition_schedule: norms must be positive");
    }
    const double n = static_cast<double>(first_index) + static_cast<double>(i);
    s[i] = norms[i] * std::pow(std::log(n), gamma);
  }
  if (s.size() < 2) return false;
  const std::size_t peak =
      static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
  if (peak > (s.size() - 1) / 2) return false;
  for (std::size_t i = peak + 1; i < s.size(); ++i) {
    if (s[i] > s[i - 1] * (1.0 + 1e-9)) return false;
  }
  return s.back() <= 0.9 * s[peak];
}

}  // namespace fracvar
