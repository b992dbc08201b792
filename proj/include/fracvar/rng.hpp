#pragma once

#include <cmath>
#include <cstdint>

namespace fracvar {

namespace detail {

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Standard-normal CDF and density.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * 0.3989422804014326779;
}

}  // namespace detail

// Counter-based uniform stream: variate k of stream `seed` is a pure function
// of (seed, k). The stream is the splitmix64 sequence with the golden-ratio
// increment, mapped to (0,1) so that neither endpoint can occur.
inline double uniform01(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t z =
      detail::mix64(seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
  return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
}

// Inverse standard-normal CDF. Rational initial guess (Abramowitz & Stegun
// 26.2.23, |err| < 4.5e-4) polished by three Newton steps against erfc, which
// takes it to machine precision over the reachable range |x| <= 8.3.
inline double inverse_normal_cdf(double u) {
  const bool lower = u < 0.5;
  const double p = lower ? u : 1.0 - u;
  const double t = std::sqrt(-2.0 * std::log(p));
  double x = t - (2.515517 + t * (0.802853 + t * 0.010328)) /
                     (1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308)));
  if (lower) x = -x;
  for (int i = 0; i < 3; ++i) {
    x += (u - detail::normal_cdf(x)) / detail::normal_pdf(x);
  }
  return x;
}

// Standard-normal variate k of stream `seed` (inverse-CDF transform of the
// counter-based uniform stream).
inline double normal_variate(std::uint64_t seed, std::uint64_t index) {
  return inverse_normal_cdf(uniform01(seed, index));
}

}  // namespace fracvar
