#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "unmix/error.hpp"
#include "unmix/linalg.hpp"

namespace unmix::detail {

// Iterates beyond this magnitude mean the instance has no solution.
inline constexpr double kDivergenceBound = 1e12;

inline void guard_divergence(std::span<const double> v, const char* name, std::size_t iteration) {
  for (double x : v) {
    if (!(std::abs(x) <= kDivergenceBound)) {
      throw Error(ErrorCode::NonFinite, std::string(name) + " diverged at iteration " +
                                            std::to_string(iteration));
    }
  }
}

// C = B^{-1} 1 / (1^T B^{-1} 1); returns 1^T B^{-1} 1.
inline double build_asc_direction(const SpdFactorization& f, DenseVector& c) {
  c = DenseVector(f.dim(), 1.0);
  f.solve_in_place(c.span());
  const double total = accurate_sum(c);
  for (double& v : c) v /= total;
  return total;
}

// x <- x - C (1^T x - 1), applied twice: the second pass removes the rounding
// left by the first so 1^T x = 1 holds to working precision.
inline void apply_asc_correction(std::span<const double> c, std::span<double> x) {
  for (int pass = 0; pass < 2; ++pass) {
    const double excess = accurate_sum(x) - 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= c[i] * excess;
  }
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  double largest = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) largest = std::max(largest, std::abs(a[i] - b[i]));
  if (largest == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = (a[i] - b[i]) / largest;
    s += t * t;
  }
  return largest * std::sqrt(s);
}

}  // namespace unmix::detail
