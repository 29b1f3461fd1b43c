#pragma once

// Closed-form proximal maps used by the u-updates.
//
// The value-returning functions are the reference definitions; the
// *_in_place variants do the same arithmetic on caller-owned storage for
// the solver loops.

#include <span>

#include "unmix/linalg.hpp"

namespace unmix {

// Closed Euclidean ball {z : ||z - center||_2 <= radius}.
class Ball {
 public:
  // Throws Error(NegativeDelta) if radius < 0 or is not finite.
  Ball(DenseVector center, double radius);

  const DenseVector& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }

 private:
  DenseVector center_;
  double radius_;
};

// sign(v_i) * max(|v_i| - tau, 0). Throws Error(InvalidArgument) for tau < 0.
DenseVector soft_threshold(const DenseVector& v, double tau);
// max(0, v_i - tau): soft threshold followed by projection onto the first orthant.
DenseVector soft_threshold_nonneg(const DenseVector& v, double tau);
DenseVector project_ball(const DenseVector& v, const Ball& ball);

void soft_threshold_in_place(std::span<double> v, double tau);
void soft_threshold_nonneg_in_place(std::span<double> v, double tau);
void project_ball_in_place(std::span<double> v, std::span<const double> center, double radius);

}  // namespace unmix
