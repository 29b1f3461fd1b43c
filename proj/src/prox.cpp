#include "unmix/prox.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "unmix/error.hpp"

namespace unmix {

namespace {

void require_threshold(double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::InvalidArgument, "threshold must be finite and non-negative");
  }
}

// Points whose computed distance exceeds the radius by rounding noise only
// count as inside, so projecting a projected point leaves it unchanged.
constexpr double kBoundarySlack = 1e-14;

}  // namespace

Ball::Ball(DenseVector center, double radius) : center_(std::move(center)), radius_(radius) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::NegativeDelta, "ball radius must be finite and non-negative");
  }
}

void soft_threshold_in_place(std::span<double> v, double tau) {
  require_threshold(tau);
  for (double& x : v) {
    if (x > tau) {
      x -= tau;
    } else if (x < -tau) {
      x += tau;
    } else {
      x = 0.0;
    }
  }
}

void soft_threshold_nonneg_in_place(std::span<double> v, double tau) {
  require_threshold(tau);
  for (double& x : v) x = x > tau ? x - tau : 0.0;
}

void project_ball_in_place(std::span<double> v, std::span<const double> center, double radius) {
  if (v.size() != center.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "ball center has length " + std::to_string(center.size()) + ", point has " +
                    std::to_string(v.size()));
  }
  if (!(radius >= 0.0)) {
    throw Error(ErrorCode::NegativeDelta, "ball radius must be non-negative");
  }
  double largest = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) largest = std::max(largest, std::abs(v[i] - center[i]));
  if (largest == 0.0) return;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double t = (v[i] - center[i]) / largest;
    sum_sq += t * t;
  }
  const double dist = largest * std::sqrt(sum_sq);
  if (dist <= radius * (1.0 + kBoundarySlack)) return;
  const double scale = radius / dist;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = center[i] + scale * (v[i] - center[i]);
}

DenseVector soft_threshold(const DenseVector& v, double tau) {
  DenseVector out = v;
  soft_threshold_in_place(out.span(), tau);
  return out;
}

DenseVector soft_threshold_nonneg(const DenseVector& v, double tau) {
  DenseVector out = v;
  soft_threshold_nonneg_in_place(out.span(), tau);
  return out;
}

DenseVector project_ball(const DenseVector& v, const Ball& ball) {
  DenseVector out = v;
  project_ball_in_place(out.span(), ball.center().span(), ball.radius());
  return out;
}

}  // namespace unmix
