#include <doctest.h>

#include <cmath>
#include <random>

#include "support/reference.hpp"
#include "unmix/error.hpp"
#include "unmix/prox.hpp"

using namespace unmix;

TEST_CASE("soft_threshold") {
  CHECK(soft_threshold(DenseVector{2.0, -0.5, 0.0}, 1.0) == DenseVector{1.0, 0.0, 0.0});
  CHECK(soft_threshold(DenseVector{-3.0, 0.25}, 1.0) == DenseVector{-2.0, 0.0});
  const DenseVector v{1.5, -2.0, 0.3};
  CHECK(soft_threshold(v, 0.0) == v);
  CHECK(soft_threshold(DenseVector(4), 3.0) == DenseVector(4));
  CHECK_THROWS_AS(soft_threshold(v, -1e-3), Error);
}

TEST_CASE("soft_threshold_nonneg") {
  CHECK(soft_threshold_nonneg(DenseVector{2.0, -0.5}, 1.0) == DenseVector{1.0, 0.0});
  CHECK(soft_threshold_nonneg(DenseVector{-5.0, -1.0}, 0.0) == DenseVector{0.0, 0.0});
  CHECK_THROWS_AS(soft_threshold_nonneg(DenseVector{1.0}, -1.0), Error);
}

TEST_CASE("prox operators match a 1-D grid search") {
  for (int i = -20; i <= 20; ++i) {
    const double v = 0.1 * i;
    for (double tau : {0.0, 0.3, 1.0}) {
      const double h = 1e-4;
      CHECK(std::abs(soft_threshold(DenseVector{v}, tau)[0] - ref::grid_prox(v, tau, false, h)) <=
            h);
      CHECK(std::abs(soft_threshold_nonneg(DenseVector{v}, tau)[0] -
                     ref::grid_prox(v, tau, true, h)) <= h);
    }
  }
}

TEST_CASE("project_ball") {
  const Ball unit5(DenseVector{0.0, 0.0}, 5.0);
  CHECK(project_ball(DenseVector{3.0, 4.0}, unit5) == DenseVector{3.0, 4.0});
  const DenseVector p = project_ball(DenseVector{6.0, 8.0}, unit5);
  CHECK(p[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(4.0).epsilon(1e-15));

  const DenseVector y{0.2, -1.0, 3.0};
  const Ball point(y, 0.0);
  CHECK(project_ball(DenseVector{5.0, 6.0, 7.0}, point) == y);
  CHECK(project_ball(y, point) == y);
  CHECK_THROWS_AS(Ball(y, -1.0), Error);
  try {
    Ball bad(y, -0.5);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NegativeDelta);
  }
  try {
    project_ball(DenseVector{1.0}, point);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("in-place variants agree with the reference definitions") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 200; ++t) {
    const DenseVector v = ref::random_vector(rng, 9, 2.0);
    const DenseVector c = ref::random_vector(rng, 9, 2.0);
    const double tau = 0.01 * t;
    DenseVector a = v;
    soft_threshold_in_place(a.span(), tau);
    CHECK(a == soft_threshold(v, tau));
    a = v;
    soft_threshold_nonneg_in_place(a.span(), tau);
    CHECK(a == soft_threshold_nonneg(v, tau));
    a = v;
    project_ball_in_place(a.span(), c, tau);
    CHECK(a == project_ball(v, Ball(c, tau)));
  }
}

TEST_CASE("prox property suite") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto dist = [](const DenseVector& x, const DenseVector& y) {
    ref::Vec d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
    return ref::norm(d);
  };
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = 1 + t % 12;
    const double scale = std::pow(10.0, -3.0 + 6.0 * unit(rng));
    const DenseVector a = ref::random_vector(rng, n, scale);
    const DenseVector b = ref::random_vector(rng, n, scale);
    const double tau = scale * unit(rng);
    const double gap = dist(a, b);
    const Ball ball(ref::random_vector(rng, n, scale), 2.0 * scale * unit(rng));
    const DenseVector sa = soft_threshold(a, tau), sb = soft_threshold(b, tau);
    const DenseVector na = soft_threshold_nonneg(a, tau), nb = soft_threshold_nonneg(b, tau);
    const DenseVector pa = project_ball(a, ball), pb = project_ball(b, ball);
    const double slack = 1e-12 * (1.0 + scale);
    CHECK(dist(sa, sb) <= gap + slack);
    CHECK(dist(na, nb) <= gap + slack);
    CHECK(dist(pa, pb) <= gap + slack);
    CHECK(dist(project_ball(pa, ball), pa) <= slack);
    CHECK(dist(pa, ball.center()) <= ball.radius() * (1.0 + 1e-12));
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(na[i] >= 0.0);
      CHECK(na[i] <= std::max(0.0, a[i]));
    }
  }
}
