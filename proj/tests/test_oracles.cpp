#include <doctest.h>

#include <cmath>
#include <random>

#include "support/reference.hpp"
#include "unmix/error.hpp"
#include "unmix/oracles.hpp"

using namespace unmix;

TEST_CASE("nnls small cases") {
  const DenseMatrix eye = DenseMatrix::identity(2);
  CHECK(oracles::nnls(eye, DenseVector{1.0, -1.0}) == DenseVector{1.0, 0.0});
  const DenseVector x = oracles::nnls(eye, DenseVector{0.3, 0.7});
  CHECK(x[0] == doctest::Approx(0.3));
  CHECK(x[1] == doctest::Approx(0.7));
  CHECK(oracles::nnls(eye, DenseVector{-1.0, -2.0}) == DenseVector{0.0, 0.0});
  CHECK_THROWS_AS(oracles::nnls(eye, DenseVector{1.0}), Error);
}

TEST_CASE("nnls agrees with long projected gradient on random 10x4 problems") {
  std::mt19937_64 rng(71);
  for (int t = 0; t < 10; ++t) {
    const DenseMatrix a = ref::random_matrix(rng, 10, 4);
    const DenseVector y = ref::random_vector(rng, 10);
    const DenseVector x = oracles::nnls(a, y);
    const ref::Vec pg = ref::projected_gradient_nnls(ref::from(a), ref::from(y), 1000000);
    CHECK(ref::max_abs_diff(ref::from(x), pg) <= 1e-6);
  }
}

TEST_CASE("nnls returns points satisfying its optimality conditions") {
  std::mt19937_64 rng(72);
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 3 + t % 30;
    const std::size_t n = 1 + t % 25;
    const DenseMatrix a = ref::random_matrix(rng, k, n);
    const DenseVector y = ref::random_vector(rng, k, 3.0);
    const DenseVector x = oracles::nnls(a, y);
    for (double v : x) CHECK(v >= 0.0);
    CHECK(oracles::nnls_kkt_violation(a, y, x) <= 1e-8);
  }
}

TEST_CASE("fcls small cases") {
  const DenseMatrix eye = DenseMatrix::identity(2);
  const DenseVector a = oracles::fcls(eye, DenseVector{0.3, 0.7});
  CHECK(a[0] == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(a[1] == doctest::Approx(0.7).epsilon(1e-6));
  const DenseVector b = oracles::fcls(eye, DenseVector{2.0, 0.0});
  CHECK(b[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(b[1]) <= 1e-6);
  CHECK(oracles::default_asc_weight(DenseMatrix{{1.0, -4.0}}) == 4e3);
  CHECK_THROWS_AS(oracles::fcls(eye, DenseVector{1.0, 0.0}, 0.0), Error);
}

TEST_CASE("fcls sums to one and is stable in the weight") {
  std::mt19937_64 rng(73);
  for (int t = 0; t < 100; ++t) {
    const DenseMatrix a = ref::random_matrix(rng, 20, 8);
    DenseVector y = matvec(a, ref::random_simplex(rng, 8));
    const DenseVector noise = ref::random_vector(rng, 20, 0.1);
    for (std::size_t i = 0; i < 20; ++i) y[i] += noise[i];
    const DenseVector x = oracles::fcls(a, y);
    CHECK(std::abs(ref::sum(ref::from(x)) - 1.0) <= 1e-5);
    if (t < 20) {
      const DenseVector x3 = oracles::fcls(a, y, 1e3);
      const DenseVector x6 = oracles::fcls(a, y, 1e6);
      CHECK(ref::max_abs_diff(ref::from(x3), ref::from(x6)) <= 1e-4);
      // The exact CLS answer from projected gradient on the simplex.
      const ref::Vec pg = ref::projected_gradient_cls(ref::from(a), ref::from(y), 100000);
      CHECK(ref::max_abs_diff(ref::from(x), pg) <= 1e-4);
    }
  }
}

TEST_CASE("grid_csr small cases") {
  const DenseMatrix eye = DenseMatrix::identity(2);
  const double step = 1e-3;
  const DenseVector a = oracles::grid_csr(eye, DenseVector{0.3, 0.7}, 0.0, step);
  CHECK(std::abs(a[0] - 0.3) <= step);
  CHECK(std::abs(a[1] - 0.7) <= step);
  const DenseVector b = oracles::grid_csr(eye, DenseVector{2.0, 0.0}, 0.0, step);
  CHECK(std::abs(b[0] - 1.0) <= step);
  CHECK(oracles::grid_csr(DenseMatrix{{2.0}}, DenseVector{0.1}, 1.0, step) == DenseVector{1.0});
  CHECK_THROWS_AS(oracles::grid_csr(DenseMatrix(2, 4, 1.0), DenseVector(2), 0.0, step), Error);
  CHECK_THROWS_AS(oracles::grid_csr(eye, DenseVector(2), 0.0, 1e-2), Error);
}

TEST_CASE("grid_csr argmin is independent of lambda and refines monotonically") {
  std::mt19937_64 rng(74);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + t % 2;
    const DenseMatrix a = ref::random_matrix(rng, 6, n);
    const DenseVector y = ref::random_vector(rng, 6);
    const DenseVector base = oracles::grid_csr(a, y, 0.0, 1e-3);
    CHECK(oracles::grid_csr(a, y, 5.0, 1e-3) == base);
    CHECK(oracles::grid_csr(a, y, 0.0, 1e-3) == base);
    const DenseVector fine = oracles::grid_csr(a, y, 0.0, 5e-4);
    const ref::Mat am = ref::from(a);
    CHECK(ref::csr_value(am, ref::from(y), 0.0, ref::from(fine)) <=
          ref::csr_value(am, ref::from(y), 0.0, ref::from(base)));
  }
}
