#include "reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ref {

Mat from(const unmix::DenseMatrix& m) { return Mat{m.rows(), m.cols(), m.entries()}; }
Vec from(const unmix::DenseVector& v) { return v.values(); }

Vec mul(const Mat& m, const Vec& v) {
  Vec out(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out[i] += m(i, j) * v[j];
  return out;
}

Vec mul_t(const Mat& m, const Vec& v) {
  Vec out(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out[j] += m(i, j) * v[i];
  return out;
}

Mat gram(const Mat& m, double c) {
  Mat g{m.cols, m.cols, Vec(m.cols * m.cols, 0.0)};
  for (std::size_t p = 0; p < m.cols; ++p)
    for (std::size_t q = 0; q < m.cols; ++q) {
      double s = 0.0;
      for (std::size_t i = 0; i < m.rows; ++i) s += m(i, p) * m(i, q);
      g(p, q) = s + (p == q ? c : 0.0);
    }
  return g;
}

double sum(const Vec& v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return static_cast<double>(s);
}

double norm(const Vec& v) {
  long double s = 0.0L;
  for (double x : v) s += static_cast<long double>(x) * x;
  return static_cast<double>(std::sqrt(s));
}

double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double stddev(const Vec& v) {
  const double mean = sum(v) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size()));
}

Vec gauss_solve(Mat m, Vec b) {
  const std::size_t n = m.rows;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    if (m(piv, c) == 0.0) throw std::runtime_error("singular system");
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(c, j), m(piv, j));
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m(r, c) / m(c, c);
      if (f == 0.0) continue;
      for (std::size_t j = c; j < n; ++j) m(r, j) -= f * m(c, j);
      b[r] -= f * b[c];
    }
  }
  Vec x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t j = r + 1; j < n; ++j) s -= m(r, j) * x[j];
    x[r] = s / m(r, r);
  }
  return x;
}

Vec equality_qp(const Mat& b, const Vec& w) {
  const std::size_t n = b.rows;
  Mat k{n + 1, n + 1, Vec((n + 1) * (n + 1), 0.0)};
  Vec rhs(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k(i, j) = b(i, j);
    k(i, n) = 1.0;
    k(n, i) = 1.0;
    rhs[i] = w[i];
  }
  rhs[n] = 1.0;
  Vec sol = gauss_solve(std::move(k), std::move(rhs));
  sol.pop_back();
  return sol;
}

Vec project_simplex(const Vec& v) {
  Vec s = v;
  std::sort(s.begin(), s.end(), std::greater<>());
  double acc = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    acc += s[i];
    const double t = (acc - 1.0) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) theta = t;
  }
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(0.0, v[i] - theta);
  return out;
}

double gram_spectral_norm(const Mat& a) {
  Vec v(a.cols, 1.0);
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    Vec w = mul_t(a, mul(a, v));
    const double nw = norm(w);
    if (nw == 0.0) return 0.0;
    for (double& x : w) x /= nw;
    lambda = nw / norm(v);
    v = std::move(w);
  }
  return lambda;
}

namespace {

template <typename Project>
Vec projected_gradient(const Mat& a, const Vec& y, std::size_t iters, Project project) {
  // Padded so a slightly low norm estimate cannot make the step too long.
  const double step = 1.0 / (gram_spectral_norm(a) * 1.0001);
  const Mat g = gram(a, 0.0);
  const Vec aty = mul_t(a, y);
  Vec x = project(Vec(a.cols, 1.0 / static_cast<double>(a.cols)));
  Vec grad(a.cols);
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t p = 0; p < a.cols; ++p) {
      double s = -aty[p];
      for (std::size_t q = 0; q < a.cols; ++q) s += g(p, q) * x[q];
      grad[p] = s;
    }
    for (std::size_t p = 0; p < a.cols; ++p) x[p] -= step * grad[p];
    x = project(x);
  }
  return x;
}

}  // namespace

Vec projected_gradient_nnls(const Mat& a, const Vec& y, std::size_t iters) {
  return projected_gradient(a, y, iters, [](Vec v) {
    for (double& x : v) x = std::max(0.0, x);
    return v;
  });
}

Vec projected_gradient_cls(const Mat& a, const Vec& y, std::size_t iters) {
  return projected_gradient(a, y, iters, [](const Vec& v) { return project_simplex(v); });
}

double grid_prox(double v, double tau, bool nonneg, double h, double lim) {
  const auto steps = static_cast<long>(std::llround(lim / h));
  double best = std::numeric_limits<double>::infinity();
  double arg = 0.0;
  for (long i = nonneg ? 0 : -steps; i <= steps; ++i) {
    const double u = static_cast<double>(i) * h;
    const double f = 0.5 * (u - v) * (u - v) + tau * std::abs(u);
    if (f < best) {
      best = f;
      arg = u;
    }
  }
  return arg;
}

double csr_value(const Mat& a, const Vec& y, double lambda, const Vec& x) {
  Vec r = mul(a, x);
  double fit = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) fit += (r[i] - y[i]) * (r[i] - y[i]);
  double l1 = 0.0;
  for (double v : x) l1 += std::abs(v);
  return 0.5 * fit + lambda * l1;
}

std::size_t best_vertex(const Mat& a, const Vec& y, double lambda) {
  std::size_t best = 0;
  double value = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < a.cols; ++j) {
    Vec e(a.cols, 0.0);
    e[j] = 1.0;
    const double f = csr_value(a, y, lambda, e);
    if (f < value) {
      value = f;
      best = j;
    }
  }
  return best;
}

unmix::DenseMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                 double scale) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> e(rows * cols);
  for (double& v : e) v = g(rng);
  return unmix::DenseMatrix(rows, cols, std::move(e));
}

unmix::DenseVector random_vector(std::mt19937_64& rng, std::size_t len, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> e(len);
  for (double& v : e) v = g(rng);
  return unmix::DenseVector(std::move(e));
}

unmix::DenseVector random_simplex(std::mt19937_64& rng, std::size_t len) {
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> e(len);
  double s = 0.0;
  for (double& v : e) {
    v = ex(rng);
    s += v;
  }
  for (double& v : e) v /= s;
  return unmix::DenseVector(std::move(e));
}

}  // namespace ref
