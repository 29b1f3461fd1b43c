#include "unmix/oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "unmix/error.hpp"

namespace unmix::oracles {

namespace {

// Least squares on the columns listed in `cols` by Householder QR.
// Columns whose pivot falls below `pivot_floor` get a zero coefficient.
std::vector<double> subset_least_squares(const DenseMatrix& a, const DenseVector& y,
                                         const std::vector<std::size_t>& cols,
                                         double pivot_floor) {
  const std::size_t k = a.rows();
  const std::size_t p = cols.size();
  // Column-major copy of A(:, cols); overwritten by R above the diagonal.
  std::vector<double> q(k * p);
  for (std::size_t c = 0; c < p; ++c)
    for (std::size_t i = 0; i < k; ++i) q[c * k + i] = a(i, cols[c]);
  std::vector<double> rhs(y.begin(), y.end());
  std::vector<double> diag(p, 0.0);
  // Row of R owned by each column, or k when the column was dropped.
  std::vector<std::size_t> owner(p, k);

  std::size_t row = 0;
  for (std::size_t c = 0; c < p && row < k; ++c) {
    double* col = &q[c * k];
    double norm_sq = 0.0;
    for (std::size_t i = row; i < k; ++i) norm_sq += col[i] * col[i];
    const double norm = std::sqrt(norm_sq);
    if (norm <= pivot_floor) continue;
    const double lead = col[row];
    const double alpha = lead > 0 ? -norm : norm;
    // Householder vector v = col(row:) - alpha e_row, stored in place.
    col[row] = lead - alpha;
    const double v_norm_sq = norm_sq - 2.0 * alpha * lead + alpha * alpha;
    auto reflect = [&](double* target) {
      double s = 0.0;
      for (std::size_t i = row; i < k; ++i) s += col[i] * target[i];
      s = 2.0 * s / v_norm_sq;
      for (std::size_t i = row; i < k; ++i) target[i] -= s * col[i];
    };
    for (std::size_t c2 = c + 1; c2 < p; ++c2) reflect(&q[c2 * k]);
    reflect(rhs.data());
    diag[c] = alpha;
    owner[c] = row;
    ++row;
  }

  std::vector<double> z(p, 0.0);
  for (std::size_t c = p; c-- > 0;) {
    const std::size_t r = owner[c];
    if (r == k) continue;
    double s = rhs[r];
    for (std::size_t c2 = c + 1; c2 < p; ++c2) {
      if (owner[c2] != k) s -= q[c2 * k + r] * z[c2];
    }
    z[c] = s / diag[c];
  }
  return z;
}

// w = A^T (y - A x), accumulated in extended precision. With the appended
// sum row the residual cancels to a tiny fraction of its terms.
DenseVector gradient_residual(const DenseMatrix& a, const DenseVector& y, const DenseVector& x) {
  const std::size_t k = a.rows();
  const std::size_t n = a.cols();
  std::vector<long double> r(k);
  for (std::size_t i = 0; i < k; ++i) {
    long double s = y[i];
    for (std::size_t j = 0; j < n; ++j) s -= static_cast<long double>(a(i, j)) * x[j];
    r[i] = s;
  }
  DenseVector w(n);
  for (std::size_t j = 0; j < n; ++j) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < k; ++i) s += static_cast<long double>(a(i, j)) * r[i];
    w[j] = static_cast<double>(s);
  }
  return w;
}

void require_rows(const DenseMatrix& a, const DenseVector& y) {
  if (y.size() != a.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "observation length " + std::to_string(y.size()) +
                                                  " does not match " +
                                                  std::to_string(a.rows()) + " rows");
  }
}

}  // namespace

DenseVector nnls(const DenseMatrix& a, const DenseVector& y, const NnlsOptions& options) {
  require_rows(a, y);
  const std::size_t n = a.cols();
  const double pivot_floor = options.pivot_tolerance * a.max_abs();

  double norm1 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    norm1 = std::max(norm1, s);
  }
  // Rounding floor for w = A^T (y - A x): it scales with ||A||_1 times the
  // size of the residual, which is at most about max(||y||_inf, ||A||_1).
  const double tol = std::numeric_limits<double>::epsilon() *
                     static_cast<double>(std::max(a.rows(), n)) * norm1 *
                     std::max(norm1, norm_inf(y.span()));

  std::vector<bool> passive(n, false);
  DenseVector x(n);
  DenseVector w = gradient_residual(a, y, x);
  const std::size_t max_outer = 3 * n;
  std::size_t outer = 0;

  auto passive_indices = [&] {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    return idx;
  };

  while (true) {
    std::size_t best = n;
    double best_w = tol;
    for (std::size_t j = 0; j < n; ++j) {
      if (!passive[j] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    }
    if (best == n) break;
    if (++outer > max_outer) {
      // Cycling on gradients just above the rounding floor: x is as good as
      // this precision allows.
      if (best_w <= 1e3 * tol) break;
      throw Error(ErrorCode::MaxOuterIterations,
                  "nnls exceeded " + std::to_string(max_outer) + " outer iterations");
    }
    passive[best] = true;

    std::vector<std::size_t> idx = passive_indices();
    std::vector<double> zp = subset_least_squares(a, y, idx, pivot_floor);
    const auto entering = static_cast<std::size_t>(
        std::find(idx.begin(), idx.end(), best) - idx.begin());
    if (!(zp[entering] > 0.0)) {
      // The new column does not help at working precision: reject it for
      // this selection round, as in the original Lawson-Hanson routine.
      passive[best] = false;
      w[best] = 0.0;
      continue;
    }
    std::size_t inner = 0;
    while (true) {
      bool feasible = true;
      for (double v : zp) feasible = feasible && v > 0.0;
      if (feasible) break;
      if (++inner > max_outer) {
        throw Error(ErrorCode::MaxOuterIterations, "nnls inner loop failed to terminate");
      }
      // Step from x toward z until the first passive coordinate hits zero.
      double alpha = std::numeric_limits<double>::infinity();
      std::size_t blocking = idx.size();
      for (std::size_t c = 0; c < idx.size(); ++c) {
        if (zp[c] <= 0.0) {
          const double xj = x[idx[c]];
          const double t = xj / (xj - zp[c]);
          if (t < alpha) {
            alpha = t;
            blocking = c;
          }
        }
      }
      double x_scale = 0.0;
      for (std::size_t c = 0; c < idx.size(); ++c) {
        const std::size_t j = idx[c];
        x[j] += alpha * (zp[c] - x[j]);
        x_scale = std::max(x_scale, std::abs(x[j]));
      }
      const double x_floor = 10.0 * std::numeric_limits<double>::epsilon() * x_scale;
      for (std::size_t c = 0; c < idx.size(); ++c) {
        const std::size_t j = idx[c];
        if (c == blocking || std::abs(x[j]) <= x_floor) {
          x[j] = 0.0;
          passive[j] = false;
        }
      }
      idx = passive_indices();
      zp = subset_least_squares(a, y, idx, pivot_floor);
    }
    for (std::size_t j = 0; j < n; ++j) x[j] = 0.0;
    for (std::size_t c = 0; c < idx.size(); ++c) x[idx[c]] = zp[c];
    w = gradient_residual(a, y, x);
  }
  return x;
}

double nnls_kkt_violation(const DenseMatrix& a, const DenseVector& y, const DenseVector& x) {
  require_rows(a, y);
  const DenseVector w = gradient_residual(a, y, x);
  double worst = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double g = -w[j];
    if (x[j] > 0.0) {
      worst = std::max(worst, std::abs(g));
    } else {
      worst = std::max(worst, std::max(0.0, -g));
      worst = std::max(worst, -x[j]);
    }
  }
  return worst;
}

double default_asc_weight(const DenseMatrix& a) { return 1e3 * a.max_abs(); }

DenseVector fcls(const DenseMatrix& a, const DenseVector& y, double asc_weight) {
  require_rows(a, y);
  if (!(asc_weight > 0.0) || !std::isfinite(asc_weight)) {
    throw Error(ErrorCode::InvalidArgument, "asc_weight must be finite and positive");
  }
  const std::size_t k = a.rows();
  const std::size_t n = a.cols();
  std::vector<double> entries(a.entries());
  entries.insert(entries.end(), n, asc_weight);
  const DenseMatrix augmented(k + 1, n, std::move(entries));
  std::vector<double> rhs(y.begin(), y.end());
  rhs.push_back(asc_weight);
  return nnls(augmented, DenseVector(std::move(rhs)));
}

DenseVector fcls(const DenseMatrix& a, const DenseVector& y) {
  return fcls(a, y, default_asc_weight(a));
}

DenseVector grid_csr(const DenseMatrix& a, const DenseVector& y, double lambda, double step) {
  require_rows(a, y);
  const std::size_t n = a.cols();
  if (n == 0 || n > 3) {
    throw Error(ErrorCode::InvalidArgument, "grid_csr supports 1 to 3 signatures, got " +
                                                std::to_string(n));
  }
  if (!(step > 0.0) || step > 1e-3) {
    throw Error(ErrorCode::InvalidArgument, "grid_csr step must lie in (0, 1e-3]");
  }
  const std::size_t k = a.rows();
  const auto m = static_cast<std::size_t>(std::ceil(1.0 / step - 1e-9));
  const double h = 1.0 / static_cast<double>(m);

  std::vector<double> cols(3 * k, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < k; ++i) cols[j * k + i] = a(i, j);

  double best_value = std::numeric_limits<double>::infinity();
  std::array<double, 3> best{1.0, 0.0, 0.0};
  auto consider = [&](double x0, double x1, double x2) {
    double fit = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double r = cols[i] * x0 + cols[k + i] * x1 + cols[2 * k + i] * x2 - y[i];
      fit += r * r;
    }
    const double value = 0.5 * fit + lambda * (std::abs(x0) + std::abs(x1) + std::abs(x2));
    if (value < best_value) {
      best_value = value;
      best = {x0, x1, x2};
    }
  };

  if (n == 1) {
    consider(1.0, 0.0, 0.0);
  } else if (n == 2) {
    for (std::size_t i = 0; i <= m; ++i) {
      const double x0 = static_cast<double>(i) * h;
      consider(x0, static_cast<double>(m - i) * h, 0.0);
    }
  } else {
    for (std::size_t i = 0; i <= m; ++i) {
      for (std::size_t j = 0; i + j <= m; ++j) {
        consider(static_cast<double>(i) * h, static_cast<double>(j) * h,
                 static_cast<double>(m - i - j) * h);
      }
    }
  }
  DenseVector out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = best[j];
  return out;
}

}  // namespace unmix::oracles
