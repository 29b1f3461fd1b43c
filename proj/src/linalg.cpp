#include "unmix/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "unmix/error.hpp"

namespace unmix {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::NonFinite, std::string(what) + " contains a non-finite entry");
    }
  }
}

void require_len(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": expected length " +
                                                  std::to_string(want) + ", got " +
                                                  std::to_string(got));
  }
}

}  // namespace

DenseVector::DenseVector(std::size_t len, double fill) : values_(len, fill) {
  require_finite(values_, "vector");
}

DenseVector::DenseVector(std::vector<double> values) : values_(std::move(values)) {
  require_finite(values_, "vector");
}

DenseVector::DenseVector(std::initializer_list<double> values) : values_(values) {
  require_finite(values_, "vector");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), entries_(rows * cols, fill) {
  require_finite(entries_, "matrix");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), entries_(std::move(row_major)) {
  require_len(entries_.size(), rows * cols, "matrix entries");
  require_finite(entries_, "matrix");
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  entries_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require_len(r.size(), cols_, "matrix row");
    entries_.insert(entries_.end(), r.begin(), r.end());
  }
  require_finite(entries_, "matrix");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseVector DenseMatrix::column(std::size_t j) const {
  DenseVector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double DenseMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : entries_) m = std::max(m, std::abs(v));
  return m;
}

void matvec_into(const DenseMatrix& m, std::span<const double> v, std::span<double> out) {
  require_len(v.size(), m.cols(), "matvec operand");
  require_len(out.size(), m.rows(), "matvec output");
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = dot(m.row(i), v);
}

DenseVector matvec(const DenseMatrix& m, const DenseVector& v) {
  DenseVector out(m.rows());
  matvec_into(m, v.span(), out.span());
  return out;
}

void matvec_transposed_into(const DenseMatrix& m, std::span<const double> v,
                            std::span<double> out) {
  require_len(v.size(), m.rows(), "transposed matvec operand");
  require_len(out.size(), m.cols(), "transposed matvec output");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double vi = v[i];
    const auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) out[j] += r[j] * vi;
  }
}

DenseVector matvec_transposed(const DenseMatrix& m, const DenseVector& v) {
  DenseVector out(m.cols());
  matvec_transposed_into(m, v.span(), out.span());
  return out;
}

DenseMatrix gram_plus_diag(const DenseMatrix& a, double c) {
  const std::size_t n = a.cols();
  DenseMatrix g(n, n);
  // Accumulate the upper triangle row by row of A, then mirror it.
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto ar = a.row(r);
    for (std::size_t i = 0; i < n; ++i) {
      const double ai = ar[i];
      if (ai == 0.0) continue;
      auto gi = g.row(i);
      for (std::size_t j = i; j < n; ++j) gi[j] += ai * ar[j];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    g(i, i) += c;
    for (std::size_t j = i + 1; j < n; ++j) g(j, i) = g(i, j);
  }
  return g;
}

SpdFactorization spd_factorize(const DenseMatrix& m) {
  const std::size_t n = m.rows();
  if (m.cols() != n) {
    throw Error(ErrorCode::InvalidArgument, "spd_factorize requires a square matrix");
  }
  const double scale = m.max_abs();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale) {
        throw Error(ErrorCode::InvalidArgument, "spd_factorize requires a symmetric matrix");
      }
    }
  }

  // Pivots below this are indistinguishable from rounding noise.
  const double pivot_floor =
      static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale;
  DenseMatrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto li = l.row(i);
    for (std::size_t j = 0; j <= i; ++j) {
      const auto lj = l.row(j);
      double s = m(i, j);
      for (std::size_t p = 0; p < j; ++p) s -= li[p] * lj[p];
      if (i == j) {
        if (!(s > pivot_floor)) {
          throw Error(ErrorCode::NotPositiveDefinite,
                      "non-positive pivot " + std::to_string(s) + " at index " +
                          std::to_string(i));
        }
        li[i] = std::sqrt(s);
      } else {
        li[j] = s / lj[j];
      }
    }
  }
  return SpdFactorization(std::move(l));
}

void SpdFactorization::solve_in_place(std::span<double> b) const {
  const std::size_t n = dim();
  require_len(b.size(), n, "spd_solve right-hand side");
  // L z = b, row-oriented.
  for (std::size_t i = 0; i < n; ++i) {
    const auto li = lower_.row(i);
    double s = b[i];
    for (std::size_t j = 0; j < i; ++j) s -= li[j] * b[j];
    b[i] = s / li[i];
  }
  // L^T x = z, column-oriented over L^T so rows of L stay contiguous.
  for (std::size_t i = n; i-- > 0;) {
    const auto li = lower_.row(i);
    const double xi = b[i] / li[i];
    b[i] = xi;
    for (std::size_t j = 0; j < i; ++j) b[j] -= li[j] * xi;
  }
}

DenseVector spd_solve(const SpdFactorization& f, const DenseVector& b) {
  DenseVector z = b;
  f.solve_in_place(z.span());
  return z;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_len(b.size(), a.size(), "dot operand");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) {
  // Scaled to avoid overflow on badly scaled inputs.
  const double m = norm_inf(v);
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double x : v) {
    const double t = x / m;
    s += t * t;
  }
  return m * std::sqrt(s);
}

double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double accurate_sum(std::span<const double> v) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

}  // namespace unmix
