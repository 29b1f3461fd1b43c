#pragma once

// Minimal dense real linear algebra for the unmixing solvers.
//
// Matrices are row-major. The design envelope is n up to a few thousand
// columns, so everything here is a straightforward dense kernel.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace unmix {

class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t len, double fill = 0.0);
  // Throws Error(NonFinite) if any value is NaN or infinite.
  explicit DenseVector(std::vector<double> values);
  DenseVector(std::initializer_list<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  operator std::span<const double>() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const DenseVector&, const DenseVector&) = default;

 private:
  std::vector<double> values_;
};

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  // `row_major` must hold rows*cols finite values.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {entries_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {entries_.data() + i * cols_, cols_}; }

  const std::vector<double>& entries() const noexcept { return entries_; }

  DenseVector column(std::size_t j) const;
  DenseMatrix transposed() const;
  // Largest absolute entry.
  double max_abs() const noexcept;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

// Lower-triangular Cholesky factor L with L*L^T equal to the factorized matrix.
class SpdFactorization {
 public:
  std::size_t dim() const noexcept { return lower_.rows(); }
  // Only the lower triangle (diagonal included) is meaningful; the rest is zero.
  const DenseMatrix& lower() const noexcept { return lower_; }

  // Solves M z = b in place; b.size() must equal dim().
  void solve_in_place(std::span<double> b) const;

 private:
  friend SpdFactorization spd_factorize(const DenseMatrix& m);
  explicit SpdFactorization(DenseMatrix lower) : lower_(std::move(lower)) {}

  DenseMatrix lower_;
};

DenseVector matvec(const DenseMatrix& m, const DenseVector& v);
// out = M v
void matvec_into(const DenseMatrix& m, std::span<const double> v, std::span<double> out);
// out = M^T v
DenseVector matvec_transposed(const DenseMatrix& m, const DenseVector& v);
void matvec_transposed_into(const DenseMatrix& m, std::span<const double> v, std::span<double> out);

// A^T A + c I. The result is bit-exactly symmetric.
DenseMatrix gram_plus_diag(const DenseMatrix& a, double c);

// Throws Error(NotPositiveDefinite) on a non-positive pivot and
// Error(InvalidArgument) if `m` is not square and symmetric.
SpdFactorization spd_factorize(const DenseMatrix& m);
DenseVector spd_solve(const SpdFactorization& f, const DenseVector& b);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
double norm_inf(std::span<const double> v);
// Compensated (Neumaier) sum.
double accurate_sum(std::span<const double> v);

}  // namespace unmix
