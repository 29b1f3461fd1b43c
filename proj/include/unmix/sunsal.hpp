#pragma once

// SUnSAL: ADMM with the trivial split G = I for
//
//   min (1/2)||Ax - y||^2 + lambda ||x||_1   s.t.  x >= 0,  1^T x = 1
//
// f1 carries the quadratic and the sum constraint, f2 carries the l1 term and
// the orthant. Both are closed, proper and convex and G = I has full column
// rank, which is what the ADMM convergence theorem needs; nothing here checks
// that at runtime. CLS is the same loop with lambda = 0.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>

#include "unmix/linalg.hpp"
#include "unmix/problem.hpp"

namespace unmix::sunsal {

struct IterateState {
  DenseVector x;
  DenseVector u;
  DenseVector d;  // scaled dual
};

struct IterateView {
  std::size_t iteration;  // 1-based
  std::span<const double> x;
  std::span<const double> u;
  std::span<const double> d;
};

using Observer = std::function<void(const IterateView&)>;

// Precomputed, y-independent data for a library and mu: the Cholesky factor
// of B = A^T A + mu I and C = B^{-1} 1 / (1^T B^{-1} 1). Immutable once built,
// so one workspace can serve many pixels concurrently.
class Workspace {
 public:
  Workspace(const SpectralLibrary& lib, double mu, bool enforce_asc);

  const SpectralLibrary& library() const noexcept { return *library_; }
  double mu() const noexcept { return mu_; }
  bool enforces_asc() const noexcept { return enforce_asc_; }
  const SpdFactorization& factorization() const noexcept { return factor_; }
  // C, or the zero vector when the sum constraint is off.
  const DenseVector& asc_direction() const noexcept { return asc_direction_; }
  // 1^T B^{-1} 1
  double ones_binv_ones() const noexcept { return ones_binv_ones_; }

  // x = B^{-1} w - C (1^T B^{-1} w - 1), w = A^T y + mu (u + d). This is the
  // minimizer of (1/2)||Ax - y||^2 + (mu/2)||x - u - d||^2 over 1^T x = 1,
  // or the unconstrained minimizer B^{-1} w when the sum constraint is off.
  DenseVector x_update(const DenseVector& aty, const DenseVector& u, const DenseVector& d) const;
  void x_update_into(std::span<const double> aty, std::span<const double> u,
                     std::span<const double> d, std::span<double> x) const;

 private:
  const SpectralLibrary* library_;
  double mu_;
  bool enforce_asc_;
  SpdFactorization factor_;
  DenseVector asc_direction_;
  double ones_binv_ones_ = 0.0;
};

Workspace prepare(const SpectralLibrary& lib, const SolverConfig& cfg);

struct Options {
  // Starting (u, d); x is ignored. Defaults to u = d = 0.
  std::optional<IterateState> initial;
  Observer observer;
  // Objective evaluation costs one A x product per iteration.
  bool track_objective = true;
};

// Runs the SUnSAL loop for cfg.kind in {CLS, CSR}. The workspace must have
// been prepared with cfg.mu and cfg.enforce_asc. Throws Error(NonFinite) if
// any iterate leaves [-1e12, 1e12].
SolveResult solve(const Workspace& ws, const DenseVector& y, const SolverConfig& cfg,
                  const Options& options = {});
SolveResult solve(const SpectralLibrary& lib, const DenseVector& y, const SolverConfig& cfg,
                  const Options& options = {});

}  // namespace unmix::sunsal
