#pragma once

// C-SUnSAL: ADMM for
//
//   min ||x||_1   s.t.  ||Ax - y||_2 <= delta,  x >= 0,  1^T x = 1
//
// with G = [A; I] and u = [u1; u2]. u1 lives in the ball B(y, delta) and u2
// carries the l1 prox and the orthant. CBP is delta = 0, where the ball
// projection returns y exactly.
//
// The prox step on u2 is lambda/mu. With the sum and non-negativity
// constraints on, ||x||_1 = 1 on the feasible set, so lambda only shapes the
// iteration path and never the minimizer.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>

#include "unmix/linalg.hpp"
#include "unmix/problem.hpp"

namespace unmix::csunsal {

struct SplitIterate {
  DenseVector x;   // n
  DenseVector u1;  // k
  DenseVector d1;  // k
  DenseVector u2;  // n
  DenseVector d2;  // n
};

struct IterateView {
  std::size_t iteration;  // 1-based
  std::span<const double> x;
  std::span<const double> u1;
  std::span<const double> d1;
  std::span<const double> u2;
  std::span<const double> d2;
};

using Observer = std::function<void(const IterateView&)>;

// Cholesky factor of B = A^T A + I and C = B^{-1} 1 / (1^T B^{-1} 1).
// B is positive definite for every library, and mu cancels out of it.
class Workspace {
 public:
  Workspace(const SpectralLibrary& lib, bool enforce_asc);

  const SpectralLibrary& library() const noexcept { return *library_; }
  bool enforces_asc() const noexcept { return enforce_asc_; }
  const SpdFactorization& factorization() const noexcept { return factor_; }
  const DenseVector& asc_direction() const noexcept { return asc_direction_; }

  // Minimizer of (1/2)||Ax - (u1 + d1)||^2 + (1/2)||x - (u2 + d2)||^2 over
  // 1^T x = 1 (or unconstrained when the sum constraint is off).
  DenseVector x_update(const DenseVector& u1, const DenseVector& d1, const DenseVector& u2,
                       const DenseVector& d2) const;
  void x_update_into(std::span<const double> u1, std::span<const double> d1,
                     std::span<const double> u2, std::span<const double> d2,
                     std::span<double> x) const;

 private:
  const SpectralLibrary* library_;
  bool enforce_asc_;
  SpdFactorization factor_;
  DenseVector asc_direction_;
};

Workspace prepare(const SpectralLibrary& lib, const SolverConfig& cfg);

// project_ball(A x - d1, B(y, delta))
DenseVector u1_update(const Workspace& ws, const DenseVector& x, const DenseVector& d1,
                      const DenseVector& y, double delta);
// soft_threshold_nonneg(x - d2, lambda/mu) with ANC, soft_threshold(x - d2, lambda/mu) without.
DenseVector u2_update(const DenseVector& x, const DenseVector& d2, double lambda, double mu,
                      bool anc);

struct Options {
  // Starting (u1, d1, u2, d2); x is ignored. Defaults to u1 = y and zeros.
  std::optional<SplitIterate> initial;
  Observer observer;
};

// Runs the C-SUnSAL loop for cfg.kind in {CBP, CBPDN}. Infeasible instances
// are not detected analytically: they show up as residuals that do not
// vanish or as Error(NonFinite) from the divergence guard.
SolveResult solve(const Workspace& ws, const DenseVector& y, const SolverConfig& cfg,
                  const Options& options = {});
SolveResult solve(const SpectralLibrary& lib, const DenseVector& y, const SolverConfig& cfg,
                  const Options& options = {});

}  // namespace unmix::csunsal
