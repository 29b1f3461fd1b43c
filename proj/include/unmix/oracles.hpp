#pragma once

// Slow, independent reference solvers. They share no code path with the ADMM
// solvers beyond the dense containers, so agreement between the two is
// meaningful evidence.

#include <cstddef>

#include "unmix/linalg.hpp"

namespace unmix::oracles {

struct NnlsOptions {
  // Relative pivot tolerance for the passive-set least-squares solves,
  // scaled by max |A_ij|.
  double pivot_tolerance = 1e-10;
};

// Lawson-Hanson active-set non-negative least squares: min ||Ax - y||_2 s.t.
// x >= 0. Throws Error(MaxOuterIterations) after 3n outer iterations unless
// the remaining gradient violation is within 1e3 times the rounding floor.
DenseVector nnls(const DenseMatrix& a, const DenseVector& y, const NnlsOptions& options = {});

// Largest violation of the NNLS optimality conditions at x, with
// g = A^T (A x - y): |g_i| where x_i > 0, max(0, -g_i) where x_i == 0, and
// max(0, -x_i) for negative entries.
double nnls_kkt_violation(const DenseMatrix& a, const DenseVector& y, const DenseVector& x);

// Default sum-constraint row weight: 1e3 * max |A_ij|.
double default_asc_weight(const DenseMatrix& a);

// Fully constrained least squares (x >= 0, 1^T x = 1) by appending the row
// asc_weight * 1^T to A and asc_weight to y and solving the NNLS problem. The
// sum constraint holds approximately, tighter as the weight grows.
DenseVector fcls(const DenseMatrix& a, const DenseVector& y, double asc_weight);
DenseVector fcls(const DenseMatrix& a, const DenseVector& y);

// Exhaustive search of (1/2)||Ax - y||^2 + lambda ||x||_1 over the simplex
// grid with spacing 1/ceil(1/step). Requires n <= 3 and 0 < step <= 1e-3.
DenseVector grid_csr(const DenseMatrix& a, const DenseVector& y, double lambda, double step);

}  // namespace unmix::oracles
