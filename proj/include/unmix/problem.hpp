#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unmix/linalg.hpp"

namespace unmix {

// Mixing matrix A: k bands (rows) by n signatures (columns).
class SpectralLibrary {
 public:
  // Throws Error(InvalidArgument) on an empty matrix or an all-zero column.
  explicit SpectralLibrary(DenseMatrix a);

  std::size_t bands() const noexcept { return a_.rows(); }
  std::size_t signatures() const noexcept { return a_.cols(); }
  const DenseMatrix& matrix() const noexcept { return a_; }

 private:
  DenseMatrix a_;
};

enum class ProblemKind { Cls, Csr, Cbp, Cbpdn };

std::string_view to_string(ProblemKind kind);
// Accepts "cls", "csr", "cbp", "cbpdn" in any case.
std::optional<ProblemKind> parse_problem_kind(std::string_view text);

// CLS and CSR are solved by SUnSAL, CBP and CBPDN by C-SUnSAL.
inline bool is_penalized(ProblemKind kind) {
  return kind == ProblemKind::Cls || kind == ProblemKind::Csr;
}

enum class ReturnIterate { X, U };

struct SolverConfig {
  ProblemKind kind = ProblemKind::Csr;
  // Objective weight for CSR. For CBP/CBPDN it only scales the l1 prox
  // step lambda/mu; the objective there is ||x||_1 regardless.
  double lambda = 0.0;
  // Ball radius around y for CBPDN; must be 0 for CBP.
  double delta = 0.0;
  double mu = 0.01;
  bool enforce_asc = true;
  bool enforce_anc = true;
  std::size_t max_iters = 200;
  // Early stop once both the primal residual ||x - u|| and the step in u drop
  // below primal_tol * sqrt(n); 0 disables. The u step keeps a first
  // iterate that happens to be feasible from counting as converged.
  double primal_tol = 0.0;
  ReturnIterate return_iterate = ReturnIterate::U;
};

struct SolveResult {
  DenseVector abundances;
  std::size_t iterations = 0;
  std::vector<double> primal_residual_history;
  std::vector<double> dual_residual_history;
  std::vector<double> objective_history;
  double asc_violation = 0.0;  // |1^T x - 1|
  double anc_violation = 0.0;  // max(0, -min_i x_i)
  double data_residual = 0.0;  // ||A x - y||_2
};

// A (library, observation, config) triple that passed validate().
class CheckedProblem {
 public:
  const SpectralLibrary& library() const noexcept { return *library_; }
  const DenseVector& observation() const noexcept { return y_; }
  const SolverConfig& config() const noexcept { return config_; }

 private:
  friend CheckedProblem validate(const SpectralLibrary&, const DenseVector&, const SolverConfig&);
  CheckedProblem(const SpectralLibrary& lib, DenseVector y, SolverConfig cfg)
      : library_(&lib), y_(std::move(y)), config_(cfg) {}

  const SpectralLibrary* library_;
  DenseVector y_;
  SolverConfig config_;
};

// Errors: DimensionMismatch, NonPositiveMu, NegativeLambda, NegativeDelta,
// KindConflict (CLS with lambda != 0, CBP with delta != 0), InvalidArgument
// (max_iters == 0, negative or non-finite tolerance).
CheckedProblem validate(const SpectralLibrary& lib, const DenseVector& y, const SolverConfig& cfg);

// (1/2)||Ax - y||^2 + lambda ||x||_1 for CLS/CSR; ||x||_1 for CBP/CBPDN.
double objective(const SpectralLibrary& lib, const DenseVector& y, const SolverConfig& cfg,
                 const DenseVector& x);

// Fills the violation and residual fields of `result` from its abundances.
void report_feasibility(const SpectralLibrary& lib, const DenseVector& y, SolveResult& result);

}  // namespace unmix
