#include "unmix/problem.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "unmix/error.hpp"

namespace unmix {

SpectralLibrary::SpectralLibrary(DenseMatrix a) : a_(std::move(a)) {
  if (a_.rows() == 0 || a_.cols() == 0) {
    throw Error(ErrorCode::InvalidArgument, "library must have at least one band and signature");
  }
  for (std::size_t j = 0; j < a_.cols(); ++j) {
    bool all_zero = true;
    for (std::size_t i = 0; i < a_.rows() && all_zero; ++i) all_zero = a_(i, j) == 0.0;
    if (all_zero) {
      throw Error(ErrorCode::InvalidArgument,
                  "library column " + std::to_string(j) + " is entirely zero");
    }
  }
}

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Cls: return "cls";
    case ProblemKind::Csr: return "csr";
    case ProblemKind::Cbp: return "cbp";
    case ProblemKind::Cbpdn: return "cbpdn";
  }
  return "unknown";
}

std::optional<ProblemKind> parse_problem_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "cls") return ProblemKind::Cls;
  if (lower == "csr") return ProblemKind::Csr;
  if (lower == "cbp") return ProblemKind::Cbp;
  if (lower == "cbpdn") return ProblemKind::Cbpdn;
  return std::nullopt;
}

CheckedProblem validate(const SpectralLibrary& lib, const DenseVector& y, const SolverConfig& cfg) {
  if (y.size() != lib.bands()) {
    throw Error(ErrorCode::DimensionMismatch, "observation has " + std::to_string(y.size()) +
                                                  " bands, library has " +
                                                  std::to_string(lib.bands()));
  }
  if (!(cfg.mu > 0.0) || !std::isfinite(cfg.mu)) {
    throw Error(ErrorCode::NonPositiveMu, "mu must be a finite positive number");
  }
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) {
    throw Error(ErrorCode::NegativeLambda, "lambda must be a finite non-negative number");
  }
  if (!(cfg.delta >= 0.0) || !std::isfinite(cfg.delta)) {
    throw Error(ErrorCode::NegativeDelta, "delta must be a finite non-negative number");
  }
  if (cfg.kind == ProblemKind::Cls && cfg.lambda != 0.0) {
    throw Error(ErrorCode::KindConflict, "CLS fixes lambda to 0");
  }
  if (cfg.kind == ProblemKind::Cbp && cfg.delta != 0.0) {
    throw Error(ErrorCode::KindConflict, "CBP fixes delta to 0");
  }
  if (cfg.max_iters == 0) {
    throw Error(ErrorCode::InvalidArgument, "max_iters must be at least 1");
  }
  if (!(cfg.primal_tol >= 0.0) || !std::isfinite(cfg.primal_tol)) {
    throw Error(ErrorCode::InvalidArgument, "primal_tol must be a finite non-negative number");
  }
  return CheckedProblem(lib, y, cfg);
}

double objective(const SpectralLibrary& lib, const DenseVector& y, const SolverConfig& cfg,
                 const DenseVector& x) {
  if (x.size() != lib.signatures()) {
    throw Error(ErrorCode::DimensionMismatch, "abundance vector has " + std::to_string(x.size()) +
                                                  " entries, library has " +
                                                  std::to_string(lib.signatures()));
  }
  double l1 = 0.0;
  for (double v : x) l1 += std::abs(v);
  if (!is_penalized(cfg.kind)) return l1;

  if (y.size() != lib.bands()) {
    throw Error(ErrorCode::DimensionMismatch, "observation length does not match library");
  }
  DenseVector r = matvec(lib.matrix(), x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
  const double fit = norm2(r);
  return 0.5 * fit * fit + cfg.lambda * l1;
}

void report_feasibility(const SpectralLibrary& lib, const DenseVector& y, SolveResult& result) {
  const DenseVector& x = result.abundances;
  result.asc_violation = std::abs(accurate_sum(x) - 1.0);
  double lowest = 0.0;
  for (double v : x) lowest = std::min(lowest, v);
  result.anc_violation = -lowest;
  DenseVector r = matvec(lib.matrix(), x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
  result.data_residual = norm2(r);
}

}  // namespace unmix
