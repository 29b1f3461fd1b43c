#include "unmix/sunsal.hpp"

#include <cmath>
#include <string>

#include "detail/admm_common.hpp"
#include "unmix/error.hpp"
#include "unmix/prox.hpp"

namespace unmix::sunsal {

Workspace::Workspace(const SpectralLibrary& lib, double mu, bool enforce_asc)
    : library_(&lib),
      mu_(mu),
      enforce_asc_(enforce_asc),
      factor_(spd_factorize(gram_plus_diag(lib.matrix(), mu))),
      asc_direction_(lib.signatures(), 0.0) {
  if (!(mu > 0.0)) throw Error(ErrorCode::NonPositiveMu, "mu must be positive");
  DenseVector c;
  ones_binv_ones_ = detail::build_asc_direction(factor_, c);
  if (enforce_asc_) asc_direction_ = std::move(c);
}

void Workspace::x_update_into(std::span<const double> aty, std::span<const double> u,
                              std::span<const double> d, std::span<double> x) const {
  const std::size_t n = factor_.dim();
  if (aty.size() != n || u.size() != n || d.size() != n || x.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "x_update operands must have length " +
                                                  std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) x[i] = aty[i] + mu_ * (u[i] + d[i]);
  factor_.solve_in_place(x);
  if (enforce_asc_) detail::apply_asc_correction(asc_direction_.span(), x);
}

DenseVector Workspace::x_update(const DenseVector& aty, const DenseVector& u,
                                const DenseVector& d) const {
  DenseVector x(factor_.dim());
  x_update_into(aty.span(), u.span(), d.span(), x.span());
  return x;
}

Workspace prepare(const SpectralLibrary& lib, const SolverConfig& cfg) {
  if (!(cfg.mu > 0.0)) throw Error(ErrorCode::NonPositiveMu, "mu must be positive");
  return Workspace(lib, cfg.mu, cfg.enforce_asc);
}

SolveResult solve(const Workspace& ws, const DenseVector& y, const SolverConfig& cfg,
                  const Options& options) {
  const CheckedProblem problem = validate(ws.library(), y, cfg);
  if (!is_penalized(cfg.kind)) {
    throw Error(ErrorCode::KindConflict, "SUnSAL solves CLS and CSR only");
  }
  if (cfg.mu != ws.mu() || cfg.enforce_asc != ws.enforces_asc()) {
    throw Error(ErrorCode::InvalidArgument, "workspace was prepared for a different mu or ASC setting");
  }

  const SpectralLibrary& lib = problem.library();
  const std::size_t n = lib.signatures();
  const DenseVector aty = matvec_transposed(lib.matrix(), y);
  const double tau = cfg.lambda / cfg.mu;
  const double stop_level = cfg.primal_tol * std::sqrt(static_cast<double>(n));

  DenseVector x(n);
  DenseVector u(n);
  DenseVector d(n);
  if (options.initial) {
    if (options.initial->u.size() != n || options.initial->d.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "initial u and d must have length " +
                                                    std::to_string(n));
    }
    u = options.initial->u;
    d = options.initial->d;
  }
  DenseVector u_prev(n);

  SolveResult result;
  result.primal_residual_history.reserve(cfg.max_iters);
  result.dual_residual_history.reserve(cfg.max_iters);
  if (options.track_objective) result.objective_history.reserve(cfg.max_iters);

  for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
    ws.x_update_into(aty.span(), u.span(), d.span(), x.span());

    u_prev = u;
    for (std::size_t i = 0; i < n; ++i) u[i] = x[i] - d[i];
    if (cfg.enforce_anc) {
      soft_threshold_nonneg_in_place(u.span(), tau);
    } else {
      soft_threshold_in_place(u.span(), tau);
    }
    for (std::size_t i = 0; i < n; ++i) d[i] -= x[i] - u[i];

    detail::guard_divergence(x.span(), "x", k);
    detail::guard_divergence(u.span(), "u", k);
    detail::guard_divergence(d.span(), "d", k);

    const double primal = detail::distance(x.span(), u.span());
    const double step = detail::distance(u.span(), u_prev.span());
    result.primal_residual_history.push_back(primal);
    result.dual_residual_history.push_back(cfg.mu * step);
    if (options.track_objective) {
      const DenseVector& current = cfg.return_iterate == ReturnIterate::U ? u : x;
      result.objective_history.push_back(objective(lib, y, cfg, current));
    }
    result.iterations = k;
    if (options.observer) options.observer(IterateView{k, x.span(), u.span(), d.span()});
    if (stop_level > 0.0 && primal <= stop_level && step <= stop_level) break;
  }

  result.abundances = cfg.return_iterate == ReturnIterate::U ? std::move(u) : std::move(x);
  report_feasibility(lib, y, result);
  return result;
}

SolveResult solve(const SpectralLibrary& lib, const DenseVector& y, const SolverConfig& cfg,
                  const Options& options) {
  validate(lib, y, cfg);
  const Workspace ws = prepare(lib, cfg);
  return solve(ws, y, cfg, options);
}

}  // namespace unmix::sunsal
