#include "unmix/csunsal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "detail/admm_common.hpp"
#include "unmix/error.hpp"
#include "unmix/prox.hpp"

namespace unmix::csunsal {

Workspace::Workspace(const SpectralLibrary& lib, bool enforce_asc)
    : library_(&lib),
      enforce_asc_(enforce_asc),
      factor_(spd_factorize(gram_plus_diag(lib.matrix(), 1.0))),
      asc_direction_(lib.signatures(), 0.0) {
  DenseVector c;
  detail::build_asc_direction(factor_, c);
  if (enforce_asc_) asc_direction_ = std::move(c);
}

void Workspace::x_update_into(std::span<const double> u1, std::span<const double> d1,
                              std::span<const double> u2, std::span<const double> d2,
                              std::span<double> x) const {
  const DenseMatrix& a = library_->matrix();
  const std::size_t k = a.rows();
  const std::size_t n = a.cols();
  if (u1.size() != k || d1.size() != k || u2.size() != n || d2.size() != n || x.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "x_update operands must have lengths k, k, n, n");
  }
  std::fill(x.begin(), x.end(), 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const double s = u1[i] + d1[i];
    const auto row = a.row(i);
    for (std::size_t j = 0; j < n; ++j) x[j] += row[j] * s;
  }
  for (std::size_t j = 0; j < n; ++j) x[j] += u2[j] + d2[j];
  factor_.solve_in_place(x);
  if (enforce_asc_) detail::apply_asc_correction(asc_direction_.span(), x);
}

DenseVector Workspace::x_update(const DenseVector& u1, const DenseVector& d1,
                                const DenseVector& u2, const DenseVector& d2) const {
  DenseVector x(factor_.dim());
  x_update_into(u1.span(), d1.span(), u2.span(), d2.span(), x.span());
  return x;
}

Workspace prepare(const SpectralLibrary& lib, const SolverConfig& cfg) {
  return Workspace(lib, cfg.enforce_asc);
}

DenseVector u1_update(const Workspace& ws, const DenseVector& x, const DenseVector& d1,
                      const DenseVector& y, double delta) {
  DenseVector v = matvec(ws.library().matrix(), x);
  if (d1.size() != v.size()) {
    throw Error(ErrorCode::DimensionMismatch, "d1 must have one entry per band");
  }
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d1[i];
  project_ball_in_place(v.span(), y.span(), delta);
  return v;
}

DenseVector u2_update(const DenseVector& x, const DenseVector& d2, double lambda, double mu,
                      bool anc) {
  if (x.size() != d2.size()) {
    throw Error(ErrorCode::DimensionMismatch, "x and d2 lengths differ");
  }
  if (!(mu > 0.0)) throw Error(ErrorCode::NonPositiveMu, "mu must be positive");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::NegativeLambda, "lambda must be non-negative");
  DenseVector v(x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = x[i] - d2[i];
  if (anc) {
    soft_threshold_nonneg_in_place(v.span(), lambda / mu);
  } else {
    soft_threshold_in_place(v.span(), lambda / mu);
  }
  return v;
}

SolveResult solve(const Workspace& ws, const DenseVector& y, const SolverConfig& cfg,
                  const Options& options) {
  const CheckedProblem problem = validate(ws.library(), y, cfg);
  if (is_penalized(cfg.kind)) {
    throw Error(ErrorCode::KindConflict, "C-SUnSAL solves CBP and CBPDN only");
  }
  if (cfg.enforce_asc != ws.enforces_asc()) {
    throw Error(ErrorCode::InvalidArgument, "workspace was prepared for a different ASC setting");
  }

  const SpectralLibrary& lib = problem.library();
  const DenseMatrix& a = lib.matrix();
  const std::size_t k = lib.bands();
  const std::size_t n = lib.signatures();
  const double tau = cfg.lambda / cfg.mu;
  const double stop_level = cfg.primal_tol * std::sqrt(static_cast<double>(n));

  DenseVector x(n);
  DenseVector ax(k);
  DenseVector u1 = y;
  DenseVector d1(k);
  DenseVector u2(n);
  DenseVector d2(n);
  if (options.initial) {
    const SplitIterate& init = *options.initial;
    if (init.u1.size() != k || init.d1.size() != k || init.u2.size() != n ||
        init.d2.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "initial split iterate has wrong lengths");
    }
    u1 = init.u1;
    d1 = init.d1;
    u2 = init.u2;
    d2 = init.d2;
  }
  DenseVector u1_prev(k);
  DenseVector u2_prev(n);

  SolveResult result;
  result.primal_residual_history.reserve(cfg.max_iters);
  result.dual_residual_history.reserve(cfg.max_iters);
  result.objective_history.reserve(cfg.max_iters);

  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    ws.x_update_into(u1.span(), d1.span(), u2.span(), d2.span(), x.span());
    matvec_into(a, x.span(), ax.span());

    u1_prev = u1;
    for (std::size_t i = 0; i < k; ++i) u1[i] = ax[i] - d1[i];
    project_ball_in_place(u1.span(), y.span(), cfg.delta);

    u2_prev = u2;
    for (std::size_t j = 0; j < n; ++j) u2[j] = x[j] - d2[j];
    if (cfg.enforce_anc) {
      soft_threshold_nonneg_in_place(u2.span(), tau);
    } else {
      soft_threshold_in_place(u2.span(), tau);
    }

    for (std::size_t i = 0; i < k; ++i) d1[i] -= ax[i] - u1[i];
    for (std::size_t j = 0; j < n; ++j) d2[j] -= x[j] - u2[j];

    detail::guard_divergence(x.span(), "x", it);
    detail::guard_divergence(u1.span(), "u1", it);
    detail::guard_divergence(d1.span(), "d1", it);
    detail::guard_divergence(u2.span(), "u2", it);
    detail::guard_divergence(d2.span(), "d2", it);

    const double primal =
        std::max(detail::distance(ax.span(), u1.span()), detail::distance(x.span(), u2.span()));
    const double du1 = detail::distance(u1.span(), u1_prev.span());
    const double du2 = detail::distance(u2.span(), u2_prev.span());
    result.primal_residual_history.push_back(primal);
    result.dual_residual_history.push_back(cfg.mu * std::hypot(du1, du2));
    const DenseVector& current = cfg.return_iterate == ReturnIterate::U ? u2 : x;
    double l1 = 0.0;
    for (double v : current) l1 += std::abs(v);
    result.objective_history.push_back(l1);
    result.iterations = it;
    if (options.observer) {
      options.observer(
          IterateView{it, x.span(), u1.span(), d1.span(), u2.span(), d2.span()});
    }
    if (stop_level > 0.0 && primal <= stop_level && std::hypot(du1, du2) <= stop_level) break;
  }

  result.abundances = cfg.return_iterate == ReturnIterate::U ? std::move(u2) : std::move(x);
  report_feasibility(lib, y, result);
  return result;
}

SolveResult solve(const SpectralLibrary& lib, const DenseVector& y, const SolverConfig& cfg,
                  const Options& options) {
  validate(lib, y, cfg);
  const Workspace ws = prepare(lib, cfg);
  return solve(ws, y, cfg, options);
}

}  // namespace unmix::csunsal
