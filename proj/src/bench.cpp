#include "unmix/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "unmix/csunsal.hpp"
#include "unmix/error.hpp"
#include "unmix/oracles.hpp"
#include "unmix/sunsal.hpp"

namespace unmix::bench {

namespace {

using Clock = std::chrono::steady_clock;

sunsal::Options untracked_options() {
  sunsal::Options options;
  options.track_objective = false;
  return options;
}

const sunsal::Options untracked = untracked_options();

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs fn(0..count-1) on up to `threads` workers; rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  const std::size_t used = std::min(threads, count);
  workers.reserve(used);
  for (std::size_t t = 0; t < used; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

double squared_error(const DenseVector& a, const DenseVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = a[i] - b[i];
    s += e * e;
  }
  return s;
}

double squared_norm(const DenseVector& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

struct Trial {
  std::vector<RunRecord> records;
  double signal = 0.0;
  double error = 0.0;
};

// Solves every observation with `solve_one` and accumulates the energies.
template <typename SolveOne>
Trial run_trial(const std::vector<datagen::SyntheticObservation>& observations,
                const std::vector<std::uint64_t>& seeds, std::size_t threads,
                SolveOne&& solve_one) {
  Trial trial;
  trial.records.resize(observations.size());
  parallel_for(observations.size(), threads, [&](std::size_t r) {
    RunRecord& rec = trial.records[r];
    rec.run = r;
    rec.seed = seeds[r];
    rec.realized_snr_db = observations[r].realized_snr_db;
    const DenseVector x_hat = solve_one(observations[r], rec);
    rec.signal_energy = squared_norm(observations[r].x_true);
    rec.error_energy = squared_error(observations[r].x_true, x_hat);
    rec.rsnr_db = rsnr_from_energies(rec.signal_energy, rec.error_energy);
  });
  for (const RunRecord& rec : trial.records) {
    trial.signal += rec.signal_energy;
    trial.error += rec.error_energy;
  }
  return trial;
}

std::string format_number(double v, int digits) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace

std::string solver_name(SolverKind solver, BaselineKind baseline) {
  switch (solver) {
    case SolverKind::Sunsal: return "sunsal";
    case SolverKind::Csunsal: return "csunsal";
    case SolverKind::Baseline: return baseline == BaselineKind::Nnls ? "nnls" : "fcls";
  }
  return "unknown";
}

double rsnr_from_energies(double signal_energy, double error_energy) {
  if (!(error_energy > 0.0)) return kRsnrCapDb;
  return std::min(kRsnrCapDb, 10.0 * std::log10(signal_energy / error_energy));
}

double rsnr(const DenseVector& x_true, const DenseVector& x_hat) {
  if (x_true.size() != x_hat.size()) {
    throw Error(ErrorCode::DimensionMismatch, "rsnr operands differ in length");
  }
  return rsnr_from_energies(squared_norm(x_true), squared_error(x_true, x_hat));
}

std::vector<double> default_lambda_factors() {
  std::vector<double> f;
  for (int i = 0; i <= 8; ++i) f.push_back(std::pow(10.0, -4.0 + 0.5 * i));
  return f;
}

BenchReport run_benchmark(const std::vector<datagen::SynthesisSpec>& grid,
                          const std::vector<SolverKind>& solvers, const BenchOptions& options) {
  if (options.runs == 0) throw Error(ErrorCode::InvalidArgument, "runs must be at least 1");
  if (options.iterations == 0) throw Error(ErrorCode::InvalidArgument, "iterations must be at least 1");
  if (options.lambda_factors.empty()) {
    throw Error(ErrorCode::InvalidArgument, "lambda sweep must not be empty");
  }

  BenchReport report;
  report.seed = grid.empty() ? 0 : grid.front().seed;
  report.iterations = options.iterations;

  // Libraries and workspaces are shared by every cell that can use them.
  std::map<std::tuple<std::size_t, std::size_t, std::uint64_t>, std::unique_ptr<SpectralLibrary>>
      libraries;
  std::map<const SpectralLibrary*, std::unique_ptr<sunsal::Workspace>> sunsal_workspaces;
  std::map<const SpectralLibrary*, std::unique_ptr<csunsal::Workspace>> csunsal_workspaces;

  auto library_for = [&](const datagen::SynthesisSpec& spec) -> const SpectralLibrary& {
    if (options.library) return *options.library;
    auto& slot = libraries[{spec.k, spec.n, spec.seed}];
    if (!slot) {
      slot = std::make_unique<SpectralLibrary>(
          datagen::gaussian_library(spec.k, spec.n, datagen::derive_seed(spec.seed, 0xA11CE)));
    }
    return *slot;
  };

  for (const SolverKind solver : solvers) {
    for (const datagen::SynthesisSpec& base_spec : grid) {
      BenchCell cell;
      cell.solver = solver;
      cell.solver_name = solver_name(solver, options.baseline);
      cell.snr_db = base_spec.target_snr_db;
      cell.runs = options.runs;
      cell.s = base_spec.s;
      try {
        const SpectralLibrary& lib = library_for(base_spec);
        datagen::SynthesisSpec spec = base_spec;
        spec.k = lib.bands();
        spec.n = lib.signatures();
        datagen::check(spec);
        cell.k = spec.k;
        cell.n = spec.n;

        std::vector<std::uint64_t> seeds(options.runs);
        std::vector<datagen::SyntheticObservation> observations(options.runs);
        for (std::size_t r = 0; r < options.runs; ++r) {
          seeds[r] = datagen::derive_seed(base_spec.seed, r);
          datagen::SynthesisSpec run_spec = spec;
          run_spec.seed = seeds[r];
          observations[r] = datagen::draw_observation(lib, run_spec);
        }

        Trial chosen;
        switch (solver) {
          case SolverKind::Sunsal: {
            cell.mu = options.sunsal_mu;
            auto& ws = sunsal_workspaces[&lib];
            if (!ws) {
              const auto start = Clock::now();
              ws = std::make_unique<sunsal::Workspace>(lib, options.sunsal_mu, true);
              report.sunsal_prepare_s += seconds_since(start);
            }
            double best = -std::numeric_limits<double>::infinity();
            for (const double factor : options.lambda_factors) {
              Trial trial = run_trial(
                  observations, seeds, options.threads,
                  [&](const datagen::SyntheticObservation& obs, RunRecord& rec) {
                    SolverConfig cfg;
                    cfg.kind = ProblemKind::Csr;
                    cfg.mu = options.sunsal_mu;
                    cfg.max_iters = options.iterations;
                    cfg.lambda =
                        factor * norm_inf(matvec_transposed(lib.matrix(), obs.y_noisy).span());
                    const auto start = Clock::now();
                    SolveResult res = sunsal::solve(*ws, obs.y_noisy, cfg, untracked);
                    rec.time_s = seconds_since(start);
                    rec.lambda = cfg.lambda;
                    rec.iterations = res.iterations;
                    rec.data_residual = res.data_residual;
                    rec.asc_violation = res.asc_violation;
                    rec.anc_violation = res.anc_violation;
                    return res.abundances;
                  });
              const double value = rsnr_from_energies(trial.signal, trial.error);
              cell.lambda_sweep.push_back({factor, value});
              if (value > best) {
                best = value;
                cell.lambda_factor = factor;
                chosen = std::move(trial);
              }
            }
            break;
          }
          case SolverKind::Csunsal: {
            cell.mu = options.csunsal_mu;
            auto& ws = csunsal_workspaces[&lib];
            if (!ws) {
              const auto start = Clock::now();
              ws = std::make_unique<csunsal::Workspace>(lib, true);
              report.csunsal_prepare_s += seconds_since(start);
            }
            chosen = run_trial(observations, seeds, options.threads,
                               [&](const datagen::SyntheticObservation& obs, RunRecord& rec) {
                                 SolverConfig cfg;
                                 cfg.kind = ProblemKind::Cbpdn;
                                 cfg.mu = options.csunsal_mu;
                                 cfg.lambda = options.csunsal_lambda;
                                 cfg.delta = norm2(obs.noise.span());
                                 cfg.max_iters = options.iterations;
                                 const auto start = Clock::now();
                                 SolveResult res = csunsal::solve(*ws, obs.y_noisy, cfg);
                                 rec.time_s = seconds_since(start);
                                 rec.lambda = cfg.lambda;
                                 rec.delta = cfg.delta;
                                 rec.iterations = res.iterations;
                                 rec.data_residual = res.data_residual;
                                 rec.asc_violation = res.asc_violation;
                                 rec.anc_violation = res.anc_violation;
                                 return res.abundances;
                               });
            break;
          }
          case SolverKind::Baseline: {
            chosen = run_trial(observations, seeds, options.threads,
                               [&](const datagen::SyntheticObservation& obs, RunRecord& rec) {
                                 const auto start = Clock::now();
                                 DenseVector x = options.baseline == BaselineKind::Nnls
                                                     ? oracles::nnls(lib.matrix(), obs.y_noisy)
                                                     : oracles::fcls(lib.matrix(), obs.y_noisy);
                                 rec.time_s = seconds_since(start);
                                 SolveResult res;
                                 res.abundances = x;
                                 report_feasibility(lib, obs.y_noisy, res);
                                 rec.data_residual = res.data_residual;
                                 rec.asc_violation = res.asc_violation;
                                 rec.anc_violation = res.anc_violation;
                                 return x;
                               });
            break;
          }
        }

        double lambda_sum = 0.0;
        double delta_sum = 0.0;
        for (std::size_t r = 0; r < options.runs; ++r) {
          cell.total_time_s += chosen.records[r].time_s;
          lambda_sum += chosen.records[r].lambda;
          delta_sum += chosen.records[r].delta;
        }
        cell.rsnr_db = rsnr_from_energies(chosen.signal, chosen.error);
        const auto runs = static_cast<double>(options.runs);
        cell.mean_time_s = cell.total_time_s / runs;
        cell.mean_lambda = lambda_sum / runs;
        cell.mean_delta = delta_sum / runs;
        cell.details = std::move(chosen.records);
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
        cell.rsnr_db = std::numeric_limits<double>::quiet_NaN();
        cell.mean_time_s = std::numeric_limits<double>::quiet_NaN();
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

void write_csv(std::ostream& out, const BenchReport& report, bool include_timing) {
  out << "solver,snr_db,rsnr_db,time_s,lambda,delta,mu,runs\n";
  for (const BenchCell& c : report.cells) {
    out << c.solver_name << ',' << format_number(c.snr_db, 10) << ','
        << format_number(c.rsnr_db, 10) << ','
        << (include_timing ? format_number(c.mean_time_s, 6) : std::string("NA")) << ','
        << format_number(c.mean_lambda, 10) << ',' << format_number(c.mean_delta, 10) << ','
        << format_number(c.mu, 10) << ',' << c.runs << '\n';
  }
}

void write_table(std::ostream& out, const BenchReport& report) {
  std::vector<std::string> solvers;
  std::vector<double> snrs;
  for (const BenchCell& c : report.cells) {
    if (std::find(solvers.begin(), solvers.end(), c.solver_name) == solvers.end())
      solvers.push_back(c.solver_name);
    if (std::find(snrs.begin(), snrs.end(), c.snr_db) == snrs.end()) snrs.push_back(c.snr_db);
  }
  auto find_cell = [&](const std::string& name, double snr) -> const BenchCell* {
    for (const BenchCell& c : report.cells)
      if (c.solver_name == name && c.snr_db == snr) return &c;
    return nullptr;
  };

  out << std::left << std::setw(8) << "SNR";
  for (const auto& s : solvers) out << " | " << std::setw(21) << s;
  out << '\n' << std::setw(8) << "(dB)";
  for (std::size_t i = 0; i < solvers.size(); ++i) {
    out << " | " << std::setw(10) << "RSNR(dB)" << ' ' << std::setw(10) << "time(s)";
  }
  out << '\n';
  for (double snr : snrs) {
    out << std::setw(8) << format_number(snr, 6);
    for (const auto& s : solvers) {
      const BenchCell* c = find_cell(s, snr);
      if (c == nullptr) {
        out << " | " << std::setw(21) << "-";
      } else if (c->failed) {
        out << " | " << std::setw(21) << "FAILED";
      } else {
        char rs[32];
        char ts[32];
        std::snprintf(rs, sizeof rs, "%.2f", c->rsnr_db);
        std::snprintf(ts, sizeof ts, "%.4g", c->mean_time_s);
        out << " | " << std::setw(10) << rs << ' ' << std::setw(10) << ts;
      }
    }
    out << '\n';
  }
  out << std::right;
  out << "iterations: " << report.iterations << ", seed: " << report.seed
      << ", workspace setup (s): sunsal " << format_number(report.sunsal_prepare_s, 4)
      << ", csunsal " << format_number(report.csunsal_prepare_s, 4) << '\n';
  for (const BenchCell& c : report.cells) {
    if (c.failed) {
      out << c.solver_name << " @ " << format_number(c.snr_db, 6) << " dB failed: " << c.error
          << '\n';
    } else if (c.solver == SolverKind::Sunsal) {
      out << "sunsal @ " << format_number(c.snr_db, 6)
          << " dB: lambda = " << format_number(c.lambda_factor, 4)
          << " x ||A^T y||_inf, mu = " << format_number(c.mu, 4) << '\n';
    } else if (c.solver == SolverKind::Csunsal) {
      out << "csunsal @ " << format_number(c.snr_db, 6)
          << " dB: delta = ||noise||_2 (mean " << format_number(c.mean_delta, 4)
          << "), mu = " << format_number(c.mu, 4) << '\n';
    }
  }
}

void write_json(std::ostream& out, const BenchReport& report, bool include_timing) {
  using nlohmann::json;
  json doc;
  doc["schema"] = 1;
  doc["seed"] = report.seed;
  doc["iterations"] = report.iterations;
  if (include_timing) {
    doc["prepare_time_s"] = {{"sunsal", report.sunsal_prepare_s},
                             {"csunsal", report.csunsal_prepare_s}};
  }
  json cells = json::array();
  for (const BenchCell& c : report.cells) {
    json jc;
    jc["solver"] = c.solver_name;
    jc["snr_db"] = c.snr_db;
    jc["k"] = c.k;
    jc["n"] = c.n;
    jc["s"] = c.s;
    jc["runs"] = c.runs;
    jc["failed"] = c.failed;
    if (c.failed) {
      jc["error"] = c.error;
      cells.push_back(std::move(jc));
      continue;
    }
    jc["rsnr_db"] = c.rsnr_db;
    if (include_timing) {
      jc["mean_time_s"] = c.mean_time_s;
      jc["total_time_s"] = c.total_time_s;
    }
    jc["mu"] = c.mu;
    jc["mean_lambda"] = c.mean_lambda;
    jc["mean_delta"] = c.mean_delta;
    if (c.solver == SolverKind::Sunsal) {
      jc["lambda_factor"] = c.lambda_factor;
      json sweep = json::array();
      for (const LambdaTrial& t : c.lambda_sweep) {
        sweep.push_back({{"factor", t.factor}, {"rsnr_db", t.rsnr_db}});
      }
      jc["lambda_sweep"] = std::move(sweep);
    }
    json details = json::array();
    for (const RunRecord& r : c.details) {
      json jr = {{"run", r.run},
                 {"seed", r.seed},
                 {"realized_snr_db", r.realized_snr_db},
                 {"rsnr_db", r.rsnr_db},
                 {"signal_energy", r.signal_energy},
                 {"error_energy", r.error_energy},
                 {"lambda", r.lambda},
                 {"delta", r.delta},
                 {"iterations", r.iterations},
                 {"data_residual", r.data_residual},
                 {"asc_violation", r.asc_violation},
                 {"anc_violation", r.anc_violation}};
      if (include_timing) jr["time_s"] = r.time_s;
      details.push_back(std::move(jr));
    }
    jc["per_run"] = std::move(details);
    cells.push_back(std::move(jc));
  }
  doc["cells"] = std::move(cells);
  out << doc.dump(2) << '\n';
}

double sunsal_seconds_per_iteration(const SpectralLibrary& lib, const DenseVector& y,
                                    const SolverConfig& cfg, std::size_t repeats) {
  validate(lib, y, cfg);
  SolverConfig timed = cfg;
  timed.primal_tol = 0.0;
  const sunsal::Workspace ws = sunsal::prepare(lib, timed);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < std::max<std::size_t>(repeats, 1); ++r) {
    const auto start = Clock::now();
    const SolveResult res = sunsal::solve(ws, y, timed, untracked);
    best = std::min(best, seconds_since(start) / static_cast<double>(res.iterations));
  }
  return best;
}

}  // namespace unmix::bench
