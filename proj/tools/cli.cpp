#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "unmix/bench.hpp"
#include "unmix/csunsal.hpp"
#include "unmix/datagen.hpp"
#include "unmix/error.hpp"
#include "unmix/problem.hpp"
#include "unmix/sunsal.hpp"

#ifndef UNMIX_EXAMPLE_LIBRARY
#define UNMIX_EXAMPLE_LIBRARY "data/example_library.txt"
#endif

namespace unmix::cli {

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitDiverged = 2;

// Bad flag values detected before any work starts.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_finite(double v, const char* flag) {
  if (!std::isfinite(v)) throw UsageError(std::string(flag) + " must be finite, got " + num(v));
}

struct SolveArgs {
  std::string library;
  std::string observation;
  std::string problem = "csr";
  std::optional<double> lambda;
  double delta = 0.0;
  std::optional<double> mu;
  std::size_t iters = 200;
  double tol = 0.0;
  bool no_asc = false;
  bool no_anc = false;
  std::string return_iterate = "u";
  bool json = false;
  std::string out;
  bool verbose = false;
};

struct SynthArgs {
  std::size_t k = 200;
  std::size_t n = 400;
  std::size_t s = 5;
  double snr = 30.0;
  std::uint64_t seed = 1;
  std::string noise = "lowpass";
  std::size_t window = 9;
  std::string library;
  std::string out_dir = ".";
  std::string prefix = "synth";
};

struct BenchArgs {
  std::string preset = "table1";
  std::string library;
  std::size_t runs = 10;
  std::vector<double> snr;
  std::uint64_t seed = 1;
  std::size_t iters = 200;
  std::optional<std::size_t> k;
  std::optional<std::size_t> n;
  std::size_t s = 5;
  double mu = 0.01;
  double csunsal_mu = 10.0;
  double csunsal_lambda = 1.0;
  std::vector<double> lambda_factors = bench::default_lambda_factors();
  std::string baseline = "nnls";
  std::vector<std::string> solvers{"sunsal", "csunsal", "baseline"};
  std::optional<std::size_t> threads;
  bool timing = false;
  bool no_timing = false;
  std::string csv;
  std::string json;
  std::string format = "csv";
  bool verbose = false;
};

// ---- solve ----

double default_mu(ProblemKind kind) { return is_penalized(kind) ? 0.01 : 10.0; }

double default_lambda(ProblemKind kind, const SpectralLibrary& lib, const DenseVector& y) {
  switch (kind) {
    case ProblemKind::Cls: return 0.0;
    case ProblemKind::Csr: return 1e-3 * norm_inf(matvec_transposed(lib.matrix(), y).span());
    default: return 1.0;
  }
}

void check_solve_flags(const SolveArgs& a, ProblemKind kind) {
  if (a.mu) {
    require_finite(*a.mu, "--mu");
    if (!(*a.mu > 0.0)) throw UsageError("--mu must be positive, got " + num(*a.mu));
  }
  if (a.lambda) {
    require_finite(*a.lambda, "--lambda");
    if (*a.lambda < 0.0) throw UsageError("--lambda must be non-negative, got " + num(*a.lambda));
    if (kind == ProblemKind::Cls && *a.lambda != 0.0) {
      throw UsageError("--lambda must be 0 for --problem cls (use csr for a sparsity weight)");
    }
  }
  require_finite(a.delta, "--delta");
  if (a.delta < 0.0) throw UsageError("--delta must be non-negative, got " + num(a.delta));
  if (kind == ProblemKind::Cbp && a.delta != 0.0) {
    throw UsageError("--delta must be 0 for --problem cbp (use cbpdn for a nonzero radius)");
  }
  if (a.iters == 0) throw UsageError("--iters must be at least 1");
  require_finite(a.tol, "--tol");
  if (a.tol < 0.0) throw UsageError("--tol must be non-negative, got " + num(a.tol));
}

DenseMatrix read_input(const std::string& path, const char* what) {
  try {
    return datagen::read_matrix_file(path);
  } catch (const unmix::ParseError& e) {
    throw UsageError(std::string(what) + " " + path + ": line " + std::to_string(e.line()) +
                     ": " + e.what());
  } catch (const Error& e) {
    throw UsageError(std::string(what) + " " + path + ": " + e.what());
  }
}

int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const ProblemKind kind = *parse_problem_kind(a.problem);
  check_solve_flags(a, kind);

  const SpectralLibrary lib = [&] {
    DenseMatrix m = read_input(a.library, "library");
    try {
      return SpectralLibrary(std::move(m));
    } catch (const Error& e) {
      throw UsageError("library " + a.library + ": " + e.what());
    }
  }();
  const DenseMatrix obs = read_input(a.observation, "observation");
  if (obs.rows() != lib.bands()) {
    throw UsageError("observation " + a.observation + " has " + std::to_string(obs.rows()) +
                     " rows but the library has " + std::to_string(lib.bands()) + " bands");
  }

  SolverConfig cfg;
  cfg.kind = kind;
  cfg.delta = a.delta;
  cfg.mu = a.mu.value_or(default_mu(kind));
  cfg.enforce_asc = !a.no_asc;
  cfg.enforce_anc = !a.no_anc;
  cfg.max_iters = a.iters;
  cfg.primal_tol = a.tol;
  cfg.return_iterate = a.return_iterate == "x" ? ReturnIterate::X : ReturnIterate::U;

  std::optional<sunsal::Workspace> sws;
  std::optional<csunsal::Workspace> cws;
  if (is_penalized(kind)) {
    sws.emplace(lib, cfg.mu, cfg.enforce_asc);
  } else {
    cws.emplace(lib, cfg.enforce_asc);
  }

  const std::size_t n = lib.signatures();
  const std::size_t m = obs.cols();
  DenseMatrix x_hat(n, m);
  std::vector<SolveResult> results;
  std::vector<double> lambdas;
  for (std::size_t j = 0; j < m; ++j) {
    const DenseVector y = obs.column(j);
    SolverConfig col_cfg = cfg;
    col_cfg.lambda = a.lambda.value_or(default_lambda(kind, lib, y));
    SolveResult r = sws ? sunsal::solve(*sws, y, col_cfg) : csunsal::solve(*cws, y, col_cfg);
    if (a.verbose) {
      for (std::size_t i = 0; i < r.iterations; ++i) {
        err << "column " << j << " iter " << i + 1 << " primal "
            << num(r.primal_residual_history[i]) << " dual " << num(r.dual_residual_history[i]);
        if (i < r.objective_history.size()) err << " objective " << num(r.objective_history[i]);
        err << '\n';
      }
    }
    for (std::size_t i = 0; i < n; ++i) x_hat(i, j) = r.abundances[i];
    lambdas.push_back(col_cfg.lambda);
    results.push_back(std::move(r));
  }

  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw UsageError("--out: cannot write " + a.out);
  }
  std::ostream& dest = a.out.empty() ? out : file;

  if (a.json) {
    using nlohmann::json;
    json doc;
    doc["schema"] = 1;
    doc["problem"] = std::string(to_string(kind));
    doc["mu"] = cfg.mu;
    doc["delta"] = cfg.delta;
    doc["max_iters"] = cfg.max_iters;
    doc["asc"] = cfg.enforce_asc;
    doc["anc"] = cfg.enforce_anc;
    doc["return"] = a.return_iterate;
    json cols = json::array();
    for (std::size_t j = 0; j < m; ++j) {
      const SolveResult& r = results[j];
      json c;
      c["lambda"] = lambdas[j];
      c["iterations"] = r.iterations;
      c["abundances"] = r.abundances.values();
      c["primal_residual"] = r.primal_residual_history.back();
      c["dual_residual"] = r.dual_residual_history.back();
      if (!r.objective_history.empty()) c["objective"] = r.objective_history.back();
      c["asc_violation"] = r.asc_violation;
      c["anc_violation"] = r.anc_violation;
      c["data_residual"] = r.data_residual;
      cols.push_back(std::move(c));
    }
    doc["columns"] = std::move(cols);
    dest << doc.dump(2) << '\n';
  } else {
    datagen::write_matrix(dest, x_hat);
  }
  if (!dest) throw Error(ErrorCode::Io, "write failed");
  return 0;
}

// ---- synth ----

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  datagen::SynthesisSpec spec;
  spec.k = a.k;
  spec.n = a.n;
  spec.s = a.s;
  spec.target_snr_db = a.snr;
  spec.seed = a.seed;
  spec.noise_kind = a.noise == "white" ? datagen::NoiseKind::White : datagen::NoiseKind::Lowpass;
  spec.lowpass_window = a.window;

  std::optional<SpectralLibrary> lib;
  if (!a.library.empty()) {
    DenseMatrix m = read_input(a.library, "library");
    try {
      lib.emplace(std::move(m));
    } catch (const Error& e) {
      throw UsageError("library " + a.library + ": " + e.what());
    }
    spec.k = lib->bands();
    spec.n = lib->signatures();
  }
  require_finite(a.snr, "--snr");
  if (spec.k == 0) throw UsageError("--k must be at least 1");
  if (spec.n == 0) throw UsageError("--n must be at least 1");
  if (spec.s == 0) throw UsageError("--s must be at least 1");
  if (spec.s > spec.n) {
    throw UsageError("--s must not exceed the number of signatures (" + std::to_string(spec.n) +
                     "), got " + std::to_string(spec.s));
  }
  if (spec.lowpass_window == 0 || spec.lowpass_window % 2 == 0) {
    throw UsageError("--window must be odd and positive, got " + std::to_string(a.window));
  }

  const datagen::SyntheticProblem p = lib ? datagen::synthesize(*lib, spec)
                                          : datagen::synthesize(spec);
  const std::filesystem::path dir(a.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw UsageError("--out-dir: cannot create " + a.out_dir + ": " + ec.message());
  const auto lib_path = dir / (a.prefix + "_library.txt");
  const auto x_path = dir / (a.prefix + "_x_true.txt");
  const auto y_path = dir / (a.prefix + "_y.txt");
  datagen::save_library(lib_path, p.library);
  datagen::write_matrix_file(x_path, datagen::as_column(p.observation.x_true));
  datagen::write_matrix_file(y_path, datagen::as_column(p.observation.y_noisy));

  out << "library " << lib_path.string() << '\n';
  out << "x_true " << x_path.string() << '\n';
  out << "y " << y_path.string() << '\n';
  out << "realized_snr_db " << num(p.observation.realized_snr_db) << '\n';
  return 0;
}

// ---- bench ----

std::size_t resolve_threads(const BenchArgs& a) {
  if (a.threads) {
    if (*a.threads == 0) throw UsageError("--threads must be at least 1");
    return *a.threads;
  }
  if (const char* env = std::getenv("UNMIX_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) {
      throw UsageError(std::string("UNMIX_THREADS must be a positive integer, got '") + env + "'");
    }
    return static_cast<std::size_t>(v);
  }
  if (a.timing) return 1;
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  if (a.runs == 0) throw UsageError("--runs must be at least 1");
  if (a.iters == 0) throw UsageError("--iters must be at least 1");
  if (a.s == 0) throw UsageError("--s must be at least 1");
  require_finite(a.mu, "--mu");
  require_finite(a.csunsal_mu, "--csunsal-mu");
  require_finite(a.csunsal_lambda, "--csunsal-lambda");
  if (!(a.mu > 0.0)) throw UsageError("--mu must be positive, got " + num(a.mu));
  if (!(a.csunsal_mu > 0.0)) {
    throw UsageError("--csunsal-mu must be positive, got " + num(a.csunsal_mu));
  }
  if (a.csunsal_lambda < 0.0) {
    throw UsageError("--csunsal-lambda must be non-negative, got " + num(a.csunsal_lambda));
  }
  if (a.lambda_factors.empty()) throw UsageError("--lambda-factors must not be empty");
  for (double f : a.lambda_factors) {
    require_finite(f, "--lambda-factors");
    if (f < 0.0) throw UsageError("--lambda-factors must be non-negative, got " + num(f));
  }
  for (double v : a.snr) require_finite(v, "--snr");
  if (a.timing && a.no_timing) throw UsageError("--timing and --no-timing are exclusive");

  bench::BenchOptions options;
  options.runs = a.runs;
  options.iterations = a.iters;
  options.sunsal_mu = a.mu;
  options.csunsal_mu = a.csunsal_mu;
  options.csunsal_lambda = a.csunsal_lambda;
  options.lambda_factors = a.lambda_factors;
  options.baseline = a.baseline == "fcls" ? bench::BaselineKind::Fcls : bench::BaselineKind::Nnls;
  options.threads = resolve_threads(a);

  std::string library_path = a.library;
  std::vector<double> snrs = a.snr;
  if (a.preset == "table1") {
    if (snrs.empty()) snrs = {20.0, 30.0, 40.0, 50.0};
  } else {
    if (snrs.empty()) snrs = {30.0, 40.0, 50.0};
    if (library_path.empty()) library_path = UNMIX_EXAMPLE_LIBRARY;
  }
  if (!library_path.empty()) {
    if (a.k || a.n) throw UsageError("--k and --n cannot be combined with a library file");
    DenseMatrix m = read_input(library_path, "library");
    try {
      options.library.emplace(std::move(m));
    } catch (const Error& e) {
      throw UsageError("library " + library_path + ": " + e.what());
    }
  }
  const std::size_t k = options.library ? options.library->bands() : a.k.value_or(200);
  const std::size_t n = options.library ? options.library->signatures() : a.n.value_or(400);
  if (k == 0) throw UsageError("--k must be at least 1");
  if (n == 0) throw UsageError("--n must be at least 1");
  if (a.s > n) {
    throw UsageError("--s must not exceed the number of signatures (" + std::to_string(n) +
                     "), got " + std::to_string(a.s));
  }

  std::vector<datagen::SynthesisSpec> grid;
  for (double snr : snrs) {
    datagen::SynthesisSpec spec;
    spec.k = k;
    spec.n = n;
    spec.s = a.s;
    spec.target_snr_db = snr;
    spec.seed = a.seed;
    grid.push_back(spec);
  }
  std::vector<bench::SolverKind> solvers;
  for (const std::string& s : a.solvers) {
    if (s == "sunsal") solvers.push_back(bench::SolverKind::Sunsal);
    else if (s == "csunsal") solvers.push_back(bench::SolverKind::Csunsal);
    else solvers.push_back(bench::SolverKind::Baseline);
  }

  if (a.verbose) {
    err << "bench: " << grid.size() << " SNR levels x " << solvers.size() << " solvers, "
        << a.runs << " runs, " << options.threads << " threads, library " << k << "x" << n
        << '\n';
  }
  const bench::BenchReport report = bench::run_benchmark(grid, solvers, options);
  for (const bench::BenchCell& c : report.cells) {
    if (c.failed) {
      err << "warning: " << c.solver_name << " at " << num(c.snr_db) << " dB failed: " << c.error
          << '\n';
    } else if (a.verbose) {
      err << c.solver_name << " snr " << num(c.snr_db) << " rsnr " << num(c.rsnr_db)
          << " mean_time_s " << num(c.mean_time_s) << '\n';
      for (const bench::LambdaTrial& t : c.lambda_sweep) {
        err << "  lambda factor " << num(t.factor) << " rsnr " << num(t.rsnr_db) << '\n';
      }
    }
  }

  const bool with_timing = !a.no_timing;
  if (!a.csv.empty()) {
    std::ofstream f(a.csv);
    if (!f) throw UsageError("--csv: cannot write " + a.csv);
    bench::write_csv(f, report, with_timing);
  }
  if (!a.json.empty()) {
    std::ofstream f(a.json);
    if (!f) throw UsageError("--json: cannot write " + a.json);
    bench::write_json(f, report, with_timing);
  }
  if (a.format == "table") {
    bench::write_table(out, report);
  } else {
    bench::write_csv(out, report, with_timing);
  }
  return 0;
}

std::string dflt(const std::string& text, const std::string& value) {
  return text + " (default: " + value + ")";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constrained sparse regression for spectral unmixing", "unmix"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  SolveArgs sa;
  CLI::App* solve = app.add_subcommand("solve", "Estimate abundances for each column of OBS");
  solve->add_option("LIB", sa.library, "Library matrix file (bands x signatures)")->required();
  solve->add_option("OBS", sa.observation, "Observation matrix file (bands x pixels)")->required();
  solve->add_option("--problem", sa.problem, dflt("Problem: cls, csr, cbp or cbpdn", "csr"))
      ->check(CLI::IsMember({"cls", "csr", "cbp", "cbpdn"}, CLI::ignore_case));
  solve->add_option("--lambda", sa.lambda,
                    dflt("Sparsity weight; for cbp/cbpdn it scales the l1 step lambda/mu",
                         "0 for cls, 1e-3*||A^T y||_inf for csr, 1 for cbp/cbpdn"));
  solve->add_option("--delta", sa.delta, dflt("Data-fit radius for cbpdn", "0"));
  solve->add_option("--mu", sa.mu,
                    dflt("Augmented Lagrangian weight", "0.01 for cls/csr, 10 for cbp/cbpdn"));
  solve->add_option("--iters", sa.iters, dflt("Maximum iterations", "200"));
  solve->add_option("--tol", sa.tol,
                    dflt("Stop when the primal residual is below tol*sqrt(n); 0 disables", "0"));
  solve->add_flag("--no-asc", sa.no_asc, dflt("Drop the sum-to-one constraint", "off"));
  solve->add_flag("--no-anc", sa.no_anc, dflt("Drop the non-negativity constraint", "off"));
  solve->add_option("--return", sa.return_iterate, dflt("Iterate to return: x or u", "u"))
      ->check(CLI::IsMember({"x", "u"}));
  solve->add_flag("--json", sa.json, dflt("Write JSON with residuals instead of a matrix", "off"));
  solve->add_option("--out", sa.out, dflt("Output file", "standard output"));
  solve->add_flag("--verbose", sa.verbose, dflt("Log residuals per iteration to stderr", "off"));

  SynthArgs ya;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic problem y = Ax + noise");
  synth->add_option("--k", ya.k, dflt("Bands", "200"));
  synth->add_option("--n", ya.n, dflt("Signatures", "400"));
  synth->add_option("--s", ya.s, dflt("Nonzero abundances", "5"));
  synth->add_option("--snr", ya.snr, dflt("Target SNR in dB", "30"));
  synth->add_option("--seed", ya.seed, dflt("Base seed", "1"));
  synth->add_option("--noise", ya.noise, dflt("Noise: lowpass or white", "lowpass"))
      ->check(CLI::IsMember({"lowpass", "white"}));
  synth->add_option("--window", ya.window, dflt("Moving-average length for lowpass noise", "9"));
  synth->add_option("--library", ya.library,
                    dflt("Library file; overrides --k and --n", "Gaussian library from --seed"));
  synth->add_option("--out-dir", ya.out_dir, dflt("Output directory", "."));
  synth->add_option("--prefix", ya.prefix,
                    dflt("File prefix for <prefix>_library/_x_true/_y.txt", "synth"));

  BenchArgs ba;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Run the synthetic benchmark grid");
  bench_cmd
      ->add_option("--preset", ba.preset,
                   dflt("table1 (Gaussian 200x400, SNR 20..50) or table2-like (bundled example "
                        "library, SNR 30..50)",
                        "table1"))
      ->check(CLI::IsMember({"table1", "table2-like"}));
  bench_cmd->add_option("--library", ba.library,
                        dflt("Library file used for every cell", "preset library"));
  bench_cmd->add_option("--runs", ba.runs, dflt("Runs per cell", "10"));
  bench_cmd->add_option("--snr", ba.snr, dflt("SNR levels in dB", "preset levels"))
      ->delimiter(',');
  bench_cmd->add_option("--seed", ba.seed, dflt("Base seed", "1"));
  bench_cmd->add_option("--iters", ba.iters, dflt("ADMM iterations", "200"));
  bench_cmd->add_option("--k", ba.k, dflt("Bands of the Gaussian library", "200"));
  bench_cmd->add_option("--n", ba.n, dflt("Signatures of the Gaussian library", "400"));
  bench_cmd->add_option("--s", ba.s, dflt("Nonzero abundances", "5"));
  bench_cmd->add_option("--mu", ba.mu, dflt("SUnSAL mu", "0.01"));
  bench_cmd->add_option("--csunsal-mu", ba.csunsal_mu, dflt("C-SUnSAL mu", "10"));
  bench_cmd->add_option("--csunsal-lambda", ba.csunsal_lambda, dflt("C-SUnSAL l1 weight", "1"));
  bench_cmd
      ->add_option("--lambda-factors", ba.lambda_factors,
                   dflt("SUnSAL lambda sweep as multiples of ||A^T y||_inf", "1e-4..1 in 9 steps"))
      ->delimiter(',');
  bench_cmd->add_option("--baseline", ba.baseline, dflt("Baseline: nnls or fcls", "nnls"))
      ->check(CLI::IsMember({"nnls", "fcls"}));
  bench_cmd
      ->add_option("--solvers", ba.solvers,
                   dflt("Solvers to run: sunsal, csunsal, baseline", "all three"))
      ->delimiter(',')
      ->check(CLI::IsMember({"sunsal", "csunsal", "baseline"}));
  bench_cmd->add_option("--threads", ba.threads,
                        dflt("Worker threads", "UNMIX_THREADS, else logical cores; 1 with --timing"));
  bench_cmd->add_flag("--timing", ba.timing, dflt("Timing mode: run sequentially", "off"));
  bench_cmd->add_flag("--no-timing", ba.no_timing,
                      dflt("Leave timings out of CSV and JSON", "off"));
  bench_cmd->add_option("--csv", ba.csv, dflt("Also write the CSV report to a file", "none"));
  bench_cmd->add_option("--json", ba.json, dflt("Write per-run JSON detail to a file", "none"));
  bench_cmd->add_option("--format", ba.format, dflt("Standard output format: csv or table", "csv"))
      ->check(CLI::IsMember({"csv", "table"}));
  bench_cmd->add_flag("--verbose", ba.verbose, dflt("Log per-cell progress to stderr", "off"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(sa, out, err);
    if (synth->parsed()) return cmd_synth(ya, out);
    return cmd_bench(ba, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NonFinite) {
      err << "error: solver diverged: " << e.what() << '\n';
      return kExitDiverged;
    }
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace unmix::cli
