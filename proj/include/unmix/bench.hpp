#pragma once

// Benchmark harness: repeated synthetic runs per (solver, SNR) cell, mean
// reconstruction SNR and wall time, and CSV / table / JSON reports.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unmix/datagen.hpp"
#include "unmix/linalg.hpp"
#include "unmix/problem.hpp"

namespace unmix::bench {

enum class SolverKind { Sunsal, Csunsal, Baseline };
// The baseline mirrors a stock non-negative least squares call (Nnls) or the
// sum-constrained reduction (Fcls).
enum class BaselineKind { Nnls, Fcls };

std::string solver_name(SolverKind solver, BaselineKind baseline);

// Reported in place of +inf when the estimate is exact.
inline constexpr double kRsnrCapDb = 300.0;

// 10 log10(||x_true||^2 / ||x_true - x_hat||^2), capped at kRsnrCapDb.
double rsnr(const DenseVector& x_true, const DenseVector& x_hat);
// Same from accumulated energies, for ratios of sample means over runs.
double rsnr_from_energies(double signal_energy, double error_energy);

// 10^-4 ... 10^0 in half-decade steps (9 points).
std::vector<double> default_lambda_factors();

struct BenchOptions {
  std::size_t runs = 10;
  // SUnSAL lambda candidates, as multiples of ||A^T y||_inf per run. The
  // factor with the best mean RSNR is reported.
  std::vector<double> lambda_factors = default_lambda_factors();
  std::size_t iterations = 200;
  double sunsal_mu = 0.01;
  double csunsal_mu = 10.0;
  // C-SUnSAL prox weight; the step on u2 is csunsal_lambda / csunsal_mu.
  double csunsal_lambda = 1.0;
  BaselineKind baseline = BaselineKind::Nnls;
  std::size_t threads = 1;
  // Used for every cell when set; otherwise each cell draws a Gaussian
  // k x n library from its seed.
  std::optional<SpectralLibrary> library;
};

struct RunRecord {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  double realized_snr_db = 0.0;
  double rsnr_db = 0.0;
  double signal_energy = 0.0;  // ||x_true||^2
  double error_energy = 0.0;   // ||x_true - x_hat||^2
  double time_s = 0.0;
  double lambda = 0.0;
  double delta = 0.0;
  std::size_t iterations = 0;
  double data_residual = 0.0;
  double asc_violation = 0.0;
  double anc_violation = 0.0;
};

struct LambdaTrial {
  double factor = 0.0;
  double rsnr_db = 0.0;
};

struct BenchCell {
  SolverKind solver = SolverKind::Sunsal;
  std::string solver_name;
  double snr_db = 0.0;
  std::size_t k = 0;
  std::size_t n = 0;
  std::size_t s = 0;
  std::size_t runs = 0;
  // 10 log10(mean ||x||^2 / mean ||x - x_hat||^2) over the runs.
  double rsnr_db = 0.0;
  double mean_time_s = 0.0;   // per solve
  double total_time_s = 0.0;  // all runs of the reported configuration
  double lambda_factor = 0.0; // SUnSAL only
  double mean_lambda = 0.0;
  double mean_delta = 0.0;
  double mu = 0.0;
  bool failed = false;
  std::string error;
  std::vector<LambdaTrial> lambda_sweep;
  std::vector<RunRecord> details;
};

struct BenchReport {
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  // Workspace factorization time, amortized over every solve and excluded
  // from the per-solve times.
  double sunsal_prepare_s = 0.0;
  double csunsal_prepare_s = 0.0;
  std::vector<BenchCell> cells;
};

// Runs every (solver, grid cell) pair. Run r of every cell uses synthesis
// seed derive_seed(cell.seed, r), so cells that differ only in SNR see the same
// abundances and noise shape. SUnSAL solves CSR with the best lambda factor;
// C-SUnSAL solves CBPDN with delta = ||noise||_2 of each run; the baseline
// solves NNLS or FCLS. A failing cell is marked and the rest still run.
BenchReport run_benchmark(const std::vector<datagen::SynthesisSpec>& grid,
                          const std::vector<SolverKind>& solvers, const BenchOptions& options);

// solver,snr_db,rsnr_db,time_s,lambda,delta,mu,runs
void write_csv(std::ostream& out, const BenchReport& report, bool include_timing = true);
void write_table(std::ostream& out, const BenchReport& report);
// Full per-run detail, versioned with "schema": 1.
void write_json(std::ostream& out, const BenchReport& report, bool include_timing = true);

// Best-of-`repeats` wall time of one SUnSAL iteration on (lib, y), with the
// workspace built outside the timed region.
double sunsal_seconds_per_iteration(const SpectralLibrary& lib, const DenseVector& y,
                                    const SolverConfig& cfg, std::size_t repeats);

}  // namespace unmix::bench
