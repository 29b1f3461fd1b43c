#pragma once

// Synthetic unmixing problems y = A x + n and the plain-text matrix format.
//
// File format (UTF-8 text): the first non-comment line is "<rows> <cols>",
// followed by `rows` lines of `cols` whitespace-separated decimals. Lines whose
// first non-blank character is '#' and blank lines are skipped. Libraries
// are band-major (k rows, n columns); a single observation or abundance
// vector is a matrix with one column.

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "unmix/linalg.hpp"
#include "unmix/problem.hpp"

namespace unmix::datagen {

enum class NoiseKind { Lowpass, White };

struct SynthesisSpec {
  std::size_t k = 200;
  std::size_t n = 400;
  std::size_t s = 5;
  double target_snr_db = 30.0;
  NoiseKind noise_kind = NoiseKind::Lowpass;
  std::size_t lowpass_window = 9;
  std::uint64_t seed = 1;
};

// Throws Error(InvalidArgument) unless 1 <= s <= n, k >= 1, the window is odd
// and positive, and the target SNR is finite.
void check(const SynthesisSpec& spec);

struct NoisyObservation {
  DenseVector y;
  DenseVector noise;
  double realized_snr_db = 0.0;
};

struct SyntheticObservation {
  DenseVector x_true;
  DenseVector y_clean;
  DenseVector y_noisy;
  DenseVector noise;
  double realized_snr_db = 0.0;
};

struct SyntheticProblem {
  SpectralLibrary library;
  SyntheticObservation observation;
};

// Deterministic 64-bit seed mixing (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

// k x n matrix of i.i.d. N(0, 1) entries.
SpectralLibrary gaussian_library(std::size_t k, std::size_t n, std::uint64_t seed);

// s nonzeros at uniformly random positions, values uniform on the
// (s-1)-simplex via sorted uniform spacings.
DenseVector sparse_simplex_abundance(std::size_t n, std::size_t s, std::uint64_t seed);

// Zero-mean Gaussian noise, moving-average filtered along the bands for
// Lowpass (reflect padding), rescaled so 10 log10(||y||^2 / ||noise||^2)
// equals the target exactly for this draw.
NoisyObservation add_noise(const DenseVector& y_clean, const SynthesisSpec& spec,
                           std::uint64_t seed);

// Draws x and noise for `library` from spec.seed; spec.k and spec.n must
// match it. Specs differing only in target SNR share x and the noise shape.
SyntheticObservation draw_observation(const SpectralLibrary& library, const SynthesisSpec& spec);
SyntheticProblem synthesize(const SpectralLibrary& library, const SynthesisSpec& spec);
// Same, on a fresh Gaussian library drawn from spec.seed.
SyntheticProblem synthesize(const SynthesisSpec& spec);

DenseMatrix read_matrix(std::istream& in);
// 17 significant digits, so reading back is bit-exact.
void write_matrix(std::ostream& out, const DenseMatrix& m);
DenseMatrix read_matrix_file(const std::filesystem::path& path);
void write_matrix_file(const std::filesystem::path& path, const DenseMatrix& m);

SpectralLibrary load_library(const std::filesystem::path& path);
void save_library(const std::filesystem::path& path, const SpectralLibrary& lib);

DenseMatrix as_column(const DenseVector& v);

}  // namespace unmix::datagen
