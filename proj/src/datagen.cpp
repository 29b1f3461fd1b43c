#include "unmix/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "unmix/error.hpp"

namespace unmix::datagen {

namespace {

std::size_t reflect_index(std::ptrdiff_t j, std::size_t len) {
  if (len == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (len - 1));
  j = std::abs(j) % period;
  if (j >= static_cast<std::ptrdiff_t>(len)) j = period - j;
  return static_cast<std::size_t>(j);
}

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

bool skippable(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

template <typename T>
T parse_field(std::string_view field, std::size_t line_no, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(line_no, std::string("invalid ") + what + " '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

void check(const SynthesisSpec& spec) {
  if (spec.k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (spec.n == 0) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  if (spec.s == 0 || spec.s > spec.n) {
    throw Error(ErrorCode::InvalidArgument, "s must satisfy 1 <= s <= n");
  }
  if (spec.lowpass_window == 0 || spec.lowpass_window % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "lowpass window must be odd and positive");
  }
  if (!std::isfinite(spec.target_snr_db)) {
    throw Error(ErrorCode::InvalidArgument, "target SNR must be finite");
  }
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SpectralLibrary gaussian_library(std::size_t k, std::size_t n, std::uint64_t seed) {
  if (k == 0 || n == 0) throw Error(ErrorCode::InvalidArgument, "library dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> entries(k * n);
  for (double& v : entries) v = normal(rng);
  return SpectralLibrary(DenseMatrix(k, n, std::move(entries)));
}

DenseVector sparse_simplex_abundance(std::size_t n, std::size_t s, std::uint64_t seed) {
  if (s == 0 || s > n) throw Error(ErrorCode::InvalidArgument, "s must satisfy 1 <= s <= n");
  std::mt19937_64 rng(seed);

  // Partial Fisher-Yates: the first s entries become the support.
  std::vector<std::size_t> positions(n);
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  for (std::size_t i = 0; i < s; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(positions[i], positions[pick(rng)]);
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> values(s);
  while (true) {
    std::vector<double> cuts(s - 1);
    for (double& c : cuts) c = unit(rng);
    std::sort(cuts.begin(), cuts.end());
    double prev = 0.0;
    for (std::size_t i = 0; i + 1 < s; ++i) {
      values[i] = cuts[i] - prev;
      prev = cuts[i];
    }
    values[s - 1] = 1.0 - prev;
    // A repeated or zero cut would leave fewer than s nonzeros.
    if (std::all_of(values.begin(), values.end(), [](double v) { return v > 0.0; })) break;
  }

  DenseVector x(n);
  for (std::size_t i = 0; i < s; ++i) x[positions[i]] = values[i];
  return x;
}

NoisyObservation add_noise(const DenseVector& y_clean, const SynthesisSpec& spec,
                           std::uint64_t seed) {
  if (!std::isfinite(spec.target_snr_db)) {
    throw Error(ErrorCode::InvalidArgument, "target SNR must be finite");
  }
  if (spec.lowpass_window == 0 || spec.lowpass_window % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "lowpass window must be odd and positive");
  }
  const double signal = squared_norm(y_clean.span());
  if (!(signal > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "clean signal has zero energy; SNR is undefined");
  }
  const std::size_t k = y_clean.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> raw(k);
  for (double& v : raw) v = normal(rng);

  DenseVector noise(k);
  if (spec.noise_kind == NoiseKind::Lowpass && spec.lowpass_window > 1) {
    const auto half = static_cast<std::ptrdiff_t>(spec.lowpass_window / 2);
    const double weight = 1.0 / static_cast<double>(spec.lowpass_window);
    for (std::size_t i = 0; i < k; ++i) {
      double acc = 0.0;
      for (std::ptrdiff_t o = -half; o <= half; ++o) {
        acc += raw[reflect_index(static_cast<std::ptrdiff_t>(i) + o, k)];
      }
      noise[i] = weight * acc;
    }
  } else {
    for (std::size_t i = 0; i < k; ++i) noise[i] = raw[i];
  }

  const double raw_energy = squared_norm(noise.span());
  if (!(raw_energy > 0.0)) throw Error(ErrorCode::InvalidArgument, "noise draw has zero energy");
  const double target_energy = signal / std::pow(10.0, spec.target_snr_db / 10.0);
  const double scale = std::sqrt(target_energy / raw_energy);
  for (double& v : noise) v *= scale;

  NoisyObservation out;
  out.y = y_clean;
  for (std::size_t i = 0; i < k; ++i) out.y[i] += noise[i];
  out.realized_snr_db = 10.0 * std::log10(signal / squared_norm(noise.span()));
  out.noise = std::move(noise);
  return out;
}

SyntheticObservation draw_observation(const SpectralLibrary& library, const SynthesisSpec& spec) {
  check(spec);
  if (library.bands() != spec.k || library.signatures() != spec.n) {
    throw Error(ErrorCode::DimensionMismatch, "library shape does not match the requested k and n");
  }
  DenseVector x = sparse_simplex_abundance(spec.n, spec.s, derive_seed(spec.seed, 1));
  DenseVector y_clean = matvec(library.matrix(), x);
  NoisyObservation noisy = add_noise(y_clean, spec, derive_seed(spec.seed, 2));
  return SyntheticObservation{std::move(x), std::move(y_clean), std::move(noisy.y),
                              std::move(noisy.noise), noisy.realized_snr_db};
}

SyntheticProblem synthesize(const SpectralLibrary& library, const SynthesisSpec& spec) {
  return SyntheticProblem{library, draw_observation(library, spec)};
}

SyntheticProblem synthesize(const SynthesisSpec& spec) {
  check(spec);
  return synthesize(gaussian_library(spec.k, spec.n, derive_seed(spec.seed, 0)), spec);
}

DenseMatrix read_matrix(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool have_header = false;
  std::vector<double> entries;
  std::size_t rows_read = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skippable(line)) continue;
    const auto fields = split_fields(line);
    if (!have_header) {
      if (fields.size() != 2) throw ParseError(line_no, "header must be '<rows> <cols>'");
      rows = parse_field<std::size_t>(fields[0], line_no, "row count");
      cols = parse_field<std::size_t>(fields[1], line_no, "column count");
      if (rows == 0 || cols == 0) throw ParseError(line_no, "dimensions must be positive");
      entries.reserve(rows * cols);
      have_header = true;
      continue;
    }
    if (rows_read == rows) throw ParseError(line_no, "more rows than the header declares");
    if (fields.size() != cols) {
      throw ParseError(line_no, "expected " + std::to_string(cols) + " values, found " +
                                    std::to_string(fields.size()));
    }
    for (const auto f : fields) {
      const double v = parse_field<double>(f, line_no, "number");
      if (!std::isfinite(v)) throw ParseError(line_no, "non-finite value");
      entries.push_back(v);
    }
    ++rows_read;
  }
  if (!have_header) throw ParseError(line_no + 1, "missing '<rows> <cols>' header");
  if (rows_read != rows) {
    throw ParseError(line_no + 1, "expected " + std::to_string(rows) + " rows, found " +
                                      std::to_string(rows_read));
  }
  return DenseMatrix(rows, cols, std::move(entries));
}

void write_matrix(std::ostream& out, const DenseMatrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j > 0) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

DenseMatrix read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_matrix(in);
}

void write_matrix_file(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_matrix(out, m);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

SpectralLibrary load_library(const std::filesystem::path& path) {
  return SpectralLibrary(read_matrix_file(path));
}

void save_library(const std::filesystem::path& path, const SpectralLibrary& lib) {
  write_matrix_file(path, lib.matrix());
}

DenseMatrix as_column(const DenseVector& v) {
  return DenseMatrix(v.size(), 1, v.values());
}

}  // namespace unmix::datagen
