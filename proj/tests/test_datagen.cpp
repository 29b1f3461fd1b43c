#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "support/reference.hpp"
#include "unmix/datagen.hpp"
#include "unmix/error.hpp"

using namespace unmix;
namespace dg = unmix::datagen;

TEST_CASE("gaussian_library") {
  const SpectralLibrary a = dg::gaussian_library(200, 400, 1);
  const SpectralLibrary b = dg::gaussian_library(200, 400, 1);
  CHECK(a.matrix() == b.matrix());
  CHECK_FALSE(dg::gaussian_library(200, 400, 2).matrix() == a.matrix());
  double mean = ref::sum(a.matrix().entries()) / (200.0 * 400.0);
  CHECK(std::abs(mean) <= 4.0 / std::sqrt(200.0 * 400.0));
  const SpectralLibrary one = dg::gaussian_library(1, 1, 5);
  CHECK(std::isfinite(one.matrix()(0, 0)));
  CHECK_THROWS_AS(dg::gaussian_library(0, 3, 1), Error);
}

TEST_CASE("gaussian column norms concentrate") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SpectralLibrary lib = dg::gaussian_library(200, 400, seed);
    for (std::size_t j = 0; j < 400; ++j) {
      const double c = ref::norm(ref::from(lib.matrix().column(j)));
      CHECK(c >= 11.0);
      CHECK(c <= 18.0);
    }
  }
}

TEST_CASE("sparse_simplex_abundance") {
  const DenseVector e = dg::sparse_simplex_abundance(10, 1, 3);
  int ones = 0;
  for (double v : e) ones += v == 1.0;
  CHECK(ones == 1);
  CHECK(dg::sparse_simplex_abundance(50, 7, 9) == dg::sparse_simplex_abundance(50, 7, 9));
  CHECK_THROWS_AS(dg::sparse_simplex_abundance(3, 4, 1), Error);
  CHECK_THROWS_AS(dg::sparse_simplex_abundance(3, 0, 1), Error);

  double first = 0.0;
  const int draws = 10000;
  for (int s = 0; s < draws; ++s) {
    const DenseVector x = dg::sparse_simplex_abundance(2, 2, s);
    CHECK(x[0] > 0.0);
    CHECK(x[0] < 1.0);
    CHECK(std::abs(x[0] + x[1] - 1.0) <= 1e-12);
    first += x[0];
  }
  CHECK(std::abs(first / draws - 0.5) <= 0.02);
}

TEST_CASE("add_noise") {
  const DenseVector y = dg::draw_observation(dg::gaussian_library(50, 20, 1), [] {
    dg::SynthesisSpec s;
    s.k = 50;
    s.n = 20;
    return s;
  }()).y_clean;
  dg::SynthesisSpec spec;
  spec.target_snr_db = 20.0;
  const dg::NoisyObservation a = dg::add_noise(y, spec, 4);
  CHECK(std::abs(a.realized_snr_db - 20.0) <= 1e-9);
  const double ratio = ref::norm(ref::from(y)) / ref::norm(ref::from(a.noise));
  CHECK(std::abs(20.0 * std::log10(ratio) - 20.0) <= 1e-9);

  dg::SynthesisSpec white = spec;
  white.noise_kind = dg::NoiseKind::White;
  dg::SynthesisSpec win1 = spec;
  win1.lowpass_window = 1;
  CHECK(dg::add_noise(y, white, 4).noise == dg::add_noise(y, win1, 4).noise);

  CHECK_THROWS_AS(dg::add_noise(DenseVector(5), spec, 1), Error);
  dg::SynthesisSpec even = spec;
  even.lowpass_window = 4;
  CHECK_THROWS_AS(dg::add_noise(y, even, 1), Error);
}

TEST_CASE("low-pass noise is strongly correlated at lag one") {
  const DenseVector y(224, 1.0);
  dg::SynthesisSpec spec;
  double acc = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const DenseVector n = dg::add_noise(y, spec, s).noise;
    const double mean = ref::sum(n.values()) / 224.0;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < 224; ++i) {
      den += (n[i] - mean) * (n[i] - mean);
      if (i + 1 < 224) num += (n[i] - mean) * (n[i + 1] - mean);
    }
    acc += num / den;
  }
  CHECK(acc / 100.0 >= 0.5);
}

TEST_CASE("synthesized problems satisfy their invariants") {
  std::mt19937_64 rng(81);
  for (int t = 0; t < 1000; ++t) {
    dg::SynthesisSpec spec;
    spec.k = 1 + rng() % 30;
    spec.n = 1 + rng() % 30;
    spec.s = 1 + rng() % spec.n;
    spec.target_snr_db = -10.0 + static_cast<double>(rng() % 700) / 10.0;
    spec.noise_kind = rng() % 2 ? dg::NoiseKind::White : dg::NoiseKind::Lowpass;
    spec.lowpass_window = 1 + 2 * (rng() % 6);
    spec.seed = rng();
    const dg::SyntheticProblem p = dg::synthesize(spec);
    const DenseVector& x = p.observation.x_true;
    REQUIRE(x.size() == spec.n);
    std::size_t nonzero = 0;
    for (double v : x) {
      CHECK(v >= 0.0);
      nonzero += v > 0.0;
    }
    CHECK(nonzero == spec.s);
    CHECK(std::abs(ref::sum(x.values()) - 1.0) <= 1e-12);
    CHECK(p.library.bands() == spec.k);
    CHECK(std::abs(p.observation.realized_snr_db - spec.target_snr_db) <= 1e-9);
    for (std::size_t i = 0; i < spec.k; ++i)
      CHECK(p.observation.y_noisy[i] == p.observation.y_clean[i] + p.observation.noise[i]);
  }
}

TEST_CASE("generation is a pure function of its settings") {
  dg::SynthesisSpec spec;
  spec.seed = 7;
  const dg::SyntheticProblem a = dg::synthesize(spec);
  const dg::SyntheticProblem b = dg::synthesize(spec);
  CHECK(a.library.matrix() == b.library.matrix());
  CHECK(a.observation.y_noisy == b.observation.y_noisy);
  CHECK(a.observation.x_true == b.observation.x_true);

  // Specs that differ only in SNR share x and the noise shape.
  dg::SynthesisSpec other = spec;
  other.target_snr_db = 50.0;
  const dg::SyntheticProblem c = dg::synthesize(other);
  CHECK(c.observation.x_true == a.observation.x_true);
  const double r = c.observation.noise[0] / a.observation.noise[0];
  for (std::size_t i = 0; i < spec.k; ++i)
    CHECK(c.observation.noise[i] == doctest::Approx(r * a.observation.noise[i]));
  CHECK_THROWS_AS(dg::draw_observation(dg::gaussian_library(3, 3, 1), spec), Error);
}

TEST_CASE("matrix text format") {
  std::istringstream ok("# comment\n\n2 3\n1 2 3\n  4 5.5 -6e-1\n");
  const DenseMatrix m = dg::read_matrix(ok);
  CHECK(m == DenseMatrix{{1, 2, 3}, {4, 5.5, -0.6}});

  std::istringstream truncated("2 3\n1 2 3\n");
  try {
    dg::read_matrix(truncated);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.code() == ErrorCode::ParseError);
  }
  std::istringstream wide("2 2\n1 2\n3 4 5\n");
  try {
    dg::read_matrix(wide);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream junk("1 2\n1 x\n");
  CHECK_THROWS_AS(dg::read_matrix(junk), ParseError);
  std::istringstream extra("1 1\n1\n2\n");
  CHECK_THROWS_AS(dg::read_matrix(extra), ParseError);
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS(dg::read_matrix(empty), ParseError);
}

TEST_CASE("save and load round-trip bit-exactly") {
  const SpectralLibrary lib = dg::gaussian_library(17, 9, 3);
  const auto path = std::filesystem::temp_directory_path() / "unmix_roundtrip_lib.txt";
  dg::save_library(path, lib);
  const SpectralLibrary back = dg::load_library(path);
  CHECK(back.matrix() == lib.matrix());
  std::filesystem::remove(path);
  CHECK_THROWS_AS(dg::load_library("/nonexistent/unmix/lib.txt"), Error);
  CHECK(dg::as_column(DenseVector{1.0, 2.0}) == DenseMatrix{{1.0}, {2.0}});
}

TEST_CASE("bundled example library") {
  const SpectralLibrary lib = dg::load_library(UNMIX_EXAMPLE_LIBRARY);
  CHECK(lib.bands() == 10);
  CHECK(lib.signatures() == 20);
  for (double v : lib.matrix().entries()) CHECK(v > 0.0);
}
