#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "robgan/linalg.hpp"
#include "robgan/matrix.hpp"
#include "robgan/rng.hpp"
#include "robgan/sampling.hpp"

using namespace robgan;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

std::vector<double> to_vec(const Matrix& m) { return {m.data().begin(), m.data().end()}; }

Matrix random_spd(Rng& rng, std::size_t p) {
  const Matrix a = random_matrix(rng, p, p);
  Matrix s = a * a.transposed();
  for (std::size_t i = 0; i < p; ++i) s(i, i) += 0.5;
  return s;
}

} // namespace

TEST_SUITE("numkit") {

TEST_CASE("normal sampler: empty, moments, determinism") {
  Rng rng(1);
  CHECK(sample_standard_normal(rng, 0).empty());

  const Vector x = sample_standard_normal(rng, 1000000);
  double m = 0.0, v = 0.0;
  for (double d : x) m += d;
  m /= static_cast<double>(x.size());
  for (double d : x) v += (d - m) * (d - m);
  v /= static_cast<double>(x.size() - 1);
  CHECK(std::abs(m) < 0.01);
  CHECK(std::abs(v - 1.0) < 0.01);

  Rng a(42), b(42);
  CHECK(sample_standard_normal(a, 5) == sample_standard_normal(b, 5));
}

TEST_CASE("normal sampler passes Kolmogorov-Smirnov at 1e-3") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    Rng rng(seed);
    const Vector x = sample_standard_normal(rng, 100000);
    const double d = oracle::ks_statistic(x, oracle::normal_cdf);
    CHECK(oracle::ks_pvalue(d, x.size()) > 1e-3);
  }
}

TEST_CASE("split streams depend only on the parent seed") {
  Rng parent(9);
  const Rng s1 = parent.split(3);
  parent.normal();
  Rng s2 = parent.split(3);
  Rng s1c = s1;
  CHECK(s1c.next_u64() == s2.next_u64());
  CHECK(Rng(9).split(3).next_u64() != Rng(9).split(4).next_u64());
}

TEST_CASE("uniform stays inside the open unit interval") {
  Rng rng(5);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("cauchy sampler") {
  CHECK(cauchy_from_uniform(0.5, 0.5) == 0.5);
  Rng rng(3);
  const Vector x = sample_cauchy(rng, 0.5, 100000);
  // Order-statistics CI for the median: sd approx pi / (2 sqrt(n)) = 0.005.
  CHECK(std::abs(oracle::sorted_median(x) - 0.5) < 0.02);
  const double d = oracle::ks_statistic(x, [](double t) { return 0.5 + std::atan(t - 0.5) / std::numbers::pi; });
  CHECK(oracle::ks_pvalue(d, x.size()) > 1e-3);
}

TEST_CASE("sphere sampler") {
  Rng rng(4);
  for (std::size_t p : {1u, 2u, 3u, 17u}) {
    for (int i = 0; i < 100; ++i) {
      const Vector u = sample_sphere(rng, p);
      CHECK(std::abs(norm2(u) - 1.0) < 1e-12);
      if (p == 1) CHECK(std::abs(u[0]) == 1.0);
    }
  }
  double mean[3] = {0, 0, 0};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const Vector u = sample_sphere(rng, 3);
    for (int j = 0; j < 3; ++j) mean[j] += u[j] / draws;
  }
  // Each coordinate has variance 1/3; 3 sd of the mean is about 0.0055.
  for (double m : mean) CHECK(std::abs(m) < 0.02);
}

TEST_CASE("operator norm") {
  CHECK(operator_norm(Matrix::identity(6)) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(operator_norm(Matrix::diagonal(Vector{3.0, 1.0, 0.5})) == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(operator_norm(Matrix(3, 3)) == 0.0);
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    Matrix a = random_matrix(rng, 5, 5);
    const Matrix s = 0.5 * (a + a.transposed());
    const auto ev = oracle::jacobi_eigenvalues(to_vec(s), 5);
    const double expect = std::max(std::abs(ev.front()), std::abs(ev.back()));
    CHECK(std::abs(operator_norm(s) - expect) < 1e-6);
    const Matrix r = random_matrix(rng, 4, 7);
    CHECK(std::abs(operator_norm(r) - operator_norm(r.transposed())) < 1e-8 * operator_norm(r));
  }
}

TEST_CASE("invert_spd") {
  CHECK(invert_spd(Matrix::identity(4)) == Matrix::identity(4));
  const Matrix inv = invert_spd(Matrix::diagonal(Vector{2.0, 4.0}));
  CHECK(inv(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(inv(1, 1) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(inv(0, 1) == 0.0);

  Rng rng(10);
  for (int t = 0; t < 20; ++t) {
    const Matrix s = random_spd(rng, 10);
    const Matrix si = invert_spd(s);
    CHECK(max_abs_diff(s * si, Matrix::identity(10)) < 1e-8);
    CHECK(max_abs_diff(invert_spd(si), s) < 1e-6 * std::max(1.0, max_abs(s)));
  }
  CHECK_THROWS_AS(invert_spd(Matrix::diagonal(Vector{1.0, -1.0})), NumericalError);
}

TEST_CASE("symmetric eigenvalues agree with the reference Jacobi") {
  Rng rng(12);
  const Matrix a = random_matrix(rng, 6, 6);
  const Matrix s = a + a.transposed();
  const Vector ev = symmetric_eigenvalues(s);
  const auto ref = oracle::jacobi_eigenvalues(to_vec(s), 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(ev[i] == doctest::Approx(ref[i]).epsilon(1e-9));
}

TEST_CASE("matrix construction validates the data length") {
  CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), std::invalid_argument);
}

}
