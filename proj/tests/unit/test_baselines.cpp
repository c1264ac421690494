#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "robgan/baselines.hpp"
#include "robgan/rng.hpp"
#include "robgan/sampling.hpp"
#include "robgan/trainer.hpp"

using namespace robgan;

TEST_SUITE("baselines") {

TEST_CASE("coordinatewise median examples") {
  const Matrix one{{1.5, -2.0, 7.0}};
  CHECK(coordinatewise_median(one) == Vector{1.5, -2.0, 7.0});
  const Matrix col{{1.0}, {2.0}, {3.0}, {100.0}};
  CHECK(coordinatewise_median(col) == Vector{2.5});
  CHECK_THROWS_AS(coordinatewise_median(Matrix(0, 2)), std::invalid_argument);
}

TEST_CASE("coordinatewise median matches the sort oracle and ignores row order") {
  Rng rng(1);
  Matrix x(501, 7);
  for (double& v : x.data()) v = cauchy_from_uniform(rng.uniform(), 0.0);
  const Vector med = coordinatewise_median(x);
  for (std::size_t j = 0; j < 7; ++j) {
    std::vector<double> col(501);
    for (std::size_t i = 0; i < 501; ++i) col[i] = x(i, j);
    CHECK(med[j] == oracle::sorted_median(col));
  }
  std::vector<std::size_t> perm(501);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = 500; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
  Matrix y(501, 7);
  for (std::size_t i = 0; i < 501; ++i)
    for (std::size_t j = 0; j < 7; ++j) y(i, j) = x(perm[i], j);
  CHECK(coordinatewise_median(y) == med);
}

TEST_CASE("sample mean") {
  const Matrix c{{2.0, -1.0}, {2.0, -1.0}, {2.0, -1.0}};
  CHECK(sample_mean(c) == Vector{2.0, -1.0});
  const Matrix two{{0.0}, {2.0}};
  CHECK(sample_mean(two) == Vector{1.0});
}

TEST_CASE("tv_learning_1d examples") {
  const std::vector<double> sym{-1.0, 0.0, 1.0};
  CHECK(tv_learning_1d(sym, default_depth_grid(sym)) == 0.0);
  const std::vector<double> four{1.0, 2.0, 3.0, 4.0};
  // Direct depth evaluation: every candidate in [2, 3] reaches 1/2.
  const std::vector<double> sorted = four;
  for (double eta : default_depth_grid(four)) CHECK((halfspace_depth_1d(sorted, eta) == 0.5) == (eta >= 2.0 && eta <= 3.0));
  CHECK(halfspace_depth_1d(sorted, 2.5) == 0.5);
  CHECK(halfspace_depth_1d(sorted, 1.5) == 0.25);
  CHECK(tv_learning_1d(four, default_depth_grid(four)) == 2.5);
  CHECK_THROWS_AS(tv_learning_1d(std::span<const double>{}, sym), std::invalid_argument);
}

TEST_CASE("tv_learning_1d equals the sort median on odd samples") {
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + 2 * static_cast<std::size_t>(rng.uniform() * 100.0);
    std::vector<double> x(n);
    for (double& v : x) v = t % 2 ? cauchy_from_uniform(rng.uniform(), 0.0) : rng.normal();
    const double est = tv_learning_1d(x, default_depth_grid(x));
    CHECK(est == oracle::sorted_median(x));
    CHECK(est >= *std::min_element(x.begin(), x.end()));
    CHECK(est <= *std::max_element(x.begin(), x.end()));
  }
}

TEST_CASE("metrics") {
  const Vector truth{1.0, 1.0};
  CHECK(metrics(truth, truth).l2_error == 0.0);
  CHECK(metrics(Vector{4.0, 5.0}, truth).l2_error == 5.0);
  CHECK(!metrics(Vector{4.0, 5.0}, truth).op_error.has_value());

  Matrix eye(10, 10), two(10, 10);
  for (std::size_t i = 0; i < 10; ++i) eye(i, i) = 1.0, two(i, i) = 2.0;
  const MetricReport r = metrics(Vector(10), Vector(10), two, eye);
  REQUIRE(r.op_error.has_value());
  CHECK(*r.op_error == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(metrics(Vector{1.0}, truth), std::invalid_argument);

  Estimate est;
  est.theta_hat = Vector{4.0, 5.0};
  CHECK(robgan::metrics(est, truth).l2_error == 5.0);

  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    Vector a(5), b(5), c(5);
    for (double& v : a) v = rng.normal();
    for (double& v : b) v = rng.normal();
    for (double& v : c) v = rng.normal();
    CHECK(metrics(a, c).l2_error <= metrics(a, b).l2_error + metrics(b, c).l2_error + 1e-12);
  }
}

}
