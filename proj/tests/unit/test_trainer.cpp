#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "robgan/contamination.hpp"
#include "robgan/trainer.hpp"

using namespace robgan;

namespace {

Matrix gaussian(std::uint64_t seed, std::size_t n, std::size_t p, double mean) {
  Rng rng(seed);
  Matrix x(n, p);
  for (double& v : x.data()) v = mean + rng.normal();
  return x;
}

TrainConfig small_cfg(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = 12;
  cfg.avg_epochs = 4;
  cfg.batch = 100;
  cfg.seed = seed;
  return cfg;
}

MlpSpec spec_for(std::size_t p, std::size_t h) {
  const std::vector<std::size_t> hidden{h};
  return discriminator_spec(p, hidden, Activation::Sigmoid);
}

TrainResult run(const Matrix& x, const TrainConfig& cfg, std::size_t h = 2) {
  const Mlp d0 = init_discriminator(spec_for(x.cols(), h), cfg);
  return train(x, d0, LocationGen{Vector(x.cols())}, cfg);
}

double l2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

} // namespace

TEST_SUITE("trainer") {

TEST_CASE("config validation") {
  TrainConfig cfg;
  cfg.avg_epochs = cfg.epochs + 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.gamma_d = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.batch = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.gamma_g = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = small_cfg(1);
  cfg.avg_epochs = 13;
  const Matrix x = gaussian(1, 50, 2, 0.0);
  CHECK_THROWS_AS(run(x, cfg), std::invalid_argument);
}

TEST_CASE("default_config published values") {
  const std::vector<std::size_t> wide{100, 20, 1}, narrow{100, 2, 1};
  TrainConfig js = default_config(wide, 50000, Divergence::JS);
  CHECK(js.gamma_g == 0.02);
  CHECK(js.gamma_d == 0.2);
  CHECK(js.k_steps == 5);
  CHECK(js.epochs == 150);
  CHECK(js.avg_epochs == 25);
  CHECK(js.objective.lambda_reg == 0.0);

  TrainConfig tv = default_config(wide, 50000, Divergence::TV);
  CHECK(tv.gamma_g == 0.0001);
  CHECK(tv.gamma_d == 0.3);
  CHECK(tv.k_steps == 2);
  CHECK(tv.epochs == 150);
  CHECK(tv.avg_epochs == 1);
  CHECK(tv.objective.lambda_reg == 0.1);
  CHECK(tv.objective.divergence == Divergence::TV);

  TrainConfig n = default_config(narrow, 5000, Divergence::JS);
  CHECK(n.gamma_g == 0.01);
  CHECK(n.gamma_d == 0.2);
  CHECK(n.avg_epochs == 25);

  const std::vector<std::size_t> big{200, 20, 1};
  CHECK(default_config(big, 50000, Divergence::JS).epochs == 250);
  CHECK(js.batch == 500);
  CHECK(default_config(narrow, 1000, Divergence::JS).batch == 100);
  CHECK(default_config(narrow, 5, Divergence::JS).batch == 1);
  CHECK(default_hidden_width(50000) == 20);
  CHECK(default_hidden_width(49999) == 2);
}

TEST_CASE("determinism") {
  const Matrix x = gaussian(2, 600, 3, 0.5);
  const TrainResult a = run(x, small_cfg(9)), b = run(x, small_cfg(9));
  CHECK(a.estimate.theta_hat == b.estimate.theta_hat);
  CHECK(a.discriminator == b.discriminator);
  REQUIRE(a.estimate.trace.size() == b.estimate.trace.size());
  for (std::size_t i = 0; i < a.estimate.trace.size(); ++i) CHECK(a.estimate.trace[i].objective == b.estimate.trace[i].objective);
  CHECK(run(x, small_cfg(10)).estimate.theta_hat != a.estimate.theta_hat);
}

TEST_CASE("translation equivariance") {
  const Matrix x = gaussian(3, 800, 3, 0.0);
  Matrix shifted = x;
  const Vector c{3.5, -120.0, 0.25};
  for (std::size_t i = 0; i < shifted.rows(); ++i)
    for (std::size_t j = 0; j < 3; ++j) shifted(i, j) += c[j];
  const TrainResult a = run(x, small_cfg(4)), b = run(shifted, small_cfg(4));
  for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(b.estimate.theta_hat[j] - a.estimate.theta_hat[j] - c[j]) < 1e-6);
}

TEST_CASE("trace contents and CSV") {
  const Matrix x = gaussian(5, 300, 2, 1.0);
  const TrainResult r = run(x, small_cfg(5));
  REQUIRE(r.estimate.trace.size() == 12);
  for (std::size_t e = 0; e < 12; ++e) {
    CHECK(r.estimate.trace[e].epoch == e + 1);
    CHECK(std::isfinite(r.estimate.trace[e].objective));
    CHECK(r.estimate.trace[e].l1_w >= 0.0);
  }
  // theta_hat is the mean of the last four epoch snapshots.
  for (std::size_t j = 0; j < 2; ++j) {
    double s = 0.0;
    for (std::size_t e = 8; e < 12; ++e) s += r.estimate.trace[e].eta[j];
    CHECK(r.estimate.theta_hat[j] == doctest::Approx(s / 4.0).epsilon(1e-14));
  }
  std::ostringstream out;
  write_trace_csv(r.estimate, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,objective,l1_w,eta1,eta2");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
  }
  CHECK(rows == 12);
}

TEST_CASE("non-finite parameters abort with the trace so far") {
  const Matrix x = gaussian(6, 200, 2, 0.0);
  TrainConfig cfg = small_cfg(6);
  cfg.gamma_d = 1e200;
  const std::vector<std::size_t> hidden{3};
  const Mlp d0 = init_discriminator(discriminator_spec(2, hidden, Activation::Relu), cfg);
  try {
    train(x, d0, LocationGen{Vector(2)}, cfg);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
    CHECK(e.trace().size() < 12);
  }
}

TEST_CASE("uncontaminated Gaussian reaches the parametric rate") {
  // 10-2-1 JS with defaults; 3 sqrt(p/n) ~ 0.095.
  int good = 0;
  const Vector truth(10);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Matrix x = gaussian(100 + s, 10000, 10, 0.0);
    const std::vector<std::size_t> structure{10, 2, 1};
    TrainConfig cfg = default_config(structure, x.rows(), Divergence::JS);
    cfg.seed = 500 + s;
    const double err = l2(run(x, cfg).estimate.theta_hat, truth);
    good += err <= 3.0 * std::sqrt(10.0 / 10000.0);
  }
  CHECK(good >= 8);
}

TEST_CASE("select_estimate") {
  const Matrix x = gaussian(7, 20000, 2, 1.0);
  TrainConfig cfg = small_cfg(7);
  cfg.batch = 500;
  auto candidate = [&](Vector eta) {
    TrainResult r;
    r.estimate.theta_hat = eta;
    r.generator = LocationGen{eta};
    r.discriminator = init_discriminator(spec_for(2, 2), cfg);
    return r;
  };
  const std::vector<TrainResult> one{candidate(Vector{0.9, 1.1})};
  const Selection s1 = select_estimate(one, x, cfg, 3);
  CHECK(s1.index == 0);
  CHECK(s1.estimate.theta_hat == one[0].estimate.theta_hat);
  CHECK(s1.refreshed_objectives.size() == 1);

  const std::vector<TrainResult> two{candidate(Vector{3.0, -1.0}), candidate(Vector{1.0, 1.0})};
  const Selection s2 = select_estimate(two, x, cfg);
  CHECK(s2.index == 1);
  CHECK(s2.refreshed_objectives[1] < s2.refreshed_objectives[0]);

  const std::vector<TrainResult> tie{candidate(Vector{1.2, 0.8}), candidate(Vector{1.2, 0.8})};
  const Selection s3 = select_estimate(tie, x, cfg, 2);
  CHECK(s3.refreshed_objectives[0] == s3.refreshed_objectives[1]);
  CHECK(s3.index == 0);

  CHECK_THROWS_AS(select_estimate(std::span<const TrainResult>{}, x, cfg), std::invalid_argument);
}

}

TEST_SUITE("trainer_slow") {

TEST_CASE("output-layer l1 norm grows with contamination distance") {
  const std::vector<double> ts{0.2, 0.5, 1.0, 2.0, 5.0};
  std::vector<double> l1;
  for (double t : ts) {
    double acc = 0.0;
    for (std::uint64_t rep = 0; rep < 2; ++rep) {
      DatasetSpec ds;
      ds.p = 10;
      ds.n = 5000;
      ds.eps = 0.2;
      ds.theta = Vector(10);
      ds.q = GaussShift{Vector(10, t)};
      ds.seed = 40 + rep;
      const Dataset data = sample_contaminated(ds);
      const std::vector<std::size_t> structure{10, 20, 1};
      TrainConfig cfg = default_config(structure, ds.n, Divergence::JS);
      cfg.seed = 90 + rep;
      acc += run(data.x, cfg, 20).estimate.trace.back().l1_w;
    }
    l1.push_back(acc / 2.0);
  }
  MESSAGE("l1 by t: " << l1[0] << " " << l1[1] << " " << l1[2] << " " << l1[3] << " " << l1[4]);
  CHECK(spearman(ts, l1) > 0.8);
}

}
