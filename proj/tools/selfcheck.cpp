#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "cli.hpp"
#include "robgan/baselines.hpp"
#include "robgan/generator.hpp"
#include "robgan/mlp.hpp"
#include "robgan/objectives.hpp"
#include "robgan/rng.hpp"

namespace robgan::cli {

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Compares an analytic gradient entry with a central difference of f.
bool close(double analytic, double numeric) {
  const double diff = std::abs(analytic - numeric);
  if (std::abs(analytic) < 1e-8 && std::abs(numeric) < 1e-8) {
    return diff < 1e-8;
  }
  return diff <= 1e-5 * std::max(std::abs(analytic), std::abs(numeric)) || diff < 1e-9;
}

double central(const std::function<double()>& f, double& param) {
  const double h = 1e-4 * std::max(1.0, std::abs(param));
  const double saved = param;
  param = saved + h;
  const double up = f();
  param = saved - h;
  const double down = f();
  param = saved;
  return (up - down) / (2.0 * h);
}

bool near_kink(const Mlp& net, const Matrix& x) {
  const ForwardTrace tr = forward_trace(net, x);
  for (std::size_t k = 0; k < net.depth(); ++k) {
    const Activation a = net.layers()[k].act;
    if (a == Activation::Sigmoid || a == Activation::Identity) continue;
    for (double v : tr.pre[k].data()) {
      if (std::abs(v) < 1e-3 || std::abs(v + 0.5) < 1e-3 || std::abs(v - 0.5) < 1e-3) return true;
    }
  }
  return false;
}

Outcome gradient_suite(Rng& rng) {
  const Activation acts[] = {Activation::Sigmoid, Activation::Relu, Activation::Ramp, Activation::Identity};
  std::size_t checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t p = 1 + rng.below(4);
    const std::size_t hidden_layers = rng.below(3);
    std::vector<std::size_t> hidden;
    for (std::size_t k = 0; k < hidden_layers; ++k) hidden.push_back(1 + rng.below(4));
    Mlp net = init_mlp(discriminator_spec(p, hidden, acts[trial % 4]), InitScheme::GaussianSmall, rng, 1.0);
    Matrix x(3, p);
    for (double& v : x.data()) v = rng.normal();
    if (near_kink(net, x)) continue;
    Vector up(3);
    for (double& u : up) u = rng.normal();
    const MlpGradient g = grad_params(net, x, up);
    auto f = [&] {
      const Vector out = net.forward_batch(x);
      return dot(out, up);
    };
    for (std::size_t k = 0; k < net.depth(); ++k) {
      Layer& layer = net.layers()[k];
      for (std::size_t i = 0; i < layer.weight.data().size(); ++i) {
        if (!close(g.weight[k].data()[i], central(f, layer.weight.data()[i]))) {
          return {false, "weight mismatch in trial " + std::to_string(trial)};
        }
      }
      for (std::size_t i = 0; i < layer.bias.size(); ++i) {
        if (!close(g.bias[k][i], central(f, layer.bias[i]))) {
          return {false, "bias mismatch in trial " + std::to_string(trial)};
        }
      }
    }
    ++checked;
  }
  // Generator pathwise gradient, location family.
  const Mlp d = init_mlp(discriminator_spec(2, std::vector<std::size_t>{3}, Activation::Sigmoid), InitScheme::Xavier, rng);
  Generator g = LocationGen{{0.3, -0.2}};
  const GenSample s = gen_sample(g, rng, 5);
  const GenGradient gg = gen_grad(g, d, s.noise, ObjectiveKind{});
  for (std::size_t j = 0; j < 2; ++j) {
    auto f = [&] { return generator_loss(g, d, s.noise, Divergence::JS); };
    if (!close(gg.eta[j], central(f, location(g)[j]))) {
      return {false, "generator location gradient mismatch"};
    }
  }
  return {true, std::to_string(checked) + " nets"};
}

Outcome moment_suite(Rng& rng) {
  const std::size_t p = 2;
  Matrix real(2000, p);
  for (std::size_t i = 0; i < real.rows(); ++i) {
    const double shift = rng.uniform() < 0.2 ? 3.0 : 0.0;
    for (std::size_t j = 0; j < p; ++j) real(i, j) = shift + rng.normal();
  }
  const Vector mean = sample_mean(real);
  Matrix fake(100000, p);
  for (std::size_t i = 0; i < fake.rows(); ++i) {
    for (std::size_t j = 0; j < p; ++j) fake(i, j) = mean[j] + rng.normal();
  }
  const double matched = restricted_js(real, fake, linear_features()).value;
  for (double& v : fake.data()) v += 0.5;
  const double shifted = restricted_js(real, fake, linear_features()).value;
  char buf[96];
  std::snprintf(buf, sizeof buf, "matched %.2e, shifted %.3f", matched, shifted);
  return {matched <= 2e-3 && shifted > 0.01, buf};
}

Outcome median_suite(Rng& rng) {
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 * rng.below(50) + 1;
    Vector x(n);
    for (double& v : x) v = rng.normal() * 3.0;
    Vector sorted = x;
    std::sort(sorted.begin(), sorted.end());
    if (tv_learning_1d(x, default_depth_grid(x)) != sorted[n / 2]) {
      return {false, "mismatch at n=" + std::to_string(n)};
    }
  }
  return {true, "300 datasets"};
}

Outcome optimal_discriminator_suite(Rng& rng) {
  // At the Bayes discriminator the objective is 2 JS(P, Q), which for two unit
  // normals a distance 1 apart is about 0.223.
  const Mlp d = optimal_discriminator(std::vector<double>{1.0}, std::vector<double>{0.0});
  Matrix real(200000, 1), fake(200000, 1);
  for (std::size_t i = 0; i < real.rows(); ++i) {
    real(i, 0) = 1.0 + rng.normal();
    fake(i, 0) = rng.normal();
  }
  double quad = 0.0;
  const double h = 1e-3;
  for (double x = -12.0; x <= 13.0; x += h) {
    const double pp = std::exp(-0.5 * (x - 1) * (x - 1)) / std::sqrt(2 * M_PI);
    const double qq = std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI);
    const double m = pp + qq;
    quad += h * (pp * std::log(2 * pp / m) + qq * std::log(2 * qq / m));
  }
  const double mc = js_value(d, BatchPair{real, fake});
  char buf[96];
  std::snprintf(buf, sizeof buf, "mc %.4f vs quadrature %.4f", mc, quad);
  return {std::abs(mc - quad) < 0.01, buf};
}

} // namespace

int run_selfcheck(unsigned long long seed) {
  const Rng root(seed);
  struct Suite {
    const char* name;
    Outcome (*fn)(Rng&);
  };
  const Suite suites[] = {{"gradient", gradient_suite},
                          {"moment-matching", moment_suite},
                          {"median-oracle", median_suite},
                          {"optimal-discriminator", optimal_discriminator_suite}};
  int failed = 0;
  std::uint64_t stream = 0;
  for (const Suite& s : suites) {
    Rng rng = root.split(stream++);
    Outcome o;
    try {
      o = s.fn(rng);
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s %s (%s)\n", o.ok ? "PASS" : "FAIL", s.name, o.detail.c_str());
    failed += o.ok ? 0 : 1;
  }
  return failed;
}

} // namespace robgan::cli
