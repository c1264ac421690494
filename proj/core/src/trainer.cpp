#include "robgan/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

namespace robgan {

namespace {

constexpr std::uint64_t kInitStream = 11;
constexpr std::uint64_t kShuffleStream = 12;
constexpr std::uint64_t kNoiseStream = 13;
constexpr std::uint64_t kRefineStream = 14;
constexpr std::uint64_t kScoreStream = 15;

void shuffle(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(idx[i - 1], idx[j]);
  }
}

// D'(x) = D(x - center): shift the first-layer bias by -W center.
Mlp recenter(Mlp d, std::span<const double> center, double sign) {
  Layer& first = d.layers().front();
  for (std::size_t r = 0; r < first.weight.rows(); ++r) {
    first.bias[r] -= sign * dot(first.weight.row(r), center);
  }
  return d;
}

// Generator-side feature-matching gradient, pulled back to generator parameters.
GenGradient feature_reg_generator_grad(const Mlp& d, const Generator& g, const Matrix& real, const GenSample& fake,
                                       RegStat stat) {
  const Matrix& x = fake.x;
  if (d.hidden_layers() == 0) {
    const FeatureRegGradient rg = feature_reg_gradient(real, x, stat);
    return chain_to_parameters(g, fake.noise, rg.d_fake);
  }
  const std::size_t feat = d.depth() - 2;
  const ForwardTrace tf = forward_trace(d, x, feat + 1);
  const Matrix real_features = forward_trace(d, real, feat + 1).post.back();
  const FeatureRegGradient rg = feature_reg_gradient(real_features, tf.post.back(), stat);
  Matrix dpre = rg.d_fake;
  const Activation act = d.layers()[feat].act;
  for (std::size_t i = 0; i < dpre.rows(); ++i) {
    for (std::size_t j = 0; j < dpre.cols(); ++j) {
      dpre(i, j) *= activation_derivative(act, tf.pre[feat](i, j));
    }
  }
  const Matrix dx = backpropagate(d, tf, feat, std::move(dpre), true).input;
  return chain_to_parameters(g, fake.noise, dx);
}

void add_scaled(GenGradient& acc, const GenGradient& other, double s) {
  axpy(s, other.eta, acc.eta);
  if (acc.scale && other.scale) {
    axpy(s, other.scale->data(), acc.scale->data());
  }
  if (acc.radial && other.radial) {
    acc.radial->add_scaled(*other.radial, s);
  }
}

bool generator_finite(const Generator& g) {
  if (!all_finite(location(g))) {
    return false;
  }
  if (const auto* a = std::get_if<AffineGen>(&g)) {
    return a->scale.all_finite();
  }
  if (const auto* e = std::get_if<EllipticalGen>(&g)) {
    return e->radial.all_finite() && (!e->scale || e->scale->all_finite());
  }
  return true;
}

// Minibatch views of one shuffled pass.
std::vector<Matrix> epoch_batches(const Matrix& data, std::size_t batch, Rng& rng) {
  std::vector<std::size_t> idx(data.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  shuffle(idx, rng);
  std::vector<Matrix> out;
  for (std::size_t start = 0; start < idx.size(); start += batch) {
    const std::size_t stop = std::min(idx.size(), start + batch);
    out.push_back(select_rows(data, std::span(idx).subspan(start, stop - start)));
  }
  return out;
}

} // namespace

void TrainConfig::validate() const {
  if (!(gamma_d > 0.0) || !(gamma_g > 0.0) || !std::isfinite(gamma_d) || !std::isfinite(gamma_g)) {
    throw std::invalid_argument("TrainConfig: learning rates must be positive and finite");
  }
  if (k_steps < 1 || epochs < 1 || avg_epochs < 1 || batch < 1) {
    throw std::invalid_argument("TrainConfig: K, T, T0 and batch size must be at least 1");
  }
  if (avg_epochs > epochs) {
    throw std::invalid_argument("TrainConfig: average epochs T0 exceeds total epochs T");
  }
  if (objective.lambda_reg < 0.0) {
    throw std::invalid_argument("TrainConfig: lambda must be non-negative");
  }
  constraints.validate();
}

Mlp init_discriminator(const MlpSpec& spec, const TrainConfig& cfg) {
  Rng rng = Rng(cfg.seed).split(kInitStream);
  return init_mlp(spec, cfg.init_scheme, rng, cfg.init_sd);
}

TrainResult train(const Matrix& data, const Mlp& d0, const Generator& g0, const TrainConfig& cfg) {
  cfg.validate();
  if (data.rows() == 0 || data.cols() == 0) {
    throw std::invalid_argument("train: empty data");
  }
  if (d0.input_dim() != data.cols() || dimension(g0) != data.cols()) {
    throw std::invalid_argument("train: discriminator, generator and data dimensions differ");
  }
  const std::size_t p = data.cols();
  const Vector center = cfg.median_init ? coordinatewise_median(data) : location(g0);
  Matrix centred = data;
  for (std::size_t i = 0; i < centred.rows(); ++i) {
    axpy(-1.0, center, centred.row(i));
  }

  Mlp d = d0;
  Generator g = g0;
  location(g) = subtract(location(g0), center);
  if (cfg.median_init) {
    std::fill(location(g).begin(), location(g).end(), 0.0);
  }

  const Rng root(cfg.seed);
  Rng shuffle_rng = root.split(kShuffleStream);
  Rng noise_rng = root.split(kNoiseStream);
  const std::size_t batch = std::min(cfg.batch, data.rows());
  const ObjectiveKind& kind = cfg.objective;
  const bool reg_on = kind.lambda_reg > 0.0;

  Estimate est;
  ClampCounter clamps;
  std::vector<Vector> eta_snapshots;
  std::vector<Matrix> scatter_snapshots;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double objective_sum = 0.0;
    std::size_t objective_count = 0;
    for (const Matrix& real : epoch_batches(centred, batch, shuffle_rng)) {
      const std::size_t m = real.rows();
      double last_value = 0.0;
      for (std::size_t k = 0; k < cfg.k_steps; ++k) {
        const GenSample fake = gen_sample(g, noise_rng, m);
        const DiscriminatorGradient dg = discriminator_gradient(
            d, BatchPair{real, fake.x}, kind, reg_on && cfg.reg_side == RegSide::Discriminator, &clamps);
        apply_gradient(d, dg.grad, cfg.gamma_d);
        if (cfg.constraints.any()) {
          d = project_norms(std::move(d), cfg.constraints);
        }
        last_value = dg.value;
      }
      objective_sum += last_value;
      ++objective_count;

      const GenSample fake = gen_sample(g, noise_rng, m);
      GenGradient gg = gen_grad(g, d, fake.noise, kind);
      if (reg_on && cfg.reg_side == RegSide::Generator) {
        add_scaled(gg, feature_reg_generator_grad(d, g, real, fake, kind.reg_stat), kind.lambda_reg);
      }
      apply_step(g, gg, -cfg.gamma_g);
    }

    TraceRow row;
    row.epoch = epoch;
    row.objective = objective_sum / static_cast<double>(objective_count);
    row.l1_w = output_l1_norm(d);
    row.eta = location(g);
    axpy(1.0, center, row.eta);
    est.trace.push_back(row);

    if (!d.all_finite() || !generator_finite(g) || !std::isfinite(row.objective)) {
      throw TrainingError("train: non-finite parameters at epoch " + std::to_string(epoch), est.trace);
    }
    if (epoch + cfg.avg_epochs > cfg.epochs) {
      eta_snapshots.push_back(row.eta);
      if (auto s = scatter(g)) {
        scatter_snapshots.push_back(std::move(*s));
      }
    }
  }

  est.theta_hat = Vector(p, 0.0);
  for (const Vector& e : eta_snapshots) {
    axpy(1.0 / static_cast<double>(eta_snapshots.size()), e, est.theta_hat);
  }
  if (!scatter_snapshots.empty()) {
    Matrix avg(p, p);
    for (const Matrix& s : scatter_snapshots) {
      axpy(1.0 / static_cast<double>(scatter_snapshots.size()), s.data(), avg.data());
    }
    est.sigma_hat = std::move(avg);
  }
  est.final_objective = est.trace.back().objective;
  est.clamp_count = clamps.count;

  TrainResult out{std::move(est), recenter(std::move(d), center, 1.0), std::move(g)};
  axpy(1.0, center, location(out.generator));
  return out;
}

std::size_t default_hidden_width(std::size_t n) { return n >= 50000 ? 20 : 2; }

TrainConfig default_config(std::span<const std::size_t> structure, std::size_t n, Divergence div) {
  if (structure.size() < 2) {
    throw std::invalid_argument("default_config: structure needs input and output widths");
  }
  const std::size_t p = structure.front();
  const std::size_t first_hidden = structure.size() > 2 ? structure[1] : 0;
  // Published settings exist for widths 2 and 20; pick the nearer one.
  const bool wide = first_hidden >= 11;

  TrainConfig cfg;
  cfg.objective.divergence = div;
  cfg.init_scheme = InitScheme::Xavier;
  cfg.epochs = p >= 200 ? 250 : 150;
  // At least 10 iterations per epoch; 150 epochs of 2 iterations (n = 1000)
  // leave the location visibly short of convergence.
  cfg.batch = std::clamp<std::size_t>((n + 9) / 10, 1, 500);
  if (div == Divergence::JS) {
    cfg.gamma_g = wide ? 0.02 : 0.01;
    cfg.gamma_d = 0.2;
    cfg.k_steps = 5;
    cfg.avg_epochs = 25;
    cfg.objective.lambda_reg = 0.0;
  } else {
    cfg.gamma_g = wide ? 0.0001 : 0.01;
    cfg.gamma_d = wide ? 0.3 : 0.1;
    cfg.k_steps = wide ? 2 : 5;
    cfg.avg_epochs = 1;
    cfg.objective.lambda_reg = wide ? 0.1 : 0.0;
  }
  return cfg;
}

Selection select_estimate(std::span<const TrainResult> candidates, const Matrix& data, const TrainConfig& cfg,
                          std::size_t refine_epochs) {
  if (candidates.empty()) {
    throw std::invalid_argument("select_estimate: no candidates");
  }
  const Rng root(cfg.seed);
  const std::size_t batch = std::min(cfg.batch, data.rows());
  Selection sel;
  double best = 0.0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const TrainResult& cand = candidates[c];
    Generator g = cand.generator;
    location(g) = cand.estimate.theta_hat;
    Mlp d = cand.discriminator;
    // Common random numbers across candidates.
    Rng shuffle_rng = root.split(kRefineStream);
    Rng noise_rng = root.split(kRefineStream + 100);
    for (std::size_t e = 0; e < refine_epochs; ++e) {
      for (const Matrix& real : epoch_batches(data, batch, shuffle_rng)) {
        const GenSample fake = gen_sample(g, noise_rng, real.rows());
        const DiscriminatorGradient dg = discriminator_gradient(d, BatchPair{real, fake.x}, cfg.objective);
        apply_gradient(d, dg.grad, cfg.gamma_d);
        if (cfg.constraints.any()) {
          d = project_norms(std::move(d), cfg.constraints);
        }
      }
    }
    Rng score_rng = root.split(kScoreStream);
    const GenSample fake = gen_sample(g, score_rng, data.rows());
    const double score = objective_value(d, BatchPair{data, fake.x}, cfg.objective.divergence);
    sel.refreshed_objectives.push_back(score);
    if (c == 0 || score < best - 1e-12) {
      best = score;
      sel.index = c;
    }
  }
  sel.estimate = candidates[sel.index].estimate;
  sel.estimate.final_objective = sel.refreshed_objectives[sel.index];
  return sel;
}

MetricReport metrics(const Estimate& est, std::span<const double> truth_theta, const std::optional<Matrix>& truth_sigma) {
  return metrics(est.theta_hat, truth_theta, est.sigma_hat, truth_sigma);
}

void write_trace_csv(const Estimate& est, std::ostream& out) {
  const std::size_t p = est.theta_hat.size();
  out << "epoch,objective,l1_w";
  for (std::size_t j = 0; j < p; ++j) {
    out << ",eta" << (j + 1);
  }
  out << '\n';
  char buf[40];
  for (const TraceRow& r : est.trace) {
    out << r.epoch;
    std::snprintf(buf, sizeof buf, ",%.17g", r.objective);
    out << buf;
    std::snprintf(buf, sizeof buf, ",%.17g", r.l1_w);
    out << buf;
    for (double v : r.eta) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out << buf;
    }
    out << '\n';
  }
}

} // namespace robgan
