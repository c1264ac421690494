#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "robgan/baselines.hpp"
#include "robgan/generator.hpp"
#include "robgan/mlp.hpp"
#include "robgan/objectives.hpp"

namespace robgan {

/// Which player's loss the feature-matching penalty is attached to.
enum class RegSide { Generator, Discriminator };

struct TrainConfig {
  double gamma_d = 0.2;
  double gamma_g = 0.02;
  std::size_t k_steps = 5;
  std::size_t epochs = 150;
  std::size_t avg_epochs = 25;
  std::size_t batch = 500;
  ObjectiveKind objective;
  NormConstraints constraints;
  InitScheme init_scheme = InitScheme::Xavier;
  /// Standard deviation for InitScheme::GaussianSmall.
  double init_sd = 0.05;
  RegSide reg_side = RegSide::Generator;
  /// Start the generator location at the coordinatewise median of the data.
  bool median_init = true;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on rates <= 0, zero counts or avg_epochs > epochs.
  void validate() const;
};

struct TraceRow {
  std::size_t epoch = 0;
  double objective = 0.0; // mean discriminator objective over the epoch
  double l1_w = 0.0;      // l1 norm of the output-layer weights at epoch end
  Vector eta;
};

struct Estimate {
  Vector theta_hat;
  std::optional<Matrix> sigma_hat;
  double final_objective = 0.0;
  std::vector<TraceRow> trace;
  std::size_t clamp_count = 0;
};

struct TrainResult {
  Estimate estimate;
  Mlp discriminator; // acts on raw data coordinates
  Generator generator;
};

class TrainingError : public std::runtime_error {
public:
  TrainingError(const std::string& what, std::vector<TraceRow> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<TraceRow>& trace() const { return trace_; }

private:
  std::vector<TraceRow> trace_;
};

/// Discriminator initialized per cfg.init_scheme from a stream derived from cfg.seed.
Mlp init_discriminator(const MlpSpec& spec, const TrainConfig& cfg);

/// Alternating stochastic gradient training of a GAN location estimator.
///
/// Each epoch is one pass over the data in a freshly shuffled minibatch order.
/// Every minibatch is one iteration: K discriminator ascent steps against fresh
/// generator draws (with norm projection after each step when caps are set),
/// then one generator descent step on another fresh draw. theta_hat averages
/// the end-of-epoch generator locations over the last avg_epochs epochs.
///
/// Training runs in coordinates centred at the initial generator location, so
/// `d0` is read as a function of (x - initial location). The returned
/// discriminator is mapped back to raw coordinates.
///
/// Throws TrainingError if any parameter becomes non-finite.
TrainResult train(const Matrix& data, const Mlp& d0, const Generator& g0, const TrainConfig& cfg);

/// Published hyperparameters for a discriminator structure [p, h1, ..., 1]
/// at sample size n. Structures without a published entry use the nearest
/// published one-hidden-layer width (2 or 20). Batch size is min(500, ceil(n / 10)).
TrainConfig default_config(std::span<const std::size_t> structure, std::size_t n, Divergence div);

/// Hidden width used when none is given: 20 for n >= 50,000, otherwise 2.
std::size_t default_hidden_width(std::size_t n);

struct Selection {
  std::size_t index = 0;
  Estimate estimate;
  std::vector<double> refreshed_objectives;
};

/// Hyperparameter selection: for each candidate, freeze the generator at its
/// estimate, run `refine_epochs` more discriminator epochs, and keep the
/// candidate whose refreshed objective is smallest (earliest within 1e-12).
Selection select_estimate(std::span<const TrainResult> candidates, const Matrix& data, const TrainConfig& cfg,
                          std::size_t refine_epochs = 10);

MetricReport metrics(const Estimate& est, std::span<const double> truth_theta,
                     const std::optional<Matrix>& truth_sigma = std::nullopt);

/// epoch,objective,l1_w,eta1,...,etap
void write_trace_csv(const Estimate& est, std::ostream& out);

} // namespace robgan
