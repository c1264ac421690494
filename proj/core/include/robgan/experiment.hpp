#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "robgan/contamination.hpp"
#include "robgan/mlp.hpp"
#include "robgan/trainer.hpp"

namespace robgan {

enum class Method { JSGAN, TVGAN, CwMedian, Mean, TVLearn1D };
std::string_view to_string(Method m);
Method method_from_string(std::string_view name);

enum class CoreFamily { GaussIdentity, GaussCov, EllipticalCauchy };
std::string_view to_string(CoreFamily c);
CoreFamily core_family_from_string(std::string_view name);

enum class QFamily { None, GaussShift, GaussCov, CauchyIndep, EllipticalCauchy };
std::string_view to_string(QFamily q);
QFamily q_family_from_string(std::string_view name);

enum class GeneratorKind { Location, Affine, Elliptical };
std::string_view to_string(GeneratorKind g);
GeneratorKind generator_kind_from_string(std::string_view name);

/// One contamination law on the sweep; its location is t * 1_p.
struct QSpec {
  QFamily family = QFamily::GaussShift;
  double t = 0.0;
};

/// Fields left empty keep the value from default_config.
struct TrainOverrides {
  std::optional<double> gamma_d;
  std::optional<double> gamma_g;
  std::optional<std::size_t> k_steps;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> avg_epochs;
  std::optional<std::size_t> batch;
  std::optional<double> lambda_reg;
  std::optional<RegStat> reg_stat;
  std::optional<RegSide> reg_side;
  std::optional<InitScheme> init_scheme;
  std::optional<double> init_sd;
  std::optional<bool> median_init;
  NormConstraints constraints;

  void apply(TrainConfig& cfg) const;
};

struct EstimatorSpec {
  std::string label; // column name; defaults to the method name
  Method method = Method::JSGAN;
  /// Hidden widths. Unset: default_hidden_width(n). Empty: no hidden layer.
  std::optional<std::vector<std::size_t>> hidden;
  Activation hidden_act = Activation::Sigmoid;
  GeneratorKind generator = GeneratorKind::Location;
  std::vector<std::size_t> radial_dims{48, 48, 32, 24, 12, 1};
  RadialNoise radial_noise = RadialNoise::Gaussian;
  TrainOverrides overrides;
};

struct ExperimentConfig {
  std::string name = "experiment";
  CoreFamily core = CoreFamily::GaussIdentity;
  double theta = 0.0; // true location theta * 1_p
  std::vector<double> eps{0.1};
  std::vector<std::size_t> p{10};
  std::vector<std::size_t> n{1000};
  std::vector<QSpec> q{QSpec{}};
  std::vector<EstimatorSpec> estimators;
  std::size_t repetitions = 10;
  std::uint64_t base_seed = 0;
  std::string output_dir = ".";
  std::size_t jobs = 1;

  /// Throws std::invalid_argument on empty axes, zero repetitions or duplicate labels.
  void validate() const;
};

struct CellKey {
  double eps = 0.0;
  std::size_t p = 0;
  std::size_t n = 0;
  QSpec q;
  std::string label;
};

struct CellRecord {
  CellKey key;
  Method method = Method::JSGAN;
  double mean_error = 0.0;
  double sd_error = 0.0;
  std::vector<double> errors; // one per repetition; NaN for failed runs
  std::optional<double> mean_op_error;
  std::optional<double> mean_l1_w;
  double runtime_seconds = 0.0;
  std::vector<std::string> failures;

  bool failed() const { return !failures.empty(); }
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<CellRecord> cells; // sorted by axis values then estimator order
};

/// Seed of the dataset behind (axis values, repetition). Estimators share it.
std::uint64_t data_seed(std::uint64_t base_seed, double eps, std::size_t p, std::size_t n, const QSpec& q,
                        std::size_t rep);
/// Seed of one estimator run on that dataset.
std::uint64_t run_seed(std::uint64_t data_seed, std::string_view label);

/// The dataset spec for one cell and repetition.
DatasetSpec cell_dataset(const ExperimentConfig& cfg, double eps, std::size_t p, std::size_t n, const QSpec& q,
                         std::size_t rep);

struct RunOutcome {
  Estimate estimate;
  double l2_error = 0.0;
  std::optional<double> op_error;
};

/// Runs one estimator on one dataset. GAN methods train from scratch.
RunOutcome run_estimator(const EstimatorSpec& est, const Dataset& data, std::uint64_t seed);

/// The training configuration used for a GAN estimator at dimension p, size n.
TrainConfig resolved_train_config(const EstimatorSpec& est, std::size_t p, std::size_t n);
std::vector<std::size_t> resolved_hidden(const EstimatorSpec& est, std::size_t n);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// sample mean and standard deviation (n - 1 denominator) of the finite values.
std::pair<double, double> mean_sd(const std::vector<double>& values);

} // namespace robgan
