#pragma once

#include <functional>
#include <span>
#include <string_view>

#include "robgan/matrix.hpp"
#include "robgan/mlp.hpp"

namespace robgan {

enum class Divergence { JS, TV };
enum class RegStat { MeanMatch, MedianMatch };

std::string_view to_string(Divergence d);
Divergence divergence_from_string(std::string_view name);
std::string_view to_string(RegStat s);
RegStat reg_stat_from_string(std::string_view name);

struct ObjectiveKind {
  Divergence divergence = Divergence::JS;
  /// 0 skips the feature-matching regularizer entirely.
  double lambda_reg = 0.0;
  RegStat reg_stat = RegStat::MeanMatch;
};

/// A real minibatch and a generated minibatch of the same dimension.
struct BatchPair {
  const Matrix& real;
  const Matrix& fake;

  void validate(std::size_t input_dim) const;
};

/// Counts log arguments clamped at kLogFloor.
struct ClampCounter {
  std::size_t count = 0;
};

inline constexpr double kLogFloor = 1e-12;

/// (1/m) sum log D(real) + (1/m) sum log(1 - D(fake)) + log 4.
double js_value(const Mlp& d, const BatchPair& b, ClampCounter* clamps = nullptr);

/// (1/m) sum D(real) - (1/m) sum D(fake).
double tv_value(const Mlp& d, const BatchPair& b);

double objective_value(const Mlp& d, const BatchPair& b, Divergence div, ClampCounter* clamps = nullptr);

/// Discriminator features: the network with its output layer removed. For a
/// network without hidden layers this is the raw input.
Matrix feature_map(const Mlp& d, const Matrix& x);

/// Column means or column medians (even counts average the middle pair).
Vector feature_statistic(const Matrix& features, RegStat stat);

/// || T(Phi_D, real) - T(Phi_D, fake) ||^2
double feature_reg(const Mlp& d, const BatchPair& b, RegStat stat);

struct FeatureRegGradient {
  double value = 0.0;
  Matrix d_real; // d r / d (each real feature row)
  Matrix d_fake; // d r / d (each fake feature row)
};

FeatureRegGradient feature_reg_gradient(const Matrix& real_features, const Matrix& fake_features, RegStat stat);

struct DiscriminatorGradient {
  double value = 0.0; // divergence objective, without the regularizer
  MlpGradient grad;   // ascent direction of value (minus lambda * r when included)
};

/// Gradient of the divergence objective with respect to the discriminator.
/// When `subtract_reg` is set and lambda > 0, the gradient is that of
/// value - lambda * feature_reg.
DiscriminatorGradient discriminator_gradient(const Mlp& d, const BatchPair& b, const ObjectiveKind& kind,
                                             bool subtract_reg = false, ClampCounter* clamps = nullptr);

/// Logistic regression with w = theta - eta, b = (|eta|^2 - |theta|^2) / 2:
/// the Bayes-optimal discriminator between N(theta, I) and N(eta, I).
Mlp optimal_discriminator(std::span<const double> theta, std::span<const double> eta);

using FeatureFn = std::function<Vector(std::span<const double>)>;

/// g(x) = (x^T, 1)^T
FeatureFn linear_features();
Matrix apply_features(const Matrix& x, const FeatureFn& g);

/// F(w) = E_real log sigmoid(w.g) + E_fake log(1 - sigmoid(w.g)) + log 4 on
/// precomputed feature rows.
double restricted_js_objective(const Matrix& g_real, const Matrix& g_fake, std::span<const double> w);

struct RestrictedJsOptions {
  double gradient_tolerance = 1e-10;
  std::size_t max_iterations = 500;
};

struct RestrictedJsResult {
  double value = 0.0;
  Vector w;
  std::size_t iterations = 0;
};

/// sup over ||w||_2 <= w_cap of F(w). F is concave, so a projected Newton
/// ascent with backtracking finds the global maximum. Throws NumericalError
/// (with the last iterate in the message) if it does not converge.
RestrictedJsResult restricted_js(const Matrix& real, const Matrix& fake, const FeatureFn& g, double w_cap = 1e3,
                                 const RestrictedJsOptions& opts = {});

} // namespace robgan
