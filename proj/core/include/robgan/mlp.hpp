#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "robgan/matrix.hpp"
#include "robgan/rng.hpp"

namespace robgan {

/// Elementwise activations. `Abs` is used only for the non-negative output of
/// radial generator networks.
enum class Activation { Identity, Sigmoid, Relu, Ramp, Abs };

double activate(Activation act, double x);
/// Derivative at pre-activation x. Kinks (Relu/Abs at 0, Ramp at +-1/2) get 0.
double activation_derivative(Activation act, double x);
std::string_view to_string(Activation act);
Activation activation_from_string(std::string_view name);

inline double sigmoid(double x) {
  // Branch keeps exp() from overflowing for large |x|.
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct Layer {
  Matrix weight; // out x in
  Vector bias;   // out; all zeros and never updated when has_bias is false
  Activation act = Activation::Sigmoid;
  bool has_bias = true;

  friend bool operator==(const Layer&, const Layer&) = default;
};

/// Feedforward network. The last layer is the output layer; every layer before
/// it is hidden.
class Mlp {
public:
  Mlp() = default;
  explicit Mlp(std::vector<Layer> layers);

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  std::size_t depth() const { return layers_.size(); }
  std::size_t hidden_layers() const { return layers_.empty() ? 0 : layers_.size() - 1; }
  const Layer& output_layer() const { return layers_.back(); }
  Layer& output_layer() { return layers_.back(); }

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  /// [d0, d1, ..., dL]
  std::vector<std::size_t> layer_dims() const;

  /// Scalar output of a single-output network.
  double forward(std::span<const double> x) const;
  /// forward() applied to every row.
  Vector forward_batch(const Matrix& x) const;

  bool all_finite() const;
  std::size_t parameter_count() const;

  friend bool operator==(const Mlp&, const Mlp&) = default;

private:
  std::vector<Layer> layers_;
};

/// Layer-by-layer values from a batched forward pass.
struct ForwardTrace {
  Matrix input;
  std::vector<Matrix> pre;  // pre[k]: batch x d_{k+1}
  std::vector<Matrix> post; // post[k] = act_k(pre[k])

  const Matrix& layer_input(std::size_t k) const { return k == 0 ? input : post[k - 1]; }
  const Matrix& output() const { return post.back(); }
  /// Pre-activation of the single output unit, per row.
  Vector logits() const;
};

/// Forward pass keeping all intermediate values. `through` limits the pass to
/// layers [0, through); by default all layers run.
ForwardTrace forward_trace(const Mlp& net, const Matrix& batch, std::optional<std::size_t> through = std::nullopt);

/// Gradient with the same layout as an Mlp's parameters.
struct MlpGradient {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;

  static MlpGradient zeros_like(const Mlp& net);
  void add_scaled(const MlpGradient& other, double scale);
  double max_abs() const;
  bool all_finite() const;
};

struct Backprop {
  MlpGradient params;
  Matrix input; // d/d(input rows); empty unless requested
};

/// Reverse pass starting from the gradient `dpre` of some scalar with respect
/// to the pre-activation of layer `from_layer` (rows = batch, cols = layer width).
/// Layers above `from_layer` get zero gradient.
Backprop backpropagate(const Mlp& net, const ForwardTrace& trace, std::size_t from_layer, Matrix dpre,
                       bool want_input_grad);

/// Gradient of sum_i upstream[i] * forward(batch_i) with respect to every parameter.
MlpGradient grad_params(const Mlp& net, const Matrix& batch, std::span<const double> upstream);

/// Gradient of sum_i upstream[i] * forward(batch_i) with respect to each input row.
Matrix grad_input(const Mlp& net, const Matrix& batch, std::span<const double> upstream);

/// net += step * grad (bias-free layers untouched).
void apply_gradient(Mlp& net, const MlpGradient& grad, double step);

enum class InitScheme { GaussianSmall, Xavier, Zero };
std::string_view to_string(InitScheme scheme);
InitScheme init_scheme_from_string(std::string_view name);

/// Architecture description for init_mlp.
struct MlpSpec {
  std::vector<std::size_t> dims;      // [d0, ..., dL]
  std::vector<Activation> acts;       // one per layer, output last
  std::vector<bool> has_bias;         // one per layer; empty means all true
};

/// Discriminator with the given hidden widths, a shared hidden activation and
/// a sigmoid output unit. Empty `hidden` gives logistic regression.
MlpSpec discriminator_spec(std::size_t input_dim, std::span<const std::size_t> hidden, Activation hidden_act);

/// Deep ReLU class: bias-free ReLU layers of the given widths, a sigmoid
/// feature layer of width `feature_width` with biases, and a bias-free sigmoid
/// output unit.
MlpSpec deep_relu_spec(std::size_t input_dim, std::span<const std::size_t> relu_widths, std::size_t feature_width);

/// GaussianSmall draws every parameter iid N(0, gaussian_sd^2). Xavier draws
/// weights from U(+-sqrt(6 / (fan_in + fan_out))) with zero biases.
Mlp init_mlp(const MlpSpec& spec, InitScheme scheme, Rng& rng, double gaussian_sd = 0.05);

/// Optional norm caps matching the theory-side discriminator classes.
struct NormConstraints {
  std::optional<double> l1_output_cap; // kappa: l1 norm of output-layer weights
  std::optional<double> l1_hidden_cap; // B: per-unit l1 norm in layers below the second-last
  std::optional<double> l2_row_cap;    // per-unit l2 norm in the second-last layer
  std::optional<double> bias_cap;      // tau: |b_j| in the second-last layer

  bool any() const { return l1_output_cap || l1_hidden_cap || l2_row_cap || bias_cap; }
  void validate() const;
};

/// Projects each constrained parameter group onto its cap; groups already
/// inside their cap are left bit-identical.
Mlp project_norms(Mlp net, const NormConstraints& caps);

/// l1 norm of the output-layer weight matrix.
double output_l1_norm(const Mlp& net);

} // namespace robgan
