#include "robgan/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "robgan/projection.hpp"

namespace robgan {

double activate(Activation act, double x) {
  switch (act) {
  case Activation::Identity:
    return x;
  case Activation::Sigmoid:
    return sigmoid(x);
  case Activation::Relu:
    return x > 0.0 ? x : 0.0;
  case Activation::Ramp:
    return std::max(std::min(x + 0.5, 1.0), 0.0);
  case Activation::Abs:
    return std::abs(x);
  }
  return x;
}

double activation_derivative(Activation act, double x) {
  switch (act) {
  case Activation::Identity:
    return 1.0;
  case Activation::Sigmoid: {
    const double s = sigmoid(x);
    return s * (1.0 - s);
  }
  case Activation::Relu:
    return x > 0.0 ? 1.0 : 0.0;
  case Activation::Ramp:
    return (x > -0.5 && x < 0.5) ? 1.0 : 0.0;
  case Activation::Abs:
    return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
  }
  return 1.0;
}

std::string_view to_string(Activation act) {
  switch (act) {
  case Activation::Identity:
    return "identity";
  case Activation::Sigmoid:
    return "sigmoid";
  case Activation::Relu:
    return "relu";
  case Activation::Ramp:
    return "ramp";
  case Activation::Abs:
    return "abs";
  }
  return "identity";
}

Activation activation_from_string(std::string_view name) {
  for (Activation a : {Activation::Identity, Activation::Sigmoid, Activation::Relu, Activation::Ramp, Activation::Abs}) {
    if (to_string(a) == name) {
      return a;
    }
  }
  throw std::invalid_argument("unknown activation: " + std::string(name));
}

Mlp::Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) {
    throw std::invalid_argument("Mlp: at least one layer is required");
  }
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const Layer& l = layers_[k];
    if (l.weight.rows() == 0 || l.weight.cols() == 0) {
      throw std::invalid_argument("Mlp: empty layer");
    }
    if (l.bias.size() != l.weight.rows()) {
      throw std::invalid_argument("Mlp: bias length does not match layer width");
    }
    if (k > 0 && l.weight.cols() != layers_[k - 1].weight.rows()) {
      throw std::invalid_argument("Mlp: inconsistent dimension chain at layer " + std::to_string(k));
    }
  }
}

std::size_t Mlp::input_dim() const { return layers_.front().weight.cols(); }
std::size_t Mlp::output_dim() const { return layers_.back().weight.rows(); }

std::vector<std::size_t> Mlp::layer_dims() const {
  std::vector<std::size_t> dims{input_dim()};
  for (const Layer& l : layers_) {
    dims.push_back(l.weight.rows());
  }
  return dims;
}

double Mlp::forward(std::span<const double> x) const {
  if (x.size() != input_dim()) {
    throw std::invalid_argument("Mlp::forward: input has dimension " + std::to_string(x.size()) + ", expected " +
                                std::to_string(input_dim()));
  }
  if (output_dim() != 1) {
    throw std::invalid_argument("Mlp::forward: network has more than one output");
  }
  Vector cur(x.begin(), x.end());
  for (const Layer& l : layers_) {
    Vector next(l.weight.rows());
    for (std::size_t r = 0; r < next.size(); ++r) {
      next[r] = activate(l.act, dot(l.weight.row(r), cur) + l.bias[r]);
    }
    cur = std::move(next);
  }
  return cur[0];
}

Vector Mlp::forward_batch(const Matrix& x) const {
  if (output_dim() != 1) {
    throw std::invalid_argument("Mlp::forward_batch: network has more than one output");
  }
  return forward_trace(*this, x).output().column(0);
}

bool Mlp::all_finite() const {
  return std::all_of(layers_.begin(), layers_.end(),
                     [](const Layer& l) { return l.weight.all_finite() && robgan::all_finite(l.bias); });
}

std::size_t Mlp::parameter_count() const {
  std::size_t c = 0;
  for (const Layer& l : layers_) {
    c += l.weight.size() + (l.has_bias ? l.bias.size() : 0);
  }
  return c;
}

Vector ForwardTrace::logits() const { return pre.back().column(0); }

ForwardTrace forward_trace(const Mlp& net, const Matrix& batch, std::optional<std::size_t> through) {
  if (batch.cols() != net.input_dim()) {
    throw std::invalid_argument("forward_trace: batch has " + std::to_string(batch.cols()) + " columns, expected " +
                                std::to_string(net.input_dim()));
  }
  const std::size_t count = through.value_or(net.depth());
  if (count > net.depth()) {
    throw std::invalid_argument("forward_trace: layer count out of range");
  }
  ForwardTrace t;
  t.input = batch;
  t.pre.reserve(count);
  t.post.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const Layer& l = net.layers()[k];
    Matrix z = multiply_transposed(t.layer_input(k), l.weight);
    Matrix a(z.rows(), z.cols());
    for (std::size_t i = 0; i < z.rows(); ++i) {
      auto zr = z.row(i);
      auto ar = a.row(i);
      for (std::size_t r = 0; r < zr.size(); ++r) {
        zr[r] += l.bias[r];
        ar[r] = activate(l.act, zr[r]);
      }
    }
    t.pre.push_back(std::move(z));
    t.post.push_back(std::move(a));
  }
  return t;
}

MlpGradient MlpGradient::zeros_like(const Mlp& net) {
  MlpGradient g;
  for (const Layer& l : net.layers()) {
    g.weight.emplace_back(l.weight.rows(), l.weight.cols());
    g.bias.emplace_back(l.bias.size(), 0.0);
  }
  return g;
}

void MlpGradient::add_scaled(const MlpGradient& other, double scale) {
  for (std::size_t k = 0; k < weight.size(); ++k) {
    axpy(scale, other.weight[k].data(), weight[k].data());
    axpy(scale, other.bias[k], bias[k]);
  }
}

double MlpGradient::max_abs() const {
  double m = 0.0;
  for (std::size_t k = 0; k < weight.size(); ++k) {
    m = std::max(m, robgan::max_abs(weight[k]));
    for (double b : bias[k]) {
      m = std::max(m, std::abs(b));
    }
  }
  return m;
}

bool MlpGradient::all_finite() const {
  for (std::size_t k = 0; k < weight.size(); ++k) {
    if (!weight[k].all_finite() || !robgan::all_finite(bias[k])) {
      return false;
    }
  }
  return true;
}

Backprop backpropagate(const Mlp& net, const ForwardTrace& trace, std::size_t from_layer, Matrix dpre,
                       bool want_input_grad) {
  if (from_layer >= trace.pre.size()) {
    throw std::invalid_argument("backpropagate: layer not present in trace");
  }
  if (dpre.rows() != trace.input.rows() || dpre.cols() != net.layers()[from_layer].weight.rows()) {
    throw std::invalid_argument("backpropagate: seed gradient has the wrong shape");
  }
  Backprop out;
  out.params = MlpGradient::zeros_like(net);
  for (std::size_t k = from_layer + 1; k-- > 0;) {
    const Layer& l = net.layers()[k];
    const Matrix& in = trace.layer_input(k);
    Matrix& dw = out.params.weight[k];
    Vector& db = out.params.bias[k];
    for (std::size_t i = 0; i < dpre.rows(); ++i) {
      const auto g = dpre.row(i);
      const auto x = in.row(i);
      for (std::size_t r = 0; r < g.size(); ++r) {
        if (g[r] == 0.0) {
          continue;
        }
        axpy(g[r], x, dw.row(r));
        db[r] += g[r];
      }
    }
    if (!l.has_bias) {
      std::fill(db.begin(), db.end(), 0.0);
    }
    if (k == 0 && !want_input_grad) {
      break;
    }
    // d(input of layer k) = dpre * W
    Matrix dx(dpre.rows(), l.weight.cols());
    for (std::size_t i = 0; i < dpre.rows(); ++i) {
      const auto g = dpre.row(i);
      auto dr = dx.row(i);
      for (std::size_t r = 0; r < g.size(); ++r) {
        if (g[r] != 0.0) {
          axpy(g[r], l.weight.row(r), dr);
        }
      }
    }
    if (k == 0) {
      out.input = std::move(dx);
      break;
    }
    const Layer& below = net.layers()[k - 1];
    const Matrix& zb = trace.pre[k - 1];
    for (std::size_t i = 0; i < dx.rows(); ++i) {
      auto dr = dx.row(i);
      const auto zr = zb.row(i);
      for (std::size_t r = 0; r < dr.size(); ++r) {
        dr[r] *= activation_derivative(below.act, zr[r]);
      }
    }
    dpre = std::move(dx);
  }
  return out;
}

namespace {

Matrix output_seed(const Mlp& net, const ForwardTrace& trace, std::span<const double> upstream) {
  if (net.output_dim() != 1) {
    throw std::invalid_argument("gradient: network has more than one output");
  }
  if (upstream.size() != trace.input.rows()) {
    throw std::invalid_argument("gradient: upstream length does not match batch size");
  }
  const Matrix& z = trace.pre.back();
  Matrix seed(z.rows(), 1);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    seed(i, 0) = upstream[i] * activation_derivative(net.output_layer().act, z(i, 0));
  }
  return seed;
}

} // namespace

MlpGradient grad_params(const Mlp& net, const Matrix& batch, std::span<const double> upstream) {
  const ForwardTrace t = forward_trace(net, batch);
  return backpropagate(net, t, net.depth() - 1, output_seed(net, t, upstream), false).params;
}

Matrix grad_input(const Mlp& net, const Matrix& batch, std::span<const double> upstream) {
  const ForwardTrace t = forward_trace(net, batch);
  return backpropagate(net, t, net.depth() - 1, output_seed(net, t, upstream), true).input;
}

void apply_gradient(Mlp& net, const MlpGradient& grad, double step) {
  auto& layers = net.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    axpy(step, grad.weight[k].data(), layers[k].weight.data());
    if (layers[k].has_bias) {
      axpy(step, grad.bias[k], layers[k].bias);
    }
  }
}

std::string_view to_string(InitScheme scheme) {
  switch (scheme) {
  case InitScheme::GaussianSmall:
    return "gaussian";
  case InitScheme::Xavier:
    return "xavier";
  case InitScheme::Zero:
    return "zero";
  }
  return "xavier";
}

InitScheme init_scheme_from_string(std::string_view name) {
  for (InitScheme s : {InitScheme::GaussianSmall, InitScheme::Xavier, InitScheme::Zero}) {
    if (to_string(s) == name) {
      return s;
    }
  }
  throw std::invalid_argument("unknown init scheme: " + std::string(name));
}

MlpSpec discriminator_spec(std::size_t input_dim, std::span<const std::size_t> hidden, Activation hidden_act) {
  MlpSpec s;
  s.dims.push_back(input_dim);
  for (std::size_t h : hidden) {
    s.dims.push_back(h);
    s.acts.push_back(hidden_act);
  }
  s.dims.push_back(1);
  s.acts.push_back(Activation::Sigmoid);
  return s;
}

MlpSpec deep_relu_spec(std::size_t input_dim, std::span<const std::size_t> relu_widths, std::size_t feature_width) {
  MlpSpec s;
  s.dims.push_back(input_dim);
  for (std::size_t h : relu_widths) {
    s.dims.push_back(h);
    s.acts.push_back(Activation::Relu);
    s.has_bias.push_back(false);
  }
  s.dims.push_back(feature_width);
  s.acts.push_back(Activation::Sigmoid);
  s.has_bias.push_back(true);
  s.dims.push_back(1);
  s.acts.push_back(Activation::Sigmoid);
  s.has_bias.push_back(false);
  return s;
}

Mlp init_mlp(const MlpSpec& spec, InitScheme scheme, Rng& rng, double gaussian_sd) {
  if (spec.dims.size() < 2) {
    throw std::invalid_argument("init_mlp: need at least input and output dimensions");
  }
  const std::size_t n_layers = spec.dims.size() - 1;
  if (spec.acts.size() != n_layers) {
    throw std::invalid_argument("init_mlp: one activation per layer is required");
  }
  if (!spec.has_bias.empty() && spec.has_bias.size() != n_layers) {
    throw std::invalid_argument("init_mlp: has_bias must be empty or one flag per layer");
  }
  std::vector<Layer> layers;
  for (std::size_t k = 0; k < n_layers; ++k) {
    const std::size_t fan_in = spec.dims[k];
    const std::size_t fan_out = spec.dims[k + 1];
    if (fan_in == 0 || fan_out == 0) {
      throw std::invalid_argument("init_mlp: zero-width layer");
    }
    Layer l;
    l.weight = Matrix(fan_out, fan_in);
    l.bias = Vector(fan_out, 0.0);
    l.act = spec.acts[k];
    l.has_bias = spec.has_bias.empty() ? true : static_cast<bool>(spec.has_bias[k]);
    switch (scheme) {
    case InitScheme::GaussianSmall:
      for (double& w : l.weight.data()) {
        w = gaussian_sd * rng.normal();
      }
      if (l.has_bias) {
        for (double& b : l.bias) {
          b = gaussian_sd * rng.normal();
        }
      }
      break;
    case InitScheme::Xavier: {
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      for (double& w : l.weight.data()) {
        w = rng.uniform(-bound, bound);
      }
      break;
    }
    case InitScheme::Zero:
      break;
    }
    layers.push_back(std::move(l));
  }
  return Mlp(std::move(layers));
}

void NormConstraints::validate() const {
  for (const auto& cap : {l1_output_cap, l1_hidden_cap, l2_row_cap, bias_cap}) {
    if (cap && !(*cap > 0.0)) {
      throw std::invalid_argument("NormConstraints: caps must be positive");
    }
  }
}

Mlp project_norms(Mlp net, const NormConstraints& caps) {
  caps.validate();
  auto& layers = net.layers();
  const std::size_t out = layers.size() - 1;
  if (caps.l1_output_cap) {
    for (std::size_t r = 0; r < layers[out].weight.rows(); ++r) {
      project_l1_ball(layers[out].weight.row(r), *caps.l1_output_cap);
    }
  }
  if (out >= 1) {
    Layer& second_last = layers[out - 1];
    if (caps.l2_row_cap) {
      for (std::size_t r = 0; r < second_last.weight.rows(); ++r) {
        project_l2_ball(second_last.weight.row(r), *caps.l2_row_cap);
      }
    }
    if (caps.bias_cap && second_last.has_bias) {
      for (double& b : second_last.bias) {
        b = std::clamp(b, -*caps.bias_cap, *caps.bias_cap);
      }
    }
  }
  if (caps.l1_hidden_cap && out >= 2) {
    for (std::size_t k = 0; k + 1 < out; ++k) {
      for (std::size_t r = 0; r < layers[k].weight.rows(); ++r) {
        project_l1_ball(layers[k].weight.row(r), *caps.l1_hidden_cap);
      }
    }
  }
  return net;
}

double output_l1_norm(const Mlp& net) { return norm1(net.output_layer().weight.data()); }

} // namespace robgan
