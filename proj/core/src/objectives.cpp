#include "robgan/objectives.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "robgan/linalg.hpp"
#include "robgan/projection.hpp"

namespace robgan {

namespace {

const double kLog4 = 2.0 * std::numbers::ln2;

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double clamped_log_sigmoid(double z, ClampCounter* clamps) {
  const double v = -softplus(-z);
  if (v < std::log(kLogFloor)) {
    if (clamps != nullptr) {
      ++clamps->count;
    }
    return std::log(kLogFloor);
  }
  return v;
}

void require_sigmoid_output(const Mlp& d) {
  if (d.output_dim() != 1 || d.output_layer().act != Activation::Sigmoid) {
    throw std::invalid_argument("discriminator must have a single sigmoid output");
  }
}

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (n % 2 == 1) {
    return upper;
  }
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

// Rows holding the middle order statistic(s) of column j, with their weights
// in the median.
std::vector<std::pair<std::size_t, double>> median_rows(const Matrix& f, std::size_t j) {
  const std::size_t n = f.rows();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    idx[i] = i;
  }
  const auto less = [&](std::size_t a, std::size_t b) {
    return f(a, j) < f(b, j) || (f(a, j) == f(b, j) && a < b);
  };
  const std::size_t mid = n / 2;
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(mid), idx.end(), less);
  if (n % 2 == 1) {
    return {{idx[mid], 1.0}};
  }
  const std::size_t lower = *std::max_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(mid), less);
  return {{lower, 0.5}, {idx[mid], 0.5}};
}

} // namespace

std::string_view to_string(Divergence d) { return d == Divergence::JS ? "js" : "tv"; }

Divergence divergence_from_string(std::string_view name) {
  if (name == "js" || name == "JS") {
    return Divergence::JS;
  }
  if (name == "tv" || name == "TV") {
    return Divergence::TV;
  }
  throw std::invalid_argument("unknown divergence: " + std::string(name));
}

std::string_view to_string(RegStat s) { return s == RegStat::MeanMatch ? "mean" : "median"; }

RegStat reg_stat_from_string(std::string_view name) {
  if (name == "mean") {
    return RegStat::MeanMatch;
  }
  if (name == "median") {
    return RegStat::MedianMatch;
  }
  throw std::invalid_argument("unknown regularizer statistic: " + std::string(name));
}

void BatchPair::validate(std::size_t input_dim) const {
  if (real.rows() == 0 || fake.rows() == 0) {
    throw std::invalid_argument("BatchPair: empty batch");
  }
  if (real.cols() != input_dim || fake.cols() != input_dim) {
    throw std::invalid_argument("BatchPair: batch dimension does not match the discriminator input");
  }
}

double js_value(const Mlp& d, const BatchPair& b, ClampCounter* clamps) {
  require_sigmoid_output(d);
  b.validate(d.input_dim());
  const Vector zr = forward_trace(d, b.real).logits();
  const Vector zf = forward_trace(d, b.fake).logits();
  double sr = 0.0;
  for (double z : zr) {
    sr += clamped_log_sigmoid(z, clamps);
  }
  double sf = 0.0;
  for (double z : zf) {
    sf += clamped_log_sigmoid(-z, clamps); // log(1 - sigmoid(z)) = log sigmoid(-z)
  }
  return sr / static_cast<double>(zr.size()) + sf / static_cast<double>(zf.size()) + kLog4;
}

double tv_value(const Mlp& d, const BatchPair& b) {
  require_sigmoid_output(d);
  b.validate(d.input_dim());
  const Vector dr = d.forward_batch(b.real);
  const Vector df = d.forward_batch(b.fake);
  double sr = 0.0;
  for (double v : dr) {
    sr += v;
  }
  double sf = 0.0;
  for (double v : df) {
    sf += v;
  }
  return sr / static_cast<double>(dr.size()) - sf / static_cast<double>(df.size());
}

double objective_value(const Mlp& d, const BatchPair& b, Divergence div, ClampCounter* clamps) {
  return div == Divergence::JS ? js_value(d, b, clamps) : tv_value(d, b);
}

Matrix feature_map(const Mlp& d, const Matrix& x) {
  if (d.hidden_layers() == 0) {
    if (x.cols() != d.input_dim()) {
      throw std::invalid_argument("feature_map: dimension mismatch");
    }
    return x;
  }
  return forward_trace(d, x, d.depth() - 1).post.back();
}

Vector feature_statistic(const Matrix& features, RegStat stat) {
  if (features.rows() == 0) {
    throw std::invalid_argument("feature_statistic: empty batch");
  }
  Vector out(features.cols(), 0.0);
  if (stat == RegStat::MeanMatch) {
    for (std::size_t i = 0; i < features.rows(); ++i) {
      axpy(1.0, features.row(i), out);
    }
    for (double& v : out) {
      v /= static_cast<double>(features.rows());
    }
    return out;
  }
  for (std::size_t j = 0; j < features.cols(); ++j) {
    out[j] = median_of(features.column(j));
  }
  return out;
}

double feature_reg(const Mlp& d, const BatchPair& b, RegStat stat) {
  b.validate(d.input_dim());
  const Vector tr = feature_statistic(feature_map(d, b.real), stat);
  const Vector tf = feature_statistic(feature_map(d, b.fake), stat);
  const Vector diff = subtract(tr, tf);
  return dot(diff, diff);
}

FeatureRegGradient feature_reg_gradient(const Matrix& real_features, const Matrix& fake_features, RegStat stat) {
  const Vector tr = feature_statistic(real_features, stat);
  const Vector tf = feature_statistic(fake_features, stat);
  const Vector diff = subtract(tr, tf);
  FeatureRegGradient g;
  g.value = dot(diff, diff);
  g.d_real = Matrix(real_features.rows(), real_features.cols());
  g.d_fake = Matrix(fake_features.rows(), fake_features.cols());
  if (stat == RegStat::MeanMatch) {
    const double wr = 2.0 / static_cast<double>(real_features.rows());
    const double wf = -2.0 / static_cast<double>(fake_features.rows());
    for (std::size_t i = 0; i < g.d_real.rows(); ++i) {
      axpy(wr, diff, g.d_real.row(i));
    }
    for (std::size_t i = 0; i < g.d_fake.rows(); ++i) {
      axpy(wf, diff, g.d_fake.row(i));
    }
    return g;
  }
  for (std::size_t j = 0; j < diff.size(); ++j) {
    for (auto [row, weight] : median_rows(real_features, j)) {
      g.d_real(row, j) += 2.0 * diff[j] * weight;
    }
    for (auto [row, weight] : median_rows(fake_features, j)) {
      g.d_fake(row, j) -= 2.0 * diff[j] * weight;
    }
  }
  return g;
}

DiscriminatorGradient discriminator_gradient(const Mlp& d, const BatchPair& b, const ObjectiveKind& kind,
                                             bool subtract_reg, ClampCounter* clamps) {
  require_sigmoid_output(d);
  b.validate(d.input_dim());
  const ForwardTrace tr = forward_trace(d, b.real);
  const ForwardTrace tf = forward_trace(d, b.fake);
  const double mr = static_cast<double>(b.real.rows());
  const double mf = static_cast<double>(b.fake.rows());

  Matrix seed_r(b.real.rows(), 1);
  Matrix seed_f(b.fake.rows(), 1);
  DiscriminatorGradient out;
  double sr = 0.0;
  double sf = 0.0;
  if (kind.divergence == Divergence::JS) {
    // d/dz log sigmoid(z) = sigmoid(-z); d/dz log(1 - sigmoid(z)) = -sigmoid(z)
    for (std::size_t i = 0; i < b.real.rows(); ++i) {
      const double z = tr.pre.back()(i, 0);
      sr += clamped_log_sigmoid(z, clamps);
      seed_r(i, 0) = sigmoid(-z) / mr;
    }
    for (std::size_t i = 0; i < b.fake.rows(); ++i) {
      const double z = tf.pre.back()(i, 0);
      sf += clamped_log_sigmoid(-z, clamps);
      seed_f(i, 0) = -sigmoid(z) / mf;
    }
    out.value = sr / mr + sf / mf + kLog4;
  } else {
    for (std::size_t i = 0; i < b.real.rows(); ++i) {
      const double s = tr.post.back()(i, 0);
      sr += s;
      seed_r(i, 0) = s * (1.0 - s) / mr;
    }
    for (std::size_t i = 0; i < b.fake.rows(); ++i) {
      const double s = tf.post.back()(i, 0);
      sf += s;
      seed_f(i, 0) = -s * (1.0 - s) / mf;
    }
    out.value = sr / mr - sf / mf;
  }
  const std::size_t top = d.depth() - 1;
  out.grad = backpropagate(d, tr, top, std::move(seed_r), false).params;
  out.grad.add_scaled(backpropagate(d, tf, top, std::move(seed_f), false).params, 1.0);

  if (subtract_reg && kind.lambda_reg > 0.0 && d.hidden_layers() > 0) {
    // r depends on the discriminator only through the feature layer.
    const std::size_t feat = d.depth() - 2;
    const FeatureRegGradient rg = feature_reg_gradient(tr.post[feat], tf.post[feat], kind.reg_stat);
    const auto seed_from_post = [&](const ForwardTrace& t, const Matrix& dpost) {
      Matrix dpre = dpost;
      const Activation act = d.layers()[feat].act;
      for (std::size_t i = 0; i < dpre.rows(); ++i) {
        for (std::size_t j = 0; j < dpre.cols(); ++j) {
          dpre(i, j) *= activation_derivative(act, t.pre[feat](i, j));
        }
      }
      return dpre;
    };
    out.grad.add_scaled(backpropagate(d, tr, feat, seed_from_post(tr, rg.d_real), false).params, -kind.lambda_reg);
    out.grad.add_scaled(backpropagate(d, tf, feat, seed_from_post(tf, rg.d_fake), false).params, -kind.lambda_reg);
  }
  return out;
}

Mlp optimal_discriminator(std::span<const double> theta, std::span<const double> eta) {
  if (theta.size() != eta.size() || theta.empty()) {
    throw std::invalid_argument("optimal_discriminator: dimension mismatch");
  }
  Layer l;
  l.weight = Matrix(1, theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) {
    l.weight(0, j) = theta[j] - eta[j];
  }
  l.bias = {0.5 * (dot(eta, eta) - dot(theta, theta))};
  l.act = Activation::Sigmoid;
  return Mlp({std::move(l)});
}

FeatureFn linear_features() {
  return [](std::span<const double> x) {
    Vector g(x.begin(), x.end());
    g.push_back(1.0);
    return g;
  };
}

Matrix apply_features(const Matrix& x, const FeatureFn& g) {
  if (x.rows() == 0) {
    throw std::invalid_argument("apply_features: empty sample");
  }
  const Vector first = g(x.row(0));
  Matrix out(x.rows(), first.size());
  std::copy(first.begin(), first.end(), out.row(0).begin());
  for (std::size_t i = 1; i < x.rows(); ++i) {
    const Vector gi = g(x.row(i));
    if (gi.size() != first.size()) {
      throw std::invalid_argument("apply_features: feature map output size varies");
    }
    std::copy(gi.begin(), gi.end(), out.row(i).begin());
  }
  return out;
}

double restricted_js_objective(const Matrix& g_real, const Matrix& g_fake, std::span<const double> w) {
  double sr = 0.0;
  for (std::size_t i = 0; i < g_real.rows(); ++i) {
    sr -= softplus(-dot(w, g_real.row(i)));
  }
  double sf = 0.0;
  for (std::size_t i = 0; i < g_fake.rows(); ++i) {
    sf -= softplus(dot(w, g_fake.row(i)));
  }
  return sr / static_cast<double>(g_real.rows()) + sf / static_cast<double>(g_fake.rows()) + kLog4;
}

namespace {

struct GradHess {
  double value;
  Vector grad;
  Matrix neg_hess;
};

GradHess restricted_js_derivatives(const Matrix& gr, const Matrix& gf, std::span<const double> w) {
  const std::size_t dim = w.size();
  GradHess out{0.0, Vector(dim, 0.0), Matrix(dim, dim)};
  const auto accumulate = [&](const Matrix& g, bool real) {
    const double scale = 1.0 / static_cast<double>(g.rows());
    double s = 0.0;
    for (std::size_t i = 0; i < g.rows(); ++i) {
      const auto gi = g.row(i);
      const double t = dot(w, gi);
      const double sig = sigmoid(t);
      const double curv = sig * (1.0 - sig) * scale;
      if (real) {
        s -= softplus(-t);
        axpy(sigmoid(-t) * scale, gi, out.grad);
      } else {
        s -= softplus(t);
        axpy(-sig * scale, gi, out.grad);
      }
      for (std::size_t a = 0; a < dim; ++a) {
        axpy(curv * gi[a], gi, out.neg_hess.row(a));
      }
    }
    out.value += s * scale;
  };
  accumulate(gr, true);
  accumulate(gf, false);
  out.value += kLog4;
  return out;
}

Vector project_ball(Vector w, double cap) {
  project_l2_ball(w, cap);
  return w;
}

double projected_residual(std::span<const double> w, std::span<const double> grad, double cap) {
  Vector moved(w.begin(), w.end());
  axpy(1.0, grad, moved);
  moved = project_ball(std::move(moved), cap);
  return norm2(subtract(moved, w));
}

Vector solve_spd(const Matrix& a, std::span<const double> rhs) {
  Matrix reg = a;
  double ridge = 0.0;
  for (int attempt = 0; attempt < 20; ++attempt) {
    try {
      const Matrix l = cholesky(reg);
      const std::size_t n = rhs.size();
      Vector y(n);
      for (std::size_t i = 0; i < n; ++i) {
        double s = rhs[i];
        for (std::size_t k = 0; k < i; ++k) {
          s -= l(i, k) * y[k];
        }
        y[i] = s / l(i, i);
      }
      Vector x(n);
      for (std::size_t i = n; i-- > 0;) {
        double s = y[i];
        for (std::size_t k = i + 1; k < n; ++k) {
          s -= l(k, i) * x[k];
        }
        x[i] = s / l(i, i);
      }
      return x;
    } catch (const NumericalError&) {
      ridge = ridge == 0.0 ? 1e-12 * std::max(1.0, max_abs(a)) : ridge * 10.0;
      reg = a;
      for (std::size_t i = 0; i < reg.rows(); ++i) {
        reg(i, i) += ridge;
      }
    }
  }
  throw NumericalError("restricted_js: Newton system is singular");
}

} // namespace

RestrictedJsResult restricted_js(const Matrix& real, const Matrix& fake, const FeatureFn& g, double w_cap,
                                 const RestrictedJsOptions& opts) {
  if (!(w_cap > 0.0)) {
    throw std::invalid_argument("restricted_js: w_cap must be positive");
  }
  if (real.cols() != fake.cols()) {
    throw std::invalid_argument("restricted_js: samples differ in dimension");
  }
  const Matrix gr = apply_features(real, g);
  const Matrix gf = apply_features(fake, g);
  if (gr.cols() != gf.cols()) {
    throw std::invalid_argument("restricted_js: feature dimensions differ");
  }
  const std::size_t dim = gr.cols();
  Vector w(dim, 0.0);
  GradHess cur = restricted_js_derivatives(gr, gf, w);

  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    if (projected_residual(w, cur.grad, w_cap) <= opts.gradient_tolerance) {
      return {cur.value, w, it};
    }
    // Newton direction first; a projected gradient step if Newton stalls.
    const Vector newton = solve_spd(cur.neg_hess, cur.grad);
    bool moved = false;
    for (const Vector* dir : std::array<const Vector*, 2>{&newton, &cur.grad}) {
      double t = 1.0;
      for (int k = 0; k < 60; ++k, t *= 0.5) {
        Vector cand = w;
        axpy(t, *dir, cand);
        cand = project_ball(std::move(cand), w_cap);
        const Vector step = subtract(cand, w);
        const double fv = restricted_js_objective(gr, gf, cand);
        if (fv >= cur.value + 1e-4 * dot(cur.grad, step) && fv >= cur.value) {
          if (norm2(step) == 0.0) {
            break;
          }
          w = std::move(cand);
          moved = true;
          break;
        }
      }
      if (moved) {
        break;
      }
    }
    if (!moved) {
      // No ascent possible at working precision: w is optimal up to rounding.
      if (projected_residual(w, cur.grad, w_cap) <= std::sqrt(opts.gradient_tolerance)) {
        return {cur.value, w, it};
      }
      break;
    }
    cur = restricted_js_derivatives(gr, gf, w);
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "restricted_js: no convergence; last iterate w = [";
  for (std::size_t j = 0; j < w.size(); ++j) {
    msg << (j ? ", " : "") << w[j];
  }
  msg << "], F = " << cur.value << ", residual = " << projected_residual(w, cur.grad, w_cap);
  throw NumericalError(msg.str());
}

} // namespace robgan
