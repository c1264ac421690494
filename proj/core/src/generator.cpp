#include "robgan/generator.hpp"

#include <stdexcept>

#include "robgan/sampling.hpp"

namespace robgan {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// row_out = scale * v (scale lower-triangular) + eta
void lower_affine(const Matrix& scale, std::span<const double> v, std::span<const double> eta, double mult,
                  std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k <= i; ++k) {
      s += scale(i, k) * v[k];
    }
    out[i] = eta[i] + mult * s;
  }
}

Matrix outer_lower(const Matrix& dx, const Matrix& v, std::span<const double> weights) {
  const std::size_t p = dx.cols();
  Matrix g(p, p);
  for (std::size_t r = 0; r < dx.rows(); ++r) {
    const double w = weights.empty() ? 1.0 : weights[r];
    const auto d = dx.row(r);
    const auto vr = v.row(r);
    for (std::size_t i = 0; i < p; ++i) {
      const double di = w * d[i];
      for (std::size_t k = 0; k <= i; ++k) {
        g(i, k) += di * vr[k];
      }
    }
  }
  return g;
}

Vector column_sums(const Matrix& m) {
  Vector s(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    axpy(1.0, m.row(i), s);
  }
  return s;
}

} // namespace

std::size_t dimension(const Generator& g) { return location(g).size(); }

const Vector& location(const Generator& g) {
  return std::visit([](const auto& v) -> const Vector& { return v.eta; }, g);
}

Vector& location(Generator& g) {
  return std::visit([](auto& v) -> Vector& { return v.eta; }, g);
}

std::optional<Matrix> scatter(const Generator& g) {
  const Matrix* scale = std::visit(overloaded{[](const LocationGen&) -> const Matrix* { return nullptr; },
                                              [](const AffineGen& a) -> const Matrix* { return &a.scale; },
                                              [](const EllipticalGen& e) -> const Matrix* {
                                                return e.scale ? &*e.scale : nullptr;
                                              }},
                                   g);
  if (scale == nullptr) {
    return std::nullopt;
  }
  return multiply_transposed(*scale, *scale);
}

GenSample gen_sample(const Generator& g, Rng& rng, std::size_t m) {
  if (m < 1) {
    throw std::invalid_argument("gen_sample: m must be at least 1");
  }
  const std::size_t p = dimension(g);
  GenSample s;
  std::visit(overloaded{[&](const EllipticalGen& e) {
                          const std::size_t q = e.radial.input_dim();
                          s.noise.xi = Matrix(m, q);
                          s.noise.u = Matrix(m, p);
                          for (std::size_t i = 0; i < m; ++i) {
                            for (double& v : s.noise.xi.row(i)) {
                              v = e.noise == RadialNoise::Gaussian ? rng.normal() : rng.uniform();
                            }
                            const Vector u = sample_sphere(rng, p);
                            std::copy(u.begin(), u.end(), s.noise.u.row(i).begin());
                          }
                        },
                        [&](const auto&) {
                          s.noise.z = Matrix(m, p);
                          for (double& v : s.noise.z.data()) {
                            v = rng.normal();
                          }
                        }},
             g);
  s.x = push_forward(g, s.noise);
  return s;
}

Matrix push_forward(const Generator& g, const BaseNoise& noise) {
  return std::visit(
      overloaded{[&](const LocationGen& l) { return add_to_rows(noise.z, l.eta); },
                 [&](const AffineGen& a) {
                   Matrix x(noise.z.rows(), a.eta.size());
                   for (std::size_t i = 0; i < x.rows(); ++i) {
                     lower_affine(a.scale, noise.z.row(i), a.eta, 1.0, x.row(i));
                   }
                   return x;
                 },
                 [&](const EllipticalGen& e) {
                   const Vector radii = e.radial.forward_batch(noise.xi);
                   Matrix x(noise.u.rows(), e.eta.size());
                   for (std::size_t i = 0; i < x.rows(); ++i) {
                     if (e.scale) {
                       lower_affine(*e.scale, noise.u.row(i), e.eta, radii[i], x.row(i));
                     } else {
                       auto xr = x.row(i);
                       const auto ur = noise.u.row(i);
                       for (std::size_t j = 0; j < xr.size(); ++j) {
                         xr[j] = e.eta[j] + radii[i] * ur[j];
                       }
                     }
                   }
                   return x;
                 }},
      g);
}

GenGradient chain_to_parameters(const Generator& g, const BaseNoise& noise, const Matrix& dx) {
  GenGradient out;
  out.eta = column_sums(dx);
  std::visit(overloaded{[](const LocationGen&) {},
                        [&](const AffineGen&) { out.scale = outer_lower(dx, noise.z, {}); },
                        [&](const EllipticalGen& e) {
                          const std::size_t m = dx.rows();
                          const Vector radii = e.radial.forward_batch(noise.xi);
                          // dr_i = dx_i . (scale u_i)
                          Vector dr(m);
                          Vector direction(e.eta.size());
                          const Vector zero(e.eta.size(), 0.0);
                          for (std::size_t i = 0; i < m; ++i) {
                            if (e.scale) {
                              lower_affine(*e.scale, noise.u.row(i), zero, 1.0, direction);
                              dr[i] = dot(dx.row(i), direction);
                            } else {
                              dr[i] = dot(dx.row(i), noise.u.row(i));
                            }
                          }
                          out.radial = grad_params(e.radial, noise.xi, dr);
                          if (e.scale) {
                            out.scale = outer_lower(dx, noise.u, radii);
                          }
                        }},
             g);
  return out;
}

double generator_loss(const Generator& g, const Mlp& d, const BaseNoise& noise, Divergence div) {
  const Matrix x = push_forward(g, noise);
  const Vector z = forward_trace(d, x).logits();
  double s = 0.0;
  for (double zi : z) {
    // log(1 - sigmoid(z)) = -softplus(z)
    s += div == Divergence::JS ? -(zi > 0.0 ? zi + std::log1p(std::exp(-zi)) : std::log1p(std::exp(zi)))
                               : -sigmoid(zi);
  }
  return s / static_cast<double>(z.size());
}

GenGradient gen_grad(const Generator& g, const Mlp& d, const BaseNoise& noise, const ObjectiveKind& kind) {
  if (d.output_dim() != 1 || d.output_layer().act != Activation::Sigmoid) {
    throw std::invalid_argument("gen_grad: discriminator must have a single sigmoid output");
  }
  const Matrix x = push_forward(g, noise);
  const ForwardTrace t = forward_trace(d, x);
  const double m = static_cast<double>(x.rows());
  Matrix seed(x.rows(), 1);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double s = t.post.back()(i, 0);
    seed(i, 0) = kind.divergence == Divergence::JS ? -s / m : -s * (1.0 - s) / m;
  }
  const Matrix dx = backpropagate(d, t, d.depth() - 1, std::move(seed), true).input;
  return chain_to_parameters(g, noise, dx);
}

void apply_step(Generator& g, const GenGradient& grad, double step) {
  axpy(step, grad.eta, location(g));
  std::visit(overloaded{[](LocationGen&) {},
                        [&](AffineGen& a) {
                          if (grad.scale) {
                            axpy(step, grad.scale->data(), a.scale.data());
                          }
                        },
                        [&](EllipticalGen& e) {
                          if (grad.radial) {
                            apply_gradient(e.radial, *grad.radial, step);
                          }
                          if (e.scale && grad.scale) {
                            axpy(step, grad.scale->data(), e.scale->data());
                          }
                        }},
             g);
}

Mlp make_radial_net(std::span<const std::size_t> dims, InitScheme scheme, Rng& rng) {
  if (dims.size() < 2 || dims.back() != 1) {
    throw std::invalid_argument("make_radial_net: dims must end in a single output");
  }
  MlpSpec spec;
  spec.dims.assign(dims.begin(), dims.end());
  for (std::size_t k = 0; k + 2 < dims.size(); ++k) {
    spec.acts.push_back(Activation::Relu);
  }
  spec.acts.push_back(Activation::Abs);
  return init_mlp(spec, scheme, rng);
}

} // namespace robgan
