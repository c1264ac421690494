#pragma once

#include <optional>
#include <variant>

#include "robgan/matrix.hpp"
#include "robgan/mlp.hpp"
#include "robgan/objectives.hpp"
#include "robgan/rng.hpp"

namespace robgan {

/// G(z) = z + eta, z ~ N(0, I).
struct LocationGen {
  Vector eta;
};

/// G(z) = scale z + eta with lower-triangular scale; scatter = scale scale^T.
struct AffineGen {
  Vector eta;
  Matrix scale;
};

enum class RadialNoise { Gaussian, Uniform };

/// G(xi, U) = radial(xi) * (scale U) + eta, U uniform on the sphere. `radial`
/// ends in an Abs unit so radii are non-negative. Without `scale` the scatter
/// is the identity.
struct EllipticalGen {
  Vector eta;
  std::optional<Matrix> scale;
  Mlp radial;
  RadialNoise noise = RadialNoise::Gaussian;
};

using Generator = std::variant<LocationGen, AffineGen, EllipticalGen>;

/// The random inputs behind a generated batch. Location and Affine use `z`;
/// Elliptical uses `xi` and `u`.
struct BaseNoise {
  Matrix z;
  Matrix xi;
  Matrix u;
};

struct GenSample {
  Matrix x;
  BaseNoise noise;
};

std::size_t dimension(const Generator& g);
const Vector& location(const Generator& g);
Vector& location(Generator& g);
/// scale scale^T, or nothing for generators with identity scatter.
std::optional<Matrix> scatter(const Generator& g);

GenSample gen_sample(const Generator& g, Rng& rng, std::size_t m);

/// Deterministic map from base noise to samples; gen_sample(...).x equals
/// push_forward(g, gen_sample(...).noise).
Matrix push_forward(const Generator& g, const BaseNoise& noise);

/// Gradient with respect to each trainable generator parameter group.
struct GenGradient {
  Vector eta;
  std::optional<Matrix> scale;
  std::optional<MlpGradient> radial;
};

/// Chain rule: given dL/dx for every generated row, the gradient of L with
/// respect to the generator parameters.
GenGradient chain_to_parameters(const Generator& g, const BaseNoise& noise, const Matrix& dx);

/// Generator loss on a fixed noise batch: JS (1/m) sum log(1 - D(G(z))), TV -(1/m) sum D(G(z)).
double generator_loss(const Generator& g, const Mlp& d, const BaseNoise& noise, Divergence div);

/// Exact pathwise gradient of generator_loss.
GenGradient gen_grad(const Generator& g, const Mlp& d, const BaseNoise& noise, const ObjectiveKind& kind);

/// params += step * grad. The lower-triangular structure of `scale` is kept.
void apply_step(Generator& g, const GenGradient& grad, double step);

/// Radial network with Gaussian-style noise input and an Abs output unit.
Mlp make_radial_net(std::span<const std::size_t> dims, InitScheme scheme, Rng& rng);

} // namespace robgan
