#pragma once

#include <cstdint>
#include <iosfwd>
#include <variant>
#include <vector>

#include "robgan/matrix.hpp"
#include "robgan/rng.hpp"

namespace robgan {

// Contamination laws Q.
struct NoContamination {};
struct GaussShift {
  Vector mean;
};
struct GaussCov {
  Vector mean;
  Matrix cov;
};
/// Product of independent 1-D standard Cauchys, coordinate j centred at location[j].
struct CauchyIndep {
  Vector location;
};
/// Multivariate (elliptical) Cauchy with identity scatter.
struct EllipticalCauchyQ {
  Vector location;
};
using ContaminationQ = std::variant<NoContamination, GaussShift, GaussCov, CauchyIndep, EllipticalCauchyQ>;

// Core laws P_theta.
struct GaussIdentityCore {};
struct GaussCovCore {
  Matrix cov;
};
struct EllipticalCauchyCore {};
using CoreLaw = std::variant<GaussIdentityCore, GaussCovCore, EllipticalCauchyCore>;

/// A draw from (1 - eps) P_theta + eps Q.
struct DatasetSpec {
  std::size_t p = 1;
  std::size_t n = 1;
  double eps = 0.0;
  Vector theta;
  CoreLaw core = GaussIdentityCore{};
  ContaminationQ q = NoContamination{};
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on a dimension mismatch or out-of-range field.
  void validate() const;
};

struct Dataset {
  Matrix x;
  /// true = row drawn from Q. Diagnostics only; estimators take `x` alone.
  std::vector<bool> labels;
  DatasetSpec spec;

  std::size_t contaminated_count() const;
};

Dataset sample_contaminated(const DatasetSpec& spec);

/// theta + radius * direction.
Vector elliptical_point(std::span<const double> theta, double radius, std::span<const double> direction);

/// Radius of a p-dimensional standard Cauchy: chi(p) / chi(1).
double sample_cauchy_radius(Rng& rng, std::size_t p);

Matrix sample_elliptical_cauchy(Rng& rng, std::span<const double> theta, std::size_t n);

/// Intermediate products of the structured covariance recipe.
struct StructuredPrecision {
  Matrix gamma;      // sparse symmetric precision before the shift
  Matrix gamma_bar;  // gamma + (|min eig| + 0.05) I
  Matrix sigma;      // gamma_bar^{-1}
};

/// Shift a symmetric precision matrix to be SPD and invert it.
StructuredPrecision regularize_precision(Matrix gamma);

/// Sparse random precision: gamma_ij = z_ij * tau_ij (i <= j), z ~ U(0.4, 0.8),
/// tau ~ Bernoulli(0.1), mirrored to i > j, then regularized.
StructuredPrecision make_structured_precision(std::size_t p, std::uint64_t seed);

Matrix make_structured_sigma(std::size_t p, std::uint64_t seed);

/// CSV with header x1,...,xp,contaminated.
void write_dataset_csv(const Dataset& data, std::ostream& out);

/// Reads the x columns of a CSV with a header row. A column named
/// "contaminated" is dropped so labels never reach an estimator. Lines
/// starting with '#' are skipped.
Matrix read_data_csv(std::istream& in);

} // namespace robgan
