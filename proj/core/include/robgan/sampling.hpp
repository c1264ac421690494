#pragma once

#include <cstddef>

#include "robgan/matrix.hpp"
#include "robgan/rng.hpp"

namespace robgan {

Vector sample_standard_normal(Rng& rng, std::size_t n);

/// location + tan(pi (u - 1/2)), the inverse-CDF map for a standard Cauchy.
double cauchy_from_uniform(double u, double location);

Vector sample_cauchy(Rng& rng, double location, std::size_t n);

/// Uniform direction on the unit sphere in R^p.
Vector sample_sphere(Rng& rng, std::size_t p);

/// Standard normal CDF.
double normal_cdf(double x);

double cauchy_cdf(double x, double location = 0.0);

} // namespace robgan
