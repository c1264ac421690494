#include "robgan/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace robgan {

Vector sample_standard_normal(Rng& rng, std::size_t n) {
  Vector out(n);
  for (double& x : out) {
    x = rng.normal();
  }
  return out;
}

double cauchy_from_uniform(double u, double location) {
  return location + std::tan(std::numbers::pi * (u - 0.5));
}

Vector sample_cauchy(Rng& rng, double location, std::size_t n) {
  Vector out(n);
  for (double& x : out) {
    x = cauchy_from_uniform(rng.uniform(), location);
  }
  return out;
}

Vector sample_sphere(Rng& rng, std::size_t p) {
  if (p == 0) {
    throw std::invalid_argument("sample_sphere: dimension must be at least 1");
  }
  Vector v(p);
  double r = 0.0;
  while (r == 0.0) {
    for (double& x : v) {
      x = rng.normal();
    }
    r = norm2(v);
  }
  for (double& x : v) {
    x /= r;
  }
  return v;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double cauchy_cdf(double x, double location) {
  return 0.5 + std::atan(x - location) / std::numbers::pi;
}

} // namespace robgan
