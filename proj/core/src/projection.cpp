#include "robgan/projection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "robgan/matrix.hpp"

namespace robgan {

namespace {
// Projected points sit on the boundary up to rounding; the slack keeps a
// second projection a no-op.
constexpr double kBoundarySlack = 1.0 + 1e-12;
} // namespace

void project_l1_ball(std::span<double> x, double radius) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("project_l1_ball: radius must be positive");
  }
  if (norm1(x) <= radius * kBoundarySlack) {
    return;
  }
  std::vector<double> mag(x.size());
  std::transform(x.begin(), x.end(), mag.begin(), [](double v) { return std::abs(v); });
  std::sort(mag.begin(), mag.end(), std::greater<>());

  double cumsum = 0.0;
  double threshold = 0.0;
  for (std::size_t j = 0; j < mag.size(); ++j) {
    cumsum += mag[j];
    const double t = (cumsum - radius) / static_cast<double>(j + 1);
    if (mag[j] - t > 0.0) {
      threshold = t;
    } else {
      break;
    }
  }
  for (double& v : x) {
    const double shrunk = std::max(std::abs(v) - threshold, 0.0);
    v = std::copysign(shrunk, v);
  }
}

void project_l2_ball(std::span<double> x, double radius) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("project_l2_ball: radius must be positive");
  }
  const double n = norm2(x);
  if (n <= radius * kBoundarySlack) {
    return;
  }
  const double s = radius / n;
  for (double& v : x) {
    v *= s;
  }
}

} // namespace robgan
