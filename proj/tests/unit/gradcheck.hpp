#pragma once

// Central-difference gradient checking used by the nets, objectives and
// generators suites.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace gradcheck {

inline double step_for(double param) { return 1e-4 * std::max(1.0, std::abs(param)); }

inline double central(const std::function<double()>& f, double& param) {
  const double h = step_for(param);
  const double saved = param;
  param = saved + h;
  const double up = f();
  param = saved - h;
  const double down = f();
  param = saved;
  return (up - down) / (2.0 * h);
}

/// Relative error below 1e-5, or absolute error below 1e-8 when both sides are tiny.
inline bool agrees(double analytic, double numeric) {
  if (std::abs(analytic) < 1e-8) {
    return std::abs(numeric) < 1e-8 + 1e-9;
  }
  return std::abs(analytic - numeric) <= 1e-5 * std::max(std::abs(analytic), std::abs(numeric));
}

} // namespace gradcheck
