#pragma once

#include <span>

namespace robgan {

/// Euclidean projection onto {x : sum |x_i| <= radius}, in place.
/// Uses the sort-based simplex projection on |x| and restores signs.
void project_l1_ball(std::span<double> x, double radius);

/// Euclidean projection onto {x : ||x||_2 <= radius}, in place.
void project_l2_ball(std::span<double> x, double radius);

} // namespace robgan
