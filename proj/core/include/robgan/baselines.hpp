#pragma once

#include <optional>
#include <span>

#include "robgan/matrix.hpp"

namespace robgan {

/// Per-column sample median; even counts average the two middle order statistics.
Vector coordinatewise_median(const Matrix& data);

Vector sample_mean(const Matrix& data);

/// Grid of all data points plus the midpoints between consecutive sorted points.
Vector default_depth_grid(std::span<const double> data);

/// 1-D halfspace depth of eta: min(fraction >= eta, fraction <= eta).
double halfspace_depth_1d(std::span<const double> sorted_data, double eta);

/// Grid maximizer of the 1-D halfspace depth (the r -> 0 limit of TV-Learning).
/// Ties resolve to the midpoint of the smallest and largest maximizing grid points.
double tv_learning_1d(std::span<const double> data, std::span<const double> eta_grid);

struct MetricReport {
  double l2_error = 0.0;
  std::optional<double> op_error;
};

/// ||theta_hat - theta||_2, plus ||sigma_hat - sigma||_op when both are present.
MetricReport metrics(std::span<const double> theta_hat, std::span<const double> truth_theta,
                     const std::optional<Matrix>& sigma_hat = std::nullopt,
                     const std::optional<Matrix>& truth_sigma = std::nullopt);

} // namespace robgan
