#include "robgan/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "robgan/linalg.hpp"

namespace robgan {

Vector coordinatewise_median(const Matrix& data) {
  if (data.rows() == 0) {
    throw std::invalid_argument("coordinatewise_median: no rows");
  }
  const std::size_t n = data.rows();
  Vector out(data.cols());
  for (std::size_t j = 0; j < data.cols(); ++j) {
    Vector col = data.column(j);
    std::sort(col.begin(), col.end());
    out[j] = n % 2 == 1 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
  }
  return out;
}

Vector sample_mean(const Matrix& data) {
  if (data.rows() == 0) {
    throw std::invalid_argument("sample_mean: no rows");
  }
  Vector out(data.cols(), 0.0);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    axpy(1.0, data.row(i), out);
  }
  for (double& v : out) {
    v /= static_cast<double>(data.rows());
  }
  return out;
}

Vector default_depth_grid(std::span<const double> data) {
  Vector sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  Vector grid;
  grid.reserve(2 * sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    grid.push_back(sorted[i]);
    if (i + 1 < sorted.size()) {
      grid.push_back(0.5 * (sorted[i] + sorted[i + 1]));
    }
  }
  return grid;
}

double halfspace_depth_1d(std::span<const double> sorted_data, double eta) {
  const auto n = static_cast<double>(sorted_data.size());
  const auto below_or_at = std::upper_bound(sorted_data.begin(), sorted_data.end(), eta) - sorted_data.begin();
  const auto strictly_below = std::lower_bound(sorted_data.begin(), sorted_data.end(), eta) - sorted_data.begin();
  const double at_least = n - static_cast<double>(strictly_below);
  return std::min(at_least, static_cast<double>(below_or_at)) / n;
}

double tv_learning_1d(std::span<const double> data, std::span<const double> eta_grid) {
  if (data.empty()) {
    throw std::invalid_argument("tv_learning_1d: empty data");
  }
  if (eta_grid.empty()) {
    throw std::invalid_argument("tv_learning_1d: empty grid");
  }
  Vector sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  double best = -1.0;
  double lo = 0.0;
  double hi = 0.0;
  for (double eta : eta_grid) {
    const double depth = halfspace_depth_1d(sorted, eta);
    if (depth > best) {
      best = depth;
      lo = eta;
      hi = eta;
    } else if (depth == best) {
      lo = std::min(lo, eta);
      hi = std::max(hi, eta);
    }
  }
  return 0.5 * (lo + hi);
}

MetricReport metrics(std::span<const double> theta_hat, std::span<const double> truth_theta,
                     const std::optional<Matrix>& sigma_hat, const std::optional<Matrix>& truth_sigma) {
  if (theta_hat.size() != truth_theta.size()) {
    throw std::invalid_argument("metrics: dimension mismatch");
  }
  MetricReport r;
  r.l2_error = norm2(subtract(theta_hat, truth_theta));
  if (sigma_hat && truth_sigma) {
    r.op_error = operator_norm(*sigma_hat - *truth_sigma);
  }
  return r;
}

} // namespace robgan
