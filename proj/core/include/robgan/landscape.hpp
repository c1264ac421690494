#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "robgan/matrix.hpp"

namespace robgan {

/// Max over b of [mean sigmoid(w x + b) over `data` - mean sigmoid(w z + b) over `fake`].
/// Coarse scan of b followed by golden-section refinement to 1e-6.
double landscape_value(std::span<const double> data, std::span<const double> fake, double w);

/// Entry (i, j) is the TV-GAN objective F(eta_i, w_j) with the logistic bias
/// maximized out. Fake draws for each cell are fresh N(eta_i, 1) samples from a
/// stream derived from (seed, cell index).
Matrix landscape_grid(std::span<const double> data, std::span<const double> eta_grid, std::span<const double> w_grid,
                      std::size_t fake_draws, std::uint64_t seed = 0);

/// Index of the w maximizing each row (first on ties).
std::vector<std::size_t> argmax_per_row(const Matrix& grid);

/// weight * N(mean, variance)
struct MixtureComponent {
  double weight = 1.0;
  double mean = 0.0;
  double variance = 1.0;
};

/// Parses "0.8:N(1,1),0.2:N(10,1)". Weights must be positive and sum to 1.
std::vector<MixtureComponent> parse_mixture(std::string_view text);

/// n iid draws; the component of each draw is chosen by one uniform.
Vector sample_mixture_1d(const std::vector<MixtureComponent>& mix, std::size_t n, std::uint64_t seed);

/// Parses "start:stop:step" into start, start + step, ... up to stop inclusive.
Vector parse_range(std::string_view text);

/// One "eta,w,F" line per cell, with a header.
void write_landscape_csv(const Matrix& grid, std::span<const double> eta_grid, std::span<const double> w_grid,
                         std::ostream& out);

} // namespace robgan
