#include "robgan/landscape.hpp"

#include <algorithm>
#include <charconv>
#include <string>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "robgan/mlp.hpp"
#include "robgan/rng.hpp"

namespace robgan {

namespace {

double gap(std::span<const double> data, std::span<const double> fake, double w, double b) {
  double sr = 0.0;
  for (double x : data) {
    sr += sigmoid(w * x + b);
  }
  double sf = 0.0;
  for (double z : fake) {
    sf += sigmoid(w * z + b);
  }
  return sr / static_cast<double>(data.size()) - sf / static_cast<double>(fake.size());
}

} // namespace

double landscape_value(std::span<const double> data, std::span<const double> fake, double w) {
  if (data.empty() || fake.empty()) {
    throw std::invalid_argument("landscape_value: empty sample");
  }
  if (w == 0.0) {
    return 0.0;
  }
  double span = 0.0;
  for (double x : data) {
    span = std::max(span, std::abs(x));
  }
  for (double z : fake) {
    span = std::max(span, std::abs(z));
  }
  const double bound = 10.0 * std::max(std::abs(w) * span, 1.0);

  // The b-profile can be multimodal; bracket the best coarse point first.
  constexpr int kCoarse = 200;
  const double step = 2.0 * bound / kCoarse;
  int best = 0;
  double best_val = -1.0;
  for (int k = 0; k <= kCoarse; ++k) {
    const double v = gap(data, fake, w, -bound + k * step);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  double lo = -bound + std::max(best - 1, 0) * step;
  double hi = -bound + std::min(best + 1, kCoarse) * step;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = gap(data, fake, w, c);
  double fd = gap(data, fake, w, d);
  while (hi - lo > 1e-6) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = gap(data, fake, w, c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = gap(data, fake, w, d);
    }
  }
  return std::max({best_val, fc, fd});
}

Matrix landscape_grid(std::span<const double> data, std::span<const double> eta_grid, std::span<const double> w_grid,
                      std::size_t fake_draws, std::uint64_t seed) {
  if (data.empty() || fake_draws == 0) {
    throw std::invalid_argument("landscape_grid: need data and at least one fake draw");
  }
  const Rng root(seed);
  Matrix grid(eta_grid.size(), w_grid.size());
  Vector fake(fake_draws);
  for (std::size_t i = 0; i < eta_grid.size(); ++i) {
    for (std::size_t j = 0; j < w_grid.size(); ++j) {
      Rng cell = root.split(i * w_grid.size() + j);
      for (double& z : fake) {
        z = eta_grid[i] + cell.normal();
      }
      grid(i, j) = landscape_value(data, fake, w_grid[j]);
    }
  }
  return grid;
}

std::vector<std::size_t> argmax_per_row(const Matrix& grid) {
  std::vector<std::size_t> out(grid.rows(), 0);
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    const auto r = grid.row(i);
    out[i] = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

void write_landscape_csv(const Matrix& grid, std::span<const double> eta_grid, std::span<const double> w_grid,
                         std::ostream& out) {
  if (grid.rows() != eta_grid.size() || grid.cols() != w_grid.size()) {
    throw std::invalid_argument("write_landscape_csv: grid shape does not match axes");
  }
  out << "eta,w,F\n";
  char buf[96];
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    for (std::size_t j = 0; j < grid.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.17g\n", eta_grid[i], w_grid[j], grid(i, j));
      out << buf;
    }
  }
}

} // namespace robgan

namespace robgan {

namespace {

double parse_double(std::string_view s, std::string_view context) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("bad number '" + std::string(s) + "' in '" + std::string(context) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

} // namespace

std::vector<MixtureComponent> parse_mixture(std::string_view text) {
  std::vector<MixtureComponent> mix;
  // Commas also separate the N(.,.) arguments, so walk the string by hand.
  std::size_t pos = 0;
  double total = 0.0;
  while (pos < text.size()) {
    const std::size_t colon = text.find(':', pos);
    const std::size_t open = text.find("N(", pos);
    const std::size_t close = text.find(')', pos);
    if (colon == std::string_view::npos || open == std::string_view::npos || close == std::string_view::npos ||
        !(colon < open && open < close)) {
      throw std::invalid_argument("bad mixture '" + std::string(text) + "'; expected w:N(mean,var),...");
    }
    const auto args = split(text.substr(open + 2, close - open - 2), ',');
    if (args.size() != 2) {
      throw std::invalid_argument("bad component in '" + std::string(text) + "'");
    }
    MixtureComponent c{parse_double(text.substr(pos, colon - pos), text), parse_double(args[0], text),
                       parse_double(args[1], text)};
    if (!(c.weight > 0.0) || !(c.variance > 0.0)) {
      throw std::invalid_argument("mixture weights and variances must be positive");
    }
    total += c.weight;
    mix.push_back(c);
    pos = close + 1;
    if (pos < text.size()) {
      if (text[pos] != ',') {
        throw std::invalid_argument("bad mixture '" + std::string(text) + "'");
      }
      ++pos;
    }
  }
  if (mix.empty() || std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("mixture weights must sum to 1");
  }
  return mix;
}

Vector sample_mixture_1d(const std::vector<MixtureComponent>& mix, std::size_t n, std::uint64_t seed) {
  const Rng root(seed);
  Rng pick = root.split(1);
  Rng noise = root.split(2);
  Vector out(n);
  for (double& x : out) {
    const double u = pick.uniform();
    double acc = 0.0;
    const MixtureComponent* c = &mix.back();
    for (const MixtureComponent& m : mix) {
      acc += m.weight;
      if (u < acc) {
        c = &m;
        break;
      }
    }
    x = c->mean + std::sqrt(c->variance) * noise.normal();
  }
  return out;
}

Vector parse_range(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) {
    throw std::invalid_argument("bad range '" + std::string(text) + "'; expected start:stop:step");
  }
  const double a = parse_double(parts[0], text);
  const double b = parse_double(parts[1], text);
  const double step = parse_double(parts[2], text);
  if (!(step > 0.0) || b < a) {
    throw std::invalid_argument("bad range '" + std::string(text) + "'");
  }
  const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
  Vector out(count);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = a + static_cast<double>(k) * step;
  }
  return out;
}

} // namespace robgan
