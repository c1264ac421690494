#include "robgan/contamination.hpp"

#include <cmath>
#include <cstdio>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "robgan/linalg.hpp"
#include "robgan/sampling.hpp"

namespace robgan {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_dim(std::size_t got, std::size_t p, const char* what) {
  if (got != p) {
    throw std::invalid_argument(std::string("DatasetSpec: ") + what + " has dimension " +
                                std::to_string(got) + ", expected " + std::to_string(p));
  }
}

void require_cov(const Matrix& cov, std::size_t p, const char* what) {
  if (cov.rows() != p || cov.cols() != p) {
    throw std::invalid_argument(std::string("DatasetSpec: ") + what + " covariance is not p x p");
  }
  if (!is_symmetric(cov, 1e-12)) {
    throw std::invalid_argument(std::string("DatasetSpec: ") + what + " covariance is not symmetric");
  }
}

// Stream indices for the per-dataset sub-streams.
constexpr std::uint64_t kAssignStream = 1;
constexpr std::uint64_t kCoreStream = 2;
constexpr std::uint64_t kContamStream = 3;

void fill_gaussian(Rng& rng, std::span<double> row, std::span<const double> mean, const Matrix* chol) {
  const std::size_t p = row.size();
  if (chol == nullptr) {
    for (std::size_t j = 0; j < p; ++j) {
      row[j] = mean[j] + rng.normal();
    }
    return;
  }
  Vector z(p);
  for (double& v : z) {
    v = rng.normal();
  }
  for (std::size_t i = 0; i < p; ++i) {
    double s = mean[i];
    for (std::size_t k = 0; k <= i; ++k) {
      s += (*chol)(i, k) * z[k];
    }
    row[i] = s;
  }
}

void fill_elliptical_cauchy(Rng& rng, std::span<double> row, std::span<const double> center) {
  const double radius = sample_cauchy_radius(rng, row.size());
  const Vector u = sample_sphere(rng, row.size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    row[j] = center[j] + radius * u[j];
  }
}

} // namespace

void DatasetSpec::validate() const {
  if (p < 1) {
    throw std::invalid_argument("DatasetSpec: p must be at least 1");
  }
  if (n < 1) {
    throw std::invalid_argument("DatasetSpec: n must be at least 1");
  }
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw std::invalid_argument("DatasetSpec: eps must lie in [0, 1]");
  }
  require_dim(theta.size(), p, "theta");
  std::visit(overloaded{[](const GaussIdentityCore&) {}, [&](const GaussCovCore& c) { require_cov(c.cov, p, "core"); },
                        [](const EllipticalCauchyCore&) {}},
             core);
  std::visit(overloaded{[](const NoContamination&) {}, [&](const GaussShift& q) { require_dim(q.mean.size(), p, "Q mean"); },
                        [&](const GaussCov& q) {
                          require_dim(q.mean.size(), p, "Q mean");
                          require_cov(q.cov, p, "Q");
                        },
                        [&](const CauchyIndep& q) { require_dim(q.location.size(), p, "Q location"); },
                        [&](const EllipticalCauchyQ& q) { require_dim(q.location.size(), p, "Q location"); }},
             q);
  if (eps > 0.0 && std::holds_alternative<NoContamination>(q)) {
    throw std::invalid_argument("DatasetSpec: eps > 0 requires a contamination law");
  }
}

std::size_t Dataset::contaminated_count() const {
  std::size_t c = 0;
  for (bool b : labels) {
    c += b ? 1 : 0;
  }
  return c;
}

Dataset sample_contaminated(const DatasetSpec& spec) {
  spec.validate();
  const Rng root(spec.seed);
  Rng assign = root.split(kAssignStream);
  Rng core_rng = root.split(kCoreStream);
  Rng contam_rng = root.split(kContamStream);

  Dataset out;
  out.spec = spec;
  out.x = Matrix(spec.n, spec.p);
  out.labels.resize(spec.n);
  // Assignment first, from its own stream, so the contaminated-row pattern is
  // the same for every Q at a fixed seed.
  for (std::size_t i = 0; i < spec.n; ++i) {
    out.labels[i] = assign.uniform() < spec.eps;
  }

  Matrix core_chol;
  if (const auto* c = std::get_if<GaussCovCore>(&spec.core)) {
    core_chol = cholesky(c->cov);
  }
  Matrix q_chol;
  if (const auto* q = std::get_if<GaussCov>(&spec.q)) {
    q_chol = cholesky(q->cov);
  }

  for (std::size_t i = 0; i < spec.n; ++i) {
    auto row = out.x.row(i);
    if (!out.labels[i]) {
      std::visit(overloaded{[&](const GaussIdentityCore&) { fill_gaussian(core_rng, row, spec.theta, nullptr); },
                            [&](const GaussCovCore&) { fill_gaussian(core_rng, row, spec.theta, &core_chol); },
                            [&](const EllipticalCauchyCore&) { fill_elliptical_cauchy(core_rng, row, spec.theta); }},
                 spec.core);
    } else {
      std::visit(overloaded{[](const NoContamination&) {},
                            [&](const GaussShift& q) { fill_gaussian(contam_rng, row, q.mean, nullptr); },
                            [&](const GaussCov& q) { fill_gaussian(contam_rng, row, q.mean, &q_chol); },
                            [&](const CauchyIndep& q) {
                              for (std::size_t j = 0; j < spec.p; ++j) {
                                row[j] = cauchy_from_uniform(contam_rng.uniform(), q.location[j]);
                              }
                            },
                            [&](const EllipticalCauchyQ& q) { fill_elliptical_cauchy(contam_rng, row, q.location); }},
                 spec.q);
    }
  }
  return out;
}

Vector elliptical_point(std::span<const double> theta, double radius, std::span<const double> direction) {
  if (theta.size() != direction.size()) {
    throw std::invalid_argument("elliptical_point: dimension mismatch");
  }
  Vector x(theta.begin(), theta.end());
  axpy(radius, direction, x);
  return x;
}

double sample_cauchy_radius(Rng& rng, std::size_t p) {
  double chi2 = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    const double z = rng.normal();
    chi2 += z * z;
  }
  double denom = 0.0;
  while (denom == 0.0) {
    denom = std::abs(rng.normal());
  }
  return std::sqrt(chi2) / denom;
}

Matrix sample_elliptical_cauchy(Rng& rng, std::span<const double> theta, std::size_t n) {
  if (n < 1) {
    throw std::invalid_argument("sample_elliptical_cauchy: n must be at least 1");
  }
  Matrix out(n, theta.size());
  for (std::size_t i = 0; i < n; ++i) {
    fill_elliptical_cauchy(rng, out.row(i), theta);
  }
  return out;
}

StructuredPrecision regularize_precision(Matrix gamma) {
  if (!is_symmetric(gamma)) {
    throw std::invalid_argument("regularize_precision: gamma must be exactly symmetric");
  }
  const Vector eig = symmetric_eigenvalues(gamma);
  const double shift = std::abs(eig.front()) + 0.05;
  Matrix bar = gamma;
  for (std::size_t i = 0; i < bar.rows(); ++i) {
    bar(i, i) += shift;
  }
  Matrix sigma = invert_spd(bar);
  return {std::move(gamma), std::move(bar), std::move(sigma)};
}

StructuredPrecision make_structured_precision(std::size_t p, std::uint64_t seed) {
  if (p < 1) {
    throw std::invalid_argument("make_structured_precision: p must be at least 1");
  }
  Rng rng(seed);
  Matrix gamma(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      const double z = rng.uniform(0.4, 0.8);
      const bool tau = rng.bernoulli(0.1);
      const double v = tau ? z : 0.0;
      gamma(i, j) = v;
      gamma(j, i) = v;
    }
  }
  return regularize_precision(std::move(gamma));
}

Matrix make_structured_sigma(std::size_t p, std::uint64_t seed) {
  return make_structured_precision(p, seed).sigma;
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
  const std::size_t p = data.x.cols();
  for (std::size_t j = 0; j < p; ++j) {
    out << 'x' << (j + 1) << ',';
  }
  out << "contaminated\n";
  char buf[32];
  for (std::size_t i = 0; i < data.x.rows(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", data.x(i, j));
      out << buf << ',';
    }
    out << (data.labels[i] ? 1 : 0) << '\n';
  }
}

Matrix read_data_csv(std::istream& in) {
  std::string line;
  auto next_line = [&]() {
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line.front() != '#') return true;
    }
    return false;
  };
  if (!next_line()) {
    throw std::invalid_argument("data csv: missing header");
  }
  std::vector<bool> keep;
  {
    std::stringstream hs(line);
    std::string name;
    while (std::getline(hs, name, ',')) {
      keep.push_back(name != "contaminated");
    }
  }
  std::size_t p = 0;
  for (bool k : keep) p += k ? 1 : 0;
  if (p == 0) {
    throw std::invalid_argument("data csv: no data columns");
  }
  std::vector<double> values;
  std::size_t rows = 0;
  while (next_line()) {
    std::size_t col = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i < line.size() && line[i] != ',') continue;
      if (col >= keep.size()) {
        throw std::invalid_argument("data csv: too many fields on row " + std::to_string(rows + 1));
      }
      if (keep[col]) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(line.data() + start, line.data() + i, v);
        if (ec != std::errc{} || ptr != line.data() + i) {
          throw std::invalid_argument("data csv: bad number on row " + std::to_string(rows + 1));
        }
        values.push_back(v);
      }
      ++col;
      start = i + 1;
    }
    if (col != keep.size()) {
      throw std::invalid_argument("data csv: wrong field count on row " + std::to_string(rows + 1));
    }
    ++rows;
  }
  if (rows == 0) {
    throw std::invalid_argument("data csv: no rows");
  }
  return Matrix(rows, p, std::move(values));
}

} // namespace robgan
