#include "robgan/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <thread>

#include "robgan/baselines.hpp"
#include "robgan/generator.hpp"

namespace robgan {

namespace {

template <class E, std::size_t N>
E parse_enum(std::string_view name, const std::array<std::pair<std::string_view, E>, N>& table, const char* what) {
  for (const auto& [s, e] : table) {
    if (s == name) {
      return e;
    }
  }
  throw std::invalid_argument(std::string("unknown ") + what + " '" + std::string(name) + "'");
}

template <class E, std::size_t N>
std::string_view enum_name(E e, const std::array<std::pair<std::string_view, E>, N>& table) {
  for (const auto& [s, v] : table) {
    if (v == e) {
      return s;
    }
  }
  return "?";
}

constexpr std::array<std::pair<std::string_view, Method>, 5> kMethods{{{"jsgan", Method::JSGAN},
                                                                        {"tvgan", Method::TVGAN},
                                                                        {"cwmedian", Method::CwMedian},
                                                                        {"mean", Method::Mean},
                                                                        {"tvlearn1d", Method::TVLearn1D}}};
constexpr std::array<std::pair<std::string_view, CoreFamily>, 3> kCores{{{"gauss_identity", CoreFamily::GaussIdentity},
                                                                         {"gauss_cov", CoreFamily::GaussCov},
                                                                         {"elliptical_cauchy", CoreFamily::EllipticalCauchy}}};
constexpr std::array<std::pair<std::string_view, QFamily>, 5> kQs{{{"none", QFamily::None},
                                                                   {"gauss_shift", QFamily::GaussShift},
                                                                   {"gauss_cov", QFamily::GaussCov},
                                                                   {"cauchy_indep", QFamily::CauchyIndep},
                                                                   {"elliptical_cauchy", QFamily::EllipticalCauchy}}};
constexpr std::array<std::pair<std::string_view, GeneratorKind>, 3> kGens{{{"location", GeneratorKind::Location},
                                                                           {"affine", GeneratorKind::Affine},
                                                                           {"elliptical", GeneratorKind::Elliptical}}};

// FNV-1a; stable across builds, unlike std::hash.
std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t sigma_seed(std::uint64_t base_seed, std::size_t p, std::uint64_t tag) {
  return hash_combine(hash_combine(base_seed, tag), p);
}

constexpr std::uint64_t kCoreSigmaTag = 0xC0;
constexpr std::uint64_t kQSigmaTag = 0xC1;

} // namespace

std::string_view to_string(Method m) { return enum_name(m, kMethods); }
Method method_from_string(std::string_view name) { return parse_enum(name, kMethods, "method"); }
std::string_view to_string(CoreFamily c) { return enum_name(c, kCores); }
CoreFamily core_family_from_string(std::string_view name) { return parse_enum(name, kCores, "core family"); }
std::string_view to_string(QFamily q) { return enum_name(q, kQs); }
QFamily q_family_from_string(std::string_view name) { return parse_enum(name, kQs, "contamination family"); }
std::string_view to_string(GeneratorKind g) { return enum_name(g, kGens); }
GeneratorKind generator_kind_from_string(std::string_view name) { return parse_enum(name, kGens, "generator"); }

void TrainOverrides::apply(TrainConfig& cfg) const {
  if (gamma_d) cfg.gamma_d = *gamma_d;
  if (gamma_g) cfg.gamma_g = *gamma_g;
  if (k_steps) cfg.k_steps = *k_steps;
  if (epochs) cfg.epochs = *epochs;
  if (avg_epochs) cfg.avg_epochs = *avg_epochs;
  if (batch) cfg.batch = *batch;
  if (lambda_reg) cfg.objective.lambda_reg = *lambda_reg;
  if (reg_stat) cfg.objective.reg_stat = *reg_stat;
  if (reg_side) cfg.reg_side = *reg_side;
  if (init_scheme) cfg.init_scheme = *init_scheme;
  if (init_sd) cfg.init_sd = *init_sd;
  if (median_init) cfg.median_init = *median_init;
  if (constraints.any()) cfg.constraints = constraints;
}

void ExperimentConfig::validate() const {
  if (eps.empty() || p.empty() || n.empty() || q.empty()) {
    throw std::invalid_argument("experiment: sweep axes must be non-empty");
  }
  if (estimators.empty()) {
    throw std::invalid_argument("experiment: no estimators");
  }
  if (repetitions < 1) {
    throw std::invalid_argument("experiment: repetitions must be at least 1");
  }
  std::set<std::string> labels;
  for (const EstimatorSpec& e : estimators) {
    if (!labels.insert(e.label).second) {
      throw std::invalid_argument("experiment: duplicate estimator label '" + e.label + "'");
    }
  }
  for (double e : eps) {
    if (!(e >= 0.0 && e < 1.0)) {
      throw std::invalid_argument("experiment: eps must lie in [0, 1)");
    }
  }
  for (std::size_t v : p) {
    if (v < 1) throw std::invalid_argument("experiment: p must be at least 1");
  }
  for (std::size_t v : n) {
    if (v < 1) throw std::invalid_argument("experiment: n must be at least 1");
  }
}

std::uint64_t data_seed(std::uint64_t base_seed, double eps, std::size_t p, std::size_t n, const QSpec& q,
                        std::size_t rep) {
  std::uint64_t h = base_seed;
  h = hash_combine(h, std::bit_cast<std::uint64_t>(eps));
  h = hash_combine(h, p);
  h = hash_combine(h, n);
  h = hash_combine(h, static_cast<std::uint64_t>(q.family));
  h = hash_combine(h, std::bit_cast<std::uint64_t>(q.t));
  return hash_combine(h, rep);
}

std::uint64_t run_seed(std::uint64_t data_seed, std::string_view label) {
  return hash_combine(data_seed, hash_string(label));
}

DatasetSpec cell_dataset(const ExperimentConfig& cfg, double eps, std::size_t p, std::size_t n, const QSpec& q,
                         std::size_t rep) {
  DatasetSpec spec;
  spec.p = p;
  spec.n = n;
  spec.eps = eps;
  spec.theta = Vector(p, cfg.theta);
  spec.seed = data_seed(cfg.base_seed, eps, p, n, q, rep);
  switch (cfg.core) {
  case CoreFamily::GaussIdentity: spec.core = GaussIdentityCore{}; break;
  case CoreFamily::GaussCov:
    spec.core = GaussCovCore{make_structured_sigma(p, sigma_seed(cfg.base_seed, p, kCoreSigmaTag))};
    break;
  case CoreFamily::EllipticalCauchy: spec.core = EllipticalCauchyCore{}; break;
  }
  const Vector loc(p, q.t);
  switch (q.family) {
  case QFamily::None: spec.q = NoContamination{}; break;
  case QFamily::GaussShift: spec.q = GaussShift{loc}; break;
  case QFamily::GaussCov:
    spec.q = GaussCov{loc, make_structured_sigma(p, sigma_seed(cfg.base_seed, p, kQSigmaTag))};
    break;
  case QFamily::CauchyIndep: spec.q = CauchyIndep{loc}; break;
  case QFamily::EllipticalCauchy: spec.q = EllipticalCauchyQ{loc}; break;
  }
  if (eps == 0.0) {
    spec.q = NoContamination{};
  }
  return spec;
}

std::vector<std::size_t> resolved_hidden(const EstimatorSpec& est, std::size_t n) {
  if (est.hidden) {
    return *est.hidden;
  }
  return {default_hidden_width(n)};
}

TrainConfig resolved_train_config(const EstimatorSpec& est, std::size_t p, std::size_t n) {
  std::vector<std::size_t> structure{p};
  for (std::size_t h : resolved_hidden(est, n)) {
    structure.push_back(h);
  }
  structure.push_back(1);
  const Divergence div = est.method == Method::TVGAN ? Divergence::TV : Divergence::JS;
  TrainConfig cfg = default_config(structure, n, div);
  est.overrides.apply(cfg);
  return cfg;
}

namespace {

std::optional<Matrix> truth_scatter(const DatasetSpec& spec) {
  if (const auto* c = std::get_if<GaussCovCore>(&spec.core)) {
    return c->cov;
  }
  if (std::holds_alternative<GaussIdentityCore>(spec.core)) {
    return Matrix::identity(spec.p);
  }
  return std::nullopt;
}

Generator initial_generator(const EstimatorSpec& est, std::size_t p, const TrainConfig& cfg) {
  switch (est.generator) {
  case GeneratorKind::Location: return LocationGen{Vector(p, 0.0)};
  case GeneratorKind::Affine: return AffineGen{Vector(p, 0.0), Matrix::identity(p)};
  case GeneratorKind::Elliptical: {
    if (est.radial_dims.empty() || est.radial_dims.back() != 1) {
      throw std::invalid_argument("elliptical generator: radial net must end in one unit");
    }
    Rng rng = Rng(cfg.seed).split(21);
    return EllipticalGen{Vector(p, 0.0), std::nullopt, make_radial_net(est.radial_dims, cfg.init_scheme, rng),
                         est.radial_noise};
  }
  }
  throw std::logic_error("initial_generator: bad kind");
}

} // namespace

RunOutcome run_estimator(const EstimatorSpec& est, const Dataset& data, std::uint64_t seed) {
  const Matrix& x = data.x;
  const std::size_t p = x.cols();
  const Vector& theta = data.spec.theta;
  RunOutcome out;
  switch (est.method) {
  case Method::CwMedian: out.estimate.theta_hat = coordinatewise_median(x); break;
  case Method::Mean: out.estimate.theta_hat = sample_mean(x); break;
  case Method::TVLearn1D: {
    if (p != 1) {
      throw std::invalid_argument("tvlearn1d needs one-dimensional data");
    }
    const Vector col = x.column(0);
    out.estimate.theta_hat = {tv_learning_1d(col, default_depth_grid(col))};
    break;
  }
  case Method::JSGAN:
  case Method::TVGAN: {
    TrainConfig cfg = resolved_train_config(est, p, x.rows());
    cfg.seed = seed;
    const std::vector<std::size_t> hidden = resolved_hidden(est, x.rows());
    const Mlp d0 = init_discriminator(discriminator_spec(p, hidden, est.hidden_act), cfg);
    out.estimate = train(x, d0, initial_generator(est, p, cfg), cfg).estimate;
    break;
  }
  }
  const MetricReport m = metrics(out.estimate, theta, truth_scatter(data.spec));
  out.l2_error = m.l2_error;
  out.op_error = m.op_error;
  return out;
}

std::pair<double, double> mean_sd(const std::vector<double>& values) {
  double sum = 0.0;
  std::size_t k = 0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++k;
    }
  }
  if (k == 0) {
    return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  }
  const double mean = sum / static_cast<double>(k);
  if (k == 1) {
    return {mean, 0.0};
  }
  double ss = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) {
      ss += (v - mean) * (v - mean);
    }
  }
  return {mean, std::sqrt(ss / static_cast<double>(k - 1))};
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  res.config = cfg;

  struct Task {
    std::size_t cell;
    std::size_t rep;
  };
  struct Slot {
    double error = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> op_error;
    std::optional<double> l1_w;
    double seconds = 0.0;
    std::string failure;
  };

  for (double eps : cfg.eps) {
    for (std::size_t p : cfg.p) {
      for (std::size_t n : cfg.n) {
        for (const QSpec& q : cfg.q) {
          for (const EstimatorSpec& est : cfg.estimators) {
            CellRecord rec;
            rec.key = CellKey{eps, p, n, q, est.label};
            rec.method = est.method;
            res.cells.push_back(std::move(rec));
          }
        }
      }
    }
  }
  const std::size_t per_axis = cfg.estimators.size();
  const std::size_t reps = cfg.repetitions;
  std::vector<Slot> slots(res.cells.size() * reps);

  // One task per (axis point, repetition): the dataset is sampled once and
  // shared by every estimator.
  const std::size_t axis_points = res.cells.size() / per_axis;
  std::vector<Task> tasks;
  for (std::size_t a = 0; a < axis_points; ++a) {
    for (std::size_t r = 0; r < reps; ++r) {
      tasks.push_back({a, r});
    }
  }

  auto run_task = [&](const Task& t) {
    const CellKey& key = res.cells[t.cell * per_axis].key;
    const DatasetSpec spec = cell_dataset(cfg, key.eps, key.p, key.n, key.q, t.rep);
    std::optional<Dataset> data;
    std::string data_error;
    try {
      data = sample_contaminated(spec);
    } catch (const std::exception& e) {
      data_error = std::string("dataset: ") + e.what();
    }
    for (std::size_t k = 0; k < per_axis; ++k) {
      Slot& slot = slots[(t.cell * per_axis + k) * reps + t.rep];
      if (!data) {
        slot.failure = data_error;
        continue;
      }
      const EstimatorSpec& est = cfg.estimators[k];
      const auto start = std::chrono::steady_clock::now();
      try {
        const RunOutcome o = run_estimator(est, *data, run_seed(spec.seed, est.label));
        slot.error = o.l2_error;
        slot.op_error = o.op_error;
        if (!o.estimate.trace.empty()) {
          slot.l1_w = o.estimate.trace.back().l1_w;
        }
      } catch (const std::exception& e) {
        slot.failure = e.what();
      }
      slot.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, tasks.size()));
  if (jobs == 1) {
    for (const Task& t : tasks) {
      run_task(t);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
          run_task(tasks[i]);
        }
      });
    }
  }

  for (std::size_t c = 0; c < res.cells.size(); ++c) {
    CellRecord& rec = res.cells[c];
    std::vector<double> ops;
    std::vector<double> l1s;
    for (std::size_t r = 0; r < reps; ++r) {
      const Slot& s = slots[c * reps + r];
      rec.errors.push_back(s.error);
      rec.runtime_seconds += s.seconds;
      if (!s.failure.empty()) {
        rec.failures.push_back("rep " + std::to_string(r) + ": " + s.failure);
      }
      if (s.op_error) ops.push_back(*s.op_error);
      if (s.l1_w) l1s.push_back(*s.l1_w);
    }
    std::tie(rec.mean_error, rec.sd_error) = mean_sd(rec.errors);
    if (!ops.empty()) rec.mean_op_error = mean_sd(ops).first;
    if (!l1s.empty()) rec.mean_l1_w = mean_sd(l1s).first;
  }
  return res;
}

} // namespace robgan
