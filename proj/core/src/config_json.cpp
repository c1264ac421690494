#include "robgan/config_json.hpp"

#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string_view>

#ifndef ROBGAN_VERSION
#define ROBGAN_VERSION "unknown"
#endif
#ifndef ROBGAN_COMPILER
#define ROBGAN_COMPILER "unknown"
#endif

namespace robgan {

namespace {

[[noreturn]] void schema_error(std::string_view where, std::string_view msg) {
  throw std::invalid_argument("config: " + std::string(where) + ": " + std::string(msg));
}

void check_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) {
    schema_error(where, "expected an object");
  }
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (std::string_view a : allowed) {
      ok = ok || key == a;
    }
    if (!ok) {
      schema_error(where, "unknown key '" + key + "'");
    }
  }
}

template <class T>
T get(const Json& j, const char* key, std::string_view where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    schema_error(std::string(where) + "." + key, e.what());
  }
}

template <class T>
std::optional<T> get_opt(const Json& j, const char* key, std::string_view where) {
  if (!j.contains(key)) {
    return std::nullopt;
  }
  return get<T>(j, key, where);
}

// Scalar c means c * 1_p.
Vector vector_field(const Json& j, std::size_t p, std::string_view where) {
  if (j.is_number()) {
    return Vector(p, j.get<double>());
  }
  if (!j.is_array()) {
    schema_error(where, "expected a number or an array");
  }
  Vector v = j.get<Vector>();
  if (v.size() != p) {
    schema_error(where, "expected " + std::to_string(p) + " entries");
  }
  return v;
}

Matrix matrix_field(const Json& j, std::size_t p, std::string_view where) {
  if (j.is_object()) {
    check_keys(j, {"structured_seed"}, where);
    return make_structured_sigma(p, get<std::uint64_t>(j, "structured_seed", where));
  }
  if (!j.is_array() || j.size() != p) {
    schema_error(where, "expected a " + std::to_string(p) + "x" + std::to_string(p) + " array");
  }
  Matrix m(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    if (!j[i].is_array() || j[i].size() != p) {
      schema_error(where, "ragged matrix");
    }
    for (std::size_t k = 0; k < p; ++k) {
      m(i, k) = j[i][k].get<double>();
    }
  }
  return m;
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(Vector(r.begin(), r.end()));
  }
  return rows;
}

std::string family_of(const Json& j, std::string_view where) {
  if (j.is_string()) {
    return j.get<std::string>();
  }
  return get<std::string>(j, "family", where);
}

CoreLaw core_from_json(const Json& j, std::size_t p) {
  const CoreFamily fam = core_family_from_string(family_of(j, "core"));
  if (j.is_object()) {
    check_keys(j, {"family", "sigma"}, "core");
  }
  switch (fam) {
  case CoreFamily::GaussIdentity: return GaussIdentityCore{};
  case CoreFamily::EllipticalCauchy: return EllipticalCauchyCore{};
  case CoreFamily::GaussCov:
    if (!j.is_object() || !j.contains("sigma")) {
      schema_error("core", "gauss_cov needs 'sigma'");
    }
    return GaussCovCore{matrix_field(j.at("sigma"), p, "core.sigma")};
  }
  schema_error("core", "bad family");
}

ContaminationQ q_from_json(const Json& j, std::size_t p) {
  const QFamily fam = q_family_from_string(family_of(j, "q"));
  if (fam == QFamily::None) {
    return NoContamination{};
  }
  if (!j.is_object()) {
    schema_error("q", "needs a location ('t' or 'location')");
  }
  check_keys(j, {"family", "t", "location", "sigma"}, "q");
  Vector loc;
  if (j.contains("location")) {
    loc = vector_field(j.at("location"), p, "q.location");
  } else if (j.contains("t")) {
    loc = Vector(p, get<double>(j, "t", "q"));
  } else {
    schema_error("q", "needs 't' or 'location'");
  }
  switch (fam) {
  case QFamily::GaussShift: return GaussShift{loc};
  case QFamily::CauchyIndep: return CauchyIndep{loc};
  case QFamily::EllipticalCauchy: return EllipticalCauchyQ{loc};
  case QFamily::GaussCov:
    if (!j.contains("sigma")) {
      schema_error("q", "gauss_cov needs 'sigma'");
    }
    return GaussCov{loc, matrix_field(j.at("sigma"), p, "q.sigma")};
  case QFamily::None: break;
  }
  return NoContamination{};
}

Json constraints_json(const NormConstraints& c) {
  Json j = Json::object();
  if (c.l1_output_cap) j["l1_output_cap"] = *c.l1_output_cap;
  if (c.l1_hidden_cap) j["l1_hidden_cap"] = *c.l1_hidden_cap;
  if (c.l2_row_cap) j["l2_row_cap"] = *c.l2_row_cap;
  if (c.bias_cap) j["bias_cap"] = *c.bias_cap;
  return j;
}

NormConstraints constraints_from_json(const Json& j) {
  check_keys(j, {"l1_output_cap", "l1_hidden_cap", "l2_row_cap", "bias_cap"}, "constraints");
  NormConstraints c;
  c.l1_output_cap = get_opt<double>(j, "l1_output_cap", "constraints");
  c.l1_hidden_cap = get_opt<double>(j, "l1_hidden_cap", "constraints");
  c.l2_row_cap = get_opt<double>(j, "l2_row_cap", "constraints");
  c.bias_cap = get_opt<double>(j, "bias_cap", "constraints");
  c.validate();
  return c;
}

std::string_view to_string(RegSide s) { return s == RegSide::Generator ? "generator" : "discriminator"; }

RegSide reg_side_from_string(std::string_view s) {
  if (s == "generator") return RegSide::Generator;
  if (s == "discriminator") return RegSide::Discriminator;
  schema_error("reg_side", "expected 'generator' or 'discriminator'");
}

} // namespace

DatasetSpec dataset_spec_from_json(const Json& j) {
  check_keys(j, {"p", "n", "eps", "theta", "core", "q", "seed"}, "dataset");
  DatasetSpec spec;
  spec.p = get<std::size_t>(j, "p", "dataset");
  spec.n = get<std::size_t>(j, "n", "dataset");
  spec.eps = get_opt<double>(j, "eps", "dataset").value_or(0.0);
  spec.theta = j.contains("theta") ? vector_field(j.at("theta"), spec.p, "dataset.theta") : Vector(spec.p, 0.0);
  spec.core = j.contains("core") ? core_from_json(j.at("core"), spec.p) : CoreLaw{GaussIdentityCore{}};
  spec.q = j.contains("q") ? q_from_json(j.at("q"), spec.p) : ContaminationQ{NoContamination{}};
  spec.seed = get_opt<std::uint64_t>(j, "seed", "dataset").value_or(0);
  spec.validate();
  return spec;
}

Json to_json(const DatasetSpec& spec) {
  Json j;
  j["p"] = spec.p;
  j["n"] = spec.n;
  j["eps"] = spec.eps;
  j["theta"] = spec.theta;
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, GaussIdentityCore>) {
          j["core"] = "gauss_identity";
        } else if constexpr (std::is_same_v<T, GaussCovCore>) {
          j["core"] = {{"family", "gauss_cov"}, {"sigma", matrix_json(c.cov)}};
        } else {
          j["core"] = "elliptical_cauchy";
        }
      },
      spec.core);
  std::visit(
      [&](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, NoContamination>) {
          j["q"] = "none";
        } else if constexpr (std::is_same_v<T, GaussShift>) {
          j["q"] = {{"family", "gauss_shift"}, {"location", q.mean}};
        } else if constexpr (std::is_same_v<T, GaussCov>) {
          j["q"] = {{"family", "gauss_cov"}, {"location", q.mean}, {"sigma", matrix_json(q.cov)}};
        } else if constexpr (std::is_same_v<T, CauchyIndep>) {
          j["q"] = {{"family", "cauchy_indep"}, {"location", q.location}};
        } else {
          j["q"] = {{"family", "elliptical_cauchy"}, {"location", q.location}};
        }
      },
      spec.q);
  j["seed"] = spec.seed;
  return j;
}

TrainOverrides train_overrides_from_json(const Json& j) {
  constexpr std::string_view w = "train";
  check_keys(j,
             {"gamma_d", "gamma_g", "k_steps", "epochs", "avg_epochs", "batch", "lambda", "reg_stat", "reg_side",
              "init", "init_sd", "median_init", "constraints"},
             w);
  TrainOverrides o;
  o.gamma_d = get_opt<double>(j, "gamma_d", w);
  o.gamma_g = get_opt<double>(j, "gamma_g", w);
  o.k_steps = get_opt<std::size_t>(j, "k_steps", w);
  o.epochs = get_opt<std::size_t>(j, "epochs", w);
  o.avg_epochs = get_opt<std::size_t>(j, "avg_epochs", w);
  o.batch = get_opt<std::size_t>(j, "batch", w);
  o.lambda_reg = get_opt<double>(j, "lambda", w);
  if (auto s = get_opt<std::string>(j, "reg_stat", w)) o.reg_stat = reg_stat_from_string(*s);
  if (auto s = get_opt<std::string>(j, "reg_side", w)) o.reg_side = reg_side_from_string(*s);
  if (auto s = get_opt<std::string>(j, "init", w)) o.init_scheme = init_scheme_from_string(*s);
  o.init_sd = get_opt<double>(j, "init_sd", w);
  o.median_init = get_opt<bool>(j, "median_init", w);
  if (j.contains("constraints")) o.constraints = constraints_from_json(j.at("constraints"));
  return o;
}

Json to_json(const TrainOverrides& o) {
  Json j = Json::object();
  if (o.gamma_d) j["gamma_d"] = *o.gamma_d;
  if (o.gamma_g) j["gamma_g"] = *o.gamma_g;
  if (o.k_steps) j["k_steps"] = *o.k_steps;
  if (o.epochs) j["epochs"] = *o.epochs;
  if (o.avg_epochs) j["avg_epochs"] = *o.avg_epochs;
  if (o.batch) j["batch"] = *o.batch;
  if (o.lambda_reg) j["lambda"] = *o.lambda_reg;
  if (o.reg_stat) j["reg_stat"] = to_string(*o.reg_stat);
  if (o.reg_side) j["reg_side"] = to_string(*o.reg_side);
  if (o.init_scheme) j["init"] = to_string(*o.init_scheme);
  if (o.init_sd) j["init_sd"] = *o.init_sd;
  if (o.median_init) j["median_init"] = *o.median_init;
  if (o.constraints.any()) j["constraints"] = constraints_json(o.constraints);
  return j;
}

Json to_json(const TrainConfig& cfg) {
  Json j;
  j["divergence"] = to_string(cfg.objective.divergence);
  j["gamma_d"] = cfg.gamma_d;
  j["gamma_g"] = cfg.gamma_g;
  j["k_steps"] = cfg.k_steps;
  j["epochs"] = cfg.epochs;
  j["avg_epochs"] = cfg.avg_epochs;
  j["batch"] = cfg.batch;
  j["lambda"] = cfg.objective.lambda_reg;
  j["reg_stat"] = to_string(cfg.objective.reg_stat);
  j["reg_side"] = to_string(cfg.reg_side);
  j["init"] = to_string(cfg.init_scheme);
  j["init_sd"] = cfg.init_sd;
  j["median_init"] = cfg.median_init;
  j["constraints"] = constraints_json(cfg.constraints);
  j["seed"] = cfg.seed;
  return j;
}

EstimatorSpec estimator_from_json(const Json& j) {
  constexpr std::string_view w = "estimator";
  check_keys(j, {"method", "label", "hidden", "activation", "generator", "radial", "radial_noise", "train"}, w);
  EstimatorSpec e;
  e.method = method_from_string(get<std::string>(j, "method", w));
  e.label = get_opt<std::string>(j, "label", w).value_or(std::string(to_string(e.method)));
  e.hidden = get_opt<std::vector<std::size_t>>(j, "hidden", w);
  if (auto s = get_opt<std::string>(j, "activation", w)) e.hidden_act = activation_from_string(*s);
  if (auto s = get_opt<std::string>(j, "generator", w)) e.generator = generator_kind_from_string(*s);
  if (auto r = get_opt<std::vector<std::size_t>>(j, "radial", w)) e.radial_dims = *r;
  if (auto s = get_opt<std::string>(j, "radial_noise", w)) {
    if (*s == "gaussian") {
      e.radial_noise = RadialNoise::Gaussian;
    } else if (*s == "uniform") {
      e.radial_noise = RadialNoise::Uniform;
    } else {
      schema_error("estimator.radial_noise", "expected 'gaussian' or 'uniform'");
    }
  }
  if (j.contains("train")) e.overrides = train_overrides_from_json(j.at("train"));
  return e;
}

Json to_json(const EstimatorSpec& e) {
  Json j;
  j["method"] = to_string(e.method);
  j["label"] = e.label;
  if (e.hidden) j["hidden"] = *e.hidden;
  j["activation"] = to_string(e.hidden_act);
  j["generator"] = to_string(e.generator);
  if (e.generator == GeneratorKind::Elliptical) {
    j["radial"] = e.radial_dims;
    j["radial_noise"] = e.radial_noise == RadialNoise::Gaussian ? "gaussian" : "uniform";
  }
  j["train"] = to_json(e.overrides);
  return j;
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  constexpr std::string_view w = "experiment";
  check_keys(j, {"name", "core", "theta", "axes", "estimators", "repetitions", "base_seed", "output_dir", "jobs"}, w);
  ExperimentConfig cfg;
  cfg.name = get_opt<std::string>(j, "name", w).value_or(cfg.name);
  if (auto s = get_opt<std::string>(j, "core", w)) cfg.core = core_family_from_string(*s);
  cfg.theta = get_opt<double>(j, "theta", w).value_or(0.0);
  if (j.contains("axes")) {
    const Json& a = j.at("axes");
    check_keys(a, {"eps", "p", "n", "q"}, "axes");
    if (auto v = get_opt<std::vector<double>>(a, "eps", "axes")) cfg.eps = *v;
    if (auto v = get_opt<std::vector<std::size_t>>(a, "p", "axes")) cfg.p = *v;
    if (auto v = get_opt<std::vector<std::size_t>>(a, "n", "axes")) cfg.n = *v;
    if (a.contains("q")) {
      cfg.q.clear();
      for (const Json& qj : a.at("q")) {
        const QFamily fam = q_family_from_string(family_of(qj, "axes.q"));
        if (qj.is_string()) {
          cfg.q.push_back({fam, 0.0});
          continue;
        }
        check_keys(qj, {"family", "t"}, "axes.q");
        const Json& t = qj.contains("t") ? qj.at("t") : Json(0.0);
        if (t.is_array()) {
          for (const Json& tv : t) cfg.q.push_back({fam, tv.get<double>()});
        } else {
          cfg.q.push_back({fam, t.get<double>()});
        }
      }
    }
  }
  if (!j.contains("estimators") || !j.at("estimators").is_array()) {
    schema_error(w, "'estimators' must be an array");
  }
  for (const Json& e : j.at("estimators")) {
    cfg.estimators.push_back(estimator_from_json(e));
  }
  cfg.repetitions = get_opt<std::size_t>(j, "repetitions", w).value_or(cfg.repetitions);
  cfg.base_seed = get_opt<std::uint64_t>(j, "base_seed", w).value_or(0);
  cfg.output_dir = get_opt<std::string>(j, "output_dir", w).value_or(cfg.output_dir);
  cfg.jobs = get_opt<std::size_t>(j, "jobs", w).value_or(1);
  cfg.validate();
  return cfg;
}

Json to_json(const ExperimentConfig& cfg) {
  Json j;
  j["name"] = cfg.name;
  j["core"] = to_string(cfg.core);
  j["theta"] = cfg.theta;
  Json q = Json::array();
  for (const QSpec& s : cfg.q) {
    q.push_back({{"family", to_string(s.family)}, {"t", s.t}});
  }
  j["axes"] = {{"eps", cfg.eps}, {"p", cfg.p}, {"n", cfg.n}, {"q", q}};
  Json est = Json::array();
  for (const EstimatorSpec& e : cfg.estimators) {
    est.push_back(to_json(e));
  }
  j["estimators"] = est;
  j["repetitions"] = cfg.repetitions;
  j["base_seed"] = cfg.base_seed;
  return j;
}

Json to_json(const Mlp& net) {
  Json layers = Json::array();
  for (const Layer& l : net.layers()) {
    layers.push_back({{"in", l.weight.cols()},
                      {"out", l.weight.rows()},
                      {"activation", to_string(l.act)},
                      {"has_bias", l.has_bias},
                      {"weight", l.weight.data()},
                      {"bias", l.bias}});
  }
  return {{"dims", net.layer_dims()}, {"layers", layers}};
}

Json to_json(const Generator& g) {
  return std::visit(
      [](const auto& gen) -> Json {
        using T = std::decay_t<decltype(gen)>;
        if constexpr (std::is_same_v<T, LocationGen>) {
          return {{"kind", "location"}, {"eta", gen.eta}};
        } else if constexpr (std::is_same_v<T, AffineGen>) {
          return {{"kind", "affine"}, {"eta", gen.eta}, {"scale", matrix_json(gen.scale)}};
        } else {
          Json j = {{"kind", "elliptical"}, {"eta", gen.eta}, {"radial", to_json(gen.radial)}};
          if (gen.scale) j["scale"] = matrix_json(*gen.scale);
          return j;
        }
      },
      g);
}

Json to_json(const Estimate& est) {
  Json j;
  j["theta_hat"] = est.theta_hat;
  if (est.sigma_hat) {
    j["sigma_hat"] = matrix_json(*est.sigma_hat);
  }
  j["final_objective"] = est.final_objective;
  j["clamp_count"] = est.clamp_count;
  j["epochs"] = est.trace.size();
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("'" + path + "': " + e.what());
  }
}

std::string build_fingerprint() { return std::string("robgan ") + ROBGAN_VERSION + " " + ROBGAN_COMPILER; }

} // namespace robgan
