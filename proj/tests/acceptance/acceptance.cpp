// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit 1 if
// any fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "robgan/baselines.hpp"
#include "robgan/contamination.hpp"
#include "robgan/experiment.hpp"
#include "robgan/generator.hpp"
#include "robgan/landscape.hpp"
#include "robgan/linalg.hpp"
#include "robgan/objectives.hpp"
#include "robgan/sampling.hpp"
#include "robgan/tables.hpp"

using namespace robgan;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 2018;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

EstimatorSpec estimator(std::string label, Method m, std::optional<std::vector<std::size_t>> hidden = std::nullopt) {
  EstimatorSpec e;
  e.label = std::move(label);
  e.method = m;
  e.hidden = std::move(hidden);
  return e;
}

// Runs `est` on the datasets of one axis point, seeds 0..reps-1.
std::vector<RunOutcome> run_point(const ExperimentConfig& cfg, const EstimatorSpec& est, double eps, std::size_t p,
                                  std::size_t n, const QSpec& q, std::size_t reps) {
  std::vector<RunOutcome> out;
  for (std::size_t r = 0; r < reps; ++r) {
    const DatasetSpec spec = cell_dataset(cfg, eps, p, n, q, r);
    out.push_back(run_estimator(est, sample_contaminated(spec), run_seed(spec.seed, est.label)));
  }
  return out;
}

double mean_error(const std::vector<RunOutcome>& runs) {
  double s = 0.0;
  for (const auto& r : runs) s += r.l2_error;
  return s / static_cast<double>(runs.size());
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n, mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// ---- 1: gradients ---------------------------------------------------------

struct ErrTracker {
  double worst = 0.0;
  std::size_t coords = 0;
  void add(double analytic, double numeric) {
    ++coords;
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    worst = std::max(worst, scale < 1e-8 ? std::abs(analytic - numeric) / 1e-8 * 1e-5 : std::abs(analytic - numeric) / scale);
  }
};

double central(const std::function<double()>& f, double& x) {
  const double h = 1e-4 * std::max(1.0, std::abs(x)), saved = x;
  x = saved + h;
  const double up = f();
  x = saved - h;
  const double down = f();
  x = saved;
  return (up - down) / (2 * h);
}

bool near_kink(const Mlp& net, const Matrix& x) {
  const ForwardTrace tr = forward_trace(net, x);
  for (std::size_t k = 0; k < net.depth(); ++k) {
    const Activation a = net.layers()[k].act;
    for (double v : tr.pre[k].data()) {
      if ((a == Activation::Relu || a == Activation::Abs) && std::abs(v) < 2e-3) return true;
      if (a == Activation::Ramp && (std::abs(v + 0.5) < 2e-3 || std::abs(v - 0.5) < 2e-3)) return true;
    }
  }
  return false;
}

Verdict gradients() {
  const Activation acts[] = {Activation::Sigmoid, Activation::Relu, Activation::Ramp, Activation::Identity, Activation::Abs};
  Rng rng(kSeed);
  ErrTracker t;
  std::size_t nets = 0;
  std::set<int> seen_acts;
  while (nets < 100) {
    const std::size_t p = 1 + rng.below(5), depth = 1 + rng.below(4);
    MlpSpec spec;
    spec.dims.push_back(p);
    for (std::size_t k = 0; k + 1 < depth; ++k) {
      spec.dims.push_back(1 + rng.below(5));
      spec.acts.push_back(acts[(nets + k) % 5]);
    }
    spec.dims.push_back(1);
    spec.acts.push_back(acts[nets % 5]);
    Mlp net = init_mlp(spec, InitScheme::GaussianSmall, rng, 0.8);
    Matrix x(5, p);
    for (double& v : x.data()) v = rng.normal();
    if (near_kink(net, x)) continue;
    for (Activation a : spec.acts) seen_acts.insert(static_cast<int>(a));
    Vector up(5);
    for (double& u : up) u = rng.normal();
    const MlpGradient g = grad_params(net, x, up);
    auto f = [&] { return dot(net.forward_batch(x), up); };
    for (std::size_t k = 0; k < net.depth(); ++k) {
      Layer& layer = net.layers()[k];
      for (std::size_t i = 0; i < layer.weight.size(); ++i) t.add(g.weight[k].data()[i], central(f, layer.weight.data()[i]));
      for (std::size_t i = 0; i < layer.bias.size(); ++i) t.add(g.bias[k][i], central(f, layer.bias[i]));
    }
    ++nets;
  }

  // Generator variants against a sigmoid discriminator, both divergences.
  std::size_t gens = 0;
  for (int v = 0; v < 8; ++v) {
    const std::size_t p = 3;
    const std::vector<std::size_t> hidden{4};
    const Mlp d = init_mlp(discriminator_spec(p, hidden, Activation::Sigmoid), InitScheme::GaussianSmall, rng, 0.8);
    Matrix a(p, p);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < i; ++j) a(i, j) = 0.3 * rng.normal();
      a(i, i) = 1.0 + 0.2 * rng.uniform();
    }
    Generator g;
    if (v % 4 == 0) g = LocationGen{Vector{0.2, -0.1, 0.4}};
    if (v % 4 == 1) g = AffineGen{Vector{0.2, -0.1, 0.4}, a};
    if (v % 4 >= 2) {
      const std::vector<std::size_t> dims{3, 4, 1};
      EllipticalGen e{Vector{0.2, -0.1, 0.4}, std::nullopt, make_radial_net(dims, InitScheme::Xavier, rng)};
      if (v % 4 == 3) e.scale = a;
      g = e;
    }
    const GenSample s = gen_sample(g, rng, 9);
    ObjectiveKind kind;
    kind.divergence = v < 4 ? Divergence::JS : Divergence::TV;
    const GenGradient gr = gen_grad(g, d, s.noise, kind);
    auto f = [&] { return generator_loss(g, d, s.noise, kind.divergence); };
    for (std::size_t i = 0; i < p; ++i) t.add(gr.eta[i], central(f, location(g)[i]));
    Matrix* sc = nullptr;
    if (auto* af = std::get_if<AffineGen>(&g)) sc = &af->scale;
    if (auto* el = std::get_if<EllipticalGen>(&g); el && el->scale) sc = &*el->scale;
    if (sc)
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j <= i; ++j) t.add((*gr.scale)(i, j), central(f, (*sc)(i, j)));
    if (auto* el = std::get_if<EllipticalGen>(&g))
      for (std::size_t k = 0; k < el->radial.depth(); ++k) {
        Layer& layer = el->radial.layers()[k];
        for (std::size_t i = 0; i < layer.weight.size(); ++i)
          t.add(gr.radial->weight[k].data()[i], central(f, layer.weight.data()[i]));
        for (std::size_t i = 0; i < layer.bias.size(); ++i) t.add(gr.radial->bias[k][i], central(f, layer.bias[i]));
      }
    ++gens;
  }
  return {t.worst < 1e-5 && seen_acts.size() == 5,
          fmt("%zu nets + %zu generators, %zu coordinates, worst relative error %.2e (< 1e-5)", nets, gens, t.coords,
              t.worst)};
}

// ---- 2: moment matching ---------------------------------------------------

Verdict moment_matching() {
  Rng rng(kSeed);
  const std::size_t p = 3;
  Matrix data(5000, p);
  for (std::size_t i = 0; i < data.rows(); ++i)
    for (std::size_t j = 0; j < p; ++j) data(i, j) = rng.normal() + (i % 5 == 0 ? 4.0 : 0.0);
  const Vector m = sample_mean(data);
  Matrix fake(100000, p);
  for (std::size_t i = 0; i < fake.rows(); ++i)
    for (std::size_t j = 0; j < p; ++j) fake(i, j) = m[j] + rng.normal();
  const double matched = restricted_js(data, fake, linear_features()).value;

  Matrix d1(5000, 1), f1(100000, 1);
  for (std::size_t i = 0; i < d1.rows(); ++i) d1(i, 0) = rng.normal() + (i % 5 == 0 ? 4.0 : 0.0);
  const double m1 = sample_mean(d1)[0];
  for (double& v : f1.data()) v = m1 + 0.5 + rng.normal();
  const double shifted = restricted_js(d1, f1, linear_features()).value;
  return {matched <= 2e-3 && shifted > 0.01,
          fmt("matched mean %.2e (<= 2e-3), mean + 0.5 %.4f (> 0.01)", matched, shifted)};
}

// ---- 3: Tukey bridge ------------------------------------------------------

Verdict tukey_bridge() {
  Rng rng(kSeed);
  std::size_t exact = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + 2 * rng.below(101);
    std::vector<double> x(n);
    for (double& v : x) v = t % 3 == 0 ? cauchy_from_uniform(rng.uniform(), 1.0) : 3.0 * rng.normal();
    exact += tv_learning_1d(x, default_depth_grid(x)) == oracle::sorted_median(x);
  }
  return {exact == 1000, fmt("%zu / 1000 odd-n datasets equal the sort median exactly", exact)};
}

// ---- 4: p=10, n=1000 slice -------------------------------------------------

Verdict table_slice() {
  ExperimentConfig cfg;
  cfg.base_seed = kSeed;
  const auto runs = run_point(cfg, estimator("jsgan", Method::JSGAN, std::vector<std::size_t>{5}), 0.1, 10, 1000,
                              QSpec{QFamily::GaussShift, 0.5}, 10);
  std::vector<double> errs;
  std::size_t clamps = 0;
  for (const auto& r : runs) errs.push_back(r.l2_error), clamps += r.estimate.clamp_count;
  const auto [m, sd] = mean_sd(errs);
  return {m >= 0.05 && m <= 0.35 && clamps == 0,
          fmt("JS 10-5-1 mean error %.4f (sd %.4f) in [0.05, 0.35]; published 0.1587 (0.0438); clamps %zu", m, sd,
              clamps)};
}

// ---- 5: hidden layer vs logistic discriminator in 1-D ----------------------

Verdict one_dimensional() {
  ExperimentConfig cfg;
  cfg.base_seed = kSeed;
  cfg.theta = 1.0;
  const auto logistic = estimator("js_logistic", Method::JSGAN, std::vector<std::size_t>{});
  const auto hidden = estimator("js_hidden5", Method::JSGAN, std::vector<std::size_t>{5});
  bool ok = true;
  std::string detail;
  for (double t : {2.0, 5.0}) {
    const double grand = 0.8 + 0.2 * t;
    double worst = 0.0;
    for (const auto& r : run_point(cfg, logistic, 0.2, 1, 10000, QSpec{QFamily::GaussShift, t}, 3))
      worst = std::max(worst, std::abs(r.estimate.theta_hat[0] - grand));
    ok = ok && worst <= 0.15;
    detail += fmt("t=%g logistic max |est - %.2f| = %.4f (<= 0.15); ", t, grand, worst);
  }
  double worst = 0.0;
  for (const auto& r : run_point(cfg, hidden, 0.2, 1, 10000, QSpec{QFamily::GaussShift, 5.0}, 3))
    worst = std::max(worst, std::abs(r.estimate.theta_hat[0] - 1.0));
  ok = ok && worst <= 0.3;
  detail += fmt("t=5 hidden max |est - 1| = %.4f (<= 0.3); 3 seeds each", worst);
  return {ok, detail};
}

// ---- 6: TV landscape ------------------------------------------------------

struct Row {
  double eta, pos, neg, argmax;
};

std::vector<Row> landscape_rows(const std::string& mix, std::vector<double> etas) {
  const Vector data = sample_mixture_1d(parse_mixture(mix), 10000, kSeed);
  const Vector w = parse_range("-10:10:0.2");
  const Matrix grid = landscape_grid(data, etas, w, 10000, kSeed + 1);
  const auto arg = argmax_per_row(grid);
  std::vector<Row> rows;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    Row r{etas[i], 0.0, 0.0, w[arg[i]]};
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (w[j] > 0) r.pos = std::max(r.pos, grid(i, j));
      if (w[j] < 0) r.neg = std::max(r.neg, grid(i, j));
    }
    rows.push_back(r);
  }
  return rows;
}

// A sign change of the argmax counts as a jump between competing optima only
// when both one-sided maxima are at least `floor` on each side of it.
std::vector<double> substantial_flips(const std::vector<Row>& rows, double floor, std::vector<double>* raw) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if ((rows[i].argmax > 0) == (rows[i + 1].argmax > 0)) continue;
    const double mid = 0.5 * (rows[i].eta + rows[i + 1].eta);
    if (raw) raw->push_back(mid);
    if (std::min(rows[i].pos, rows[i].neg) >= floor && std::min(rows[i + 1].pos, rows[i + 1].neg) >= floor) out.push_back(mid);
  }
  return out;
}

Verdict landscape() {
  const auto far = landscape_rows("0.8:N(1,1),0.2:N(10,1)", {1.0, 1.5, 2.0, 5.0});
  const bool signs = far[0].argmax > 0 && far[3].argmax < 0;
  const auto far_flips = substantial_flips(far, 0.05, nullptr);

  std::vector<double> etas;
  for (int i = 0; i <= 12; ++i) etas.push_back(0.8 + 0.1 * i);
  const auto near = landscape_rows("0.8:N(1,1),0.2:N(1.5,1)", etas);
  std::vector<double> raw;
  const auto near_flips = substantial_flips(near, 0.05, &raw);
  std::string raw_s;
  for (double r : raw) raw_s += fmt("%.2f ", r);
  return {signs && near_flips.empty(),
          fmt("N(10) mix: argmax w %+.1f at eta=1, %+.1f at eta=5, jump between optima near eta=%s; N(1.5) mix: "
              "%zu jumps on [0.8, 2] (raw sign change at eta=%sthrough a zero landscape)",
              far[0].argmax, far[3].argmax, far_flips.empty() ? "none" : fmt("%.2f", far_flips[0]).c_str(),
              near_flips.size(), raw_s.empty() ? "none " : raw_s.c_str())};
}

// ---- 7: error trend in eps and p ------------------------------------------

Verdict trend() {
  const std::vector<QSpec> qs{{QFamily::GaussShift, 0.5},
                              {QFamily::GaussShift, 5.0},
                              {QFamily::GaussCov, 0.5},
                              {QFamily::CauchyIndep, 0.5}};
  auto worst_cases = [&](std::vector<double> eps, std::vector<std::size_t> p, std::size_t n) {
    ExperimentConfig cfg;
    cfg.base_seed = kSeed;
    cfg.eps = std::move(eps);
    cfg.p = std::move(p);
    cfg.n = {n};
    cfg.q = qs;
    cfg.estimators = {estimator("jsgan", Method::JSGAN, std::vector<std::size_t>{5})};
    cfg.repetitions = 5;
    const ExperimentResult res = run_experiment(cfg);
    std::vector<double> worst;
    for (std::size_t s = 0; s < res.cells.size(); s += qs.size()) {
      double w = 0.0;
      for (std::size_t k = s; k < s + qs.size(); ++k) w = std::max(w, res.cells[k].mean_error);
      worst.push_back(w);
    }
    return worst;
  };
  const std::vector<double> eps{0.05, 0.1, 0.15, 0.2};
  const auto by_eps = worst_cases(eps, {25}, 5000);
  const auto by_p = worst_cases({0.1}, {10, 25, 50}, 1000);
  const double r = pearson(eps, by_eps);
  const bool mono = by_p[0] < by_p[1] && by_p[1] < by_p[2];
  return {r > 0.9 && mono, fmt("worst error by eps %.3f %.3f %.3f %.3f, Pearson %.4f (> 0.9); by p=10,25,50 %.3f "
                               "%.3f %.3f (increasing)",
                               by_eps[0], by_eps[1], by_eps[2], by_eps[3], r, by_p[0], by_p[1], by_p[2])};
}

// ---- 8: separable contamination breaks the logistic TV-GAN ------------------

Verdict separability() {
  ExperimentConfig cfg;
  cfg.base_seed = kSeed;
  const auto tv = estimator("tvgan", Method::TVGAN, std::vector<std::size_t>{});
  const auto js = estimator("jsgan", Method::JSGAN, std::vector<std::size_t>{5});
  double ratio[2];
  double e_tv[2], e_js[2];
  int i = 0;
  for (double t : {5.0, 0.2}) {
    const QSpec q{QFamily::GaussShift, t};
    e_tv[i] = mean_error(run_point(cfg, tv, 0.2, 25, 5000, q, 5));
    e_js[i] = mean_error(run_point(cfg, js, 0.2, 25, 5000, q, 5));
    ratio[i] = e_tv[i] / e_js[i];
    ++i;
  }
  const bool info = ratio[1] <= 2.0 && ratio[1] >= 0.5;
  return {ratio[0] >= 3.0,
          fmt("t=5: TV %.4f vs JS %.4f, ratio %.1f (>= 3); t=0.2 (reported only): TV %.4f vs JS %.4f, ratio %.2f, "
              "within factor 2: %s",
              e_tv[0], e_js[0], ratio[0], e_tv[1], e_js[1], ratio[1], info ? "yes" : "no")};
}

// ---- 9: elliptical ---------------------------------------------------------

Verdict elliptical() {
  ExperimentConfig cfg;
  cfg.base_seed = kSeed;
  cfg.core = CoreFamily::EllipticalCauchy;
  EstimatorSpec js = estimator("jsgan_elliptical", Method::JSGAN, std::vector<std::size_t>{10, 5});
  js.generator = GeneratorKind::Elliptical;
  const auto med = estimator("cwmedian", Method::CwMedian);
  const QSpec q{QFamily::EllipticalCauchy, 1.5};
  const double e_js = mean_error(run_point(cfg, js, 0.2, 10, 5000, q, 5));
  const double e_med = mean_error(run_point(cfg, med, 0.2, 10, 5000, q, 5));
  return {e_js <= 1.5 * e_med,
          fmt("JS 10-10-5-1 elliptical %.4f vs coordinatewise median %.4f (ratio %.2f <= 1.5)", e_js, e_med,
              e_js / e_med)};
}

// ---- 10: determinism ------------------------------------------------------

Verdict determinism() {
  ExperimentConfig cfg;
  cfg.name = "determinism";
  cfg.base_seed = kSeed;
  cfg.eps = {0.1, 0.2};
  cfg.p = {5};
  cfg.n = {500};
  cfg.q = {{QFamily::GaussShift, 1.0}, {QFamily::CauchyIndep, 0.5}};
  EstimatorSpec js = estimator("jsgan", Method::JSGAN, std::vector<std::size_t>{5});
  js.overrides.epochs = 20;
  EstimatorSpec tv = estimator("tvgan", Method::TVGAN, std::vector<std::size_t>{});
  tv.overrides.epochs = 20;
  cfg.estimators = {js, tv, estimator("cwmedian", Method::CwMedian)};
  cfg.repetitions = 3;
  const fs::path root = fs::temp_directory_path() / "robgan_acceptance";
  std::size_t same = 0, files = 0;
  std::vector<std::vector<fs::path>> outs;
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(root / std::to_string(run));
    outs.push_back(emit_tables(run_experiment(cfg), TableFormat::Csv, root / std::to_string(run)));
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  for (std::size_t i = 0; i < outs[0].size(); ++i) {
    if (outs[0][i].extension() != ".csv") continue;
    ++files;
    same += slurp(outs[0][i]) == slurp(outs[1][i]);
  }
  return {files > 0 && same == files, fmt("%zu / %zu CSV files byte-identical across two runs", same, files)};
}

// ---- 11: structured covariance --------------------------------------------

Verdict structured_sigma() {
  double min_eig = 1e300, worst_round = 0.0;
  bool symmetric = true;
  for (std::size_t p : {10, 50}) {
    for (std::uint64_t s = 0; s < 100; ++s) {
      const StructuredPrecision sp = make_structured_precision(p, kSeed + s);
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < i; ++j) symmetric = symmetric && sp.sigma(i, j) == sp.sigma(j, i);
      const std::vector<double> gb(sp.gamma_bar.data().begin(), sp.gamma_bar.data().end());
      const auto ev = oracle::jacobi_eigenvalues(gb, p);
      min_eig = std::min(min_eig, *std::min_element(ev.begin(), ev.end()));
      // sigma * gamma_bar should be the identity.
      const Matrix back = invert_spd(sp.sigma);
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) {
          double prod = 0.0;
          for (std::size_t k = 0; k < p; ++k) prod += sp.sigma(i, k) * sp.gamma_bar(k, j);
          worst_round = std::max(worst_round, std::abs(prod - (i == j ? 1.0 : 0.0)));
          worst_round = std::max(worst_round, std::abs(back(i, j) - sp.gamma_bar(i, j)));
        }
    }
  }
  return {symmetric && min_eig >= 0.0499 && worst_round < 1e-8,
          fmt("200 draws: symmetric %s, min eigenvalue %.6f (>= 0.0499), round-trip error %.2e (< 1e-8)",
              symmetric ? "yes" : "no", min_eig, worst_round)};
}

} // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Verdict (*)()>> criteria{
      {"gradients vs finite differences", gradients},
      {"linear-feature moment matching", moment_matching},
      {"1-D TV-learning equals the median", tukey_bridge},
      {"p=10 n=1000 eps=0.1 JS error", table_slice},
      {"1-D logistic vs hidden-layer JS", one_dimensional},
      {"TV landscape argmax", landscape},
      {"worst-case error trend in eps and p", trend},
      {"logistic TV-GAN on separable Q", separability},
      {"elliptical Cauchy robustness", elliptical},
      {"bench determinism", determinism},
      {"structured covariance recipe", structured_sigma},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d %s  %s: %s [%.1f s]\n", id, v.pass ? "PASS" : "FAIL", criteria[i].first, v.detail.c_str(),
                secs);
    std::fflush(stdout);
    failures += !v.pass;
  }
  return failures ? 1 : 0;
}
