#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "cli.hpp"
#include "robgan/experiment.hpp"
#include "robgan/tables.hpp"

namespace robgan::cli {

namespace {

EstimatorSpec jsgan(std::string label, std::vector<std::size_t> hidden) {
  EstimatorSpec e;
  e.label = std::move(label);
  e.method = Method::JSGAN;
  e.hidden = std::move(hidden);
  return e;
}

// Estimates themselves (not errors) against t, with the grand mean for reference.
int fig3(const SweepOptions& opt) {
  ExperimentConfig cfg;
  cfg.theta = 1.0;
  cfg.base_seed = opt.seed;
  const std::vector<double> ts{0.5, 1, 1.5, 2, 3, 4, 5, 7, 10};
  const std::vector<EstimatorSpec> est{jsgan("js_logistic", {}), jsgan("js_hidden5", {5})};
  const std::size_t reps = opt.reps ? opt.reps : 3;
  std::filesystem::create_directories(opt.out_dir);
  const auto path = std::filesystem::path(opt.out_dir) / "fig3.csv";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "t,rep,estimator,theta_hat,grand_mean\n";
  for (double t : ts) {
    const QSpec q{QFamily::GaussShift, t};
    for (std::size_t r = 0; r < reps; ++r) {
      const DatasetSpec spec = cell_dataset(cfg, 0.2, 1, 10000, q, r);
      const Dataset data = sample_contaminated(spec);
      for (const EstimatorSpec& e : est) {
        const RunOutcome o = run_estimator(e, data, run_seed(spec.seed, e.label));
        char line[160];
        std::snprintf(line, sizeof line, "%g,%zu,%s,%.17g,%.17g\n", t, r, e.label.c_str(), o.estimate.theta_hat[0],
                      0.8 + 0.2 * t);
        out << line;
        std::fputs(line, stderr);
      }
    }
  }
  std::fprintf(stderr, "wrote %s\n", path.string().c_str());
  return 0;
}

// Error and output-layer l1 norm against t.
int fig4(const SweepOptions& opt) {
  ExperimentConfig cfg;
  cfg.name = "fig4";
  cfg.base_seed = opt.seed;
  cfg.eps = {0.2};
  cfg.p = {10};
  cfg.n = {5000};
  cfg.q.clear();
  for (double t : {0.2, 0.5, 1.0, 2.0, 5.0}) cfg.q.push_back({QFamily::GaussShift, t});
  cfg.estimators = {jsgan("js_hidden20", {20})};
  cfg.repetitions = opt.reps ? opt.reps : 3;
  cfg.jobs = opt.jobs;
  const ExperimentResult res = run_experiment(cfg);
  emit_tables(res, TableFormat::Csv, opt.out_dir);
  std::fprintf(stderr, "t,mean_error,mean_l1_w\n");
  for (const CellRecord& c : res.cells) {
    std::fprintf(stderr, "%g,%.4f,%.4f\n", c.key.q.t, c.mean_error, c.mean_l1_w.value_or(0.0));
  }
  return 0;
}

// Worst case over Q against eps, and against sqrt(p).
int fig5(const SweepOptions& opt) {
  const std::vector<QSpec> qs{{QFamily::GaussShift, 0.5},
                              {QFamily::GaussShift, 5.0},
                              {QFamily::GaussCov, 0.5},
                              {QFamily::CauchyIndep, 0.5}};
  auto panel = [&](const std::string& name, std::vector<double> eps, std::vector<std::size_t> p, std::size_t n) {
    ExperimentConfig cfg;
    cfg.name = name;
    cfg.base_seed = opt.seed;
    cfg.eps = std::move(eps);
    cfg.p = std::move(p);
    cfg.n = {n};
    cfg.q = qs;
    cfg.estimators = {jsgan("js_hidden5", {5})};
    cfg.repetitions = opt.reps ? opt.reps : 5;
    cfg.jobs = opt.jobs;
    const ExperimentResult res = run_experiment(cfg);
    emit_tables(res, TableFormat::Csv, opt.out_dir);
    const auto path = std::filesystem::path(opt.out_dir) / (name + "_worst.csv");
    std::ofstream out(path);
    out << "eps,p,n,worst_error,worst_q\n";
    for (std::size_t start = 0; start < res.cells.size(); start += qs.size()) {
      auto worst = std::max_element(res.cells.begin() + static_cast<std::ptrdiff_t>(start),
                                    res.cells.begin() + static_cast<std::ptrdiff_t>(start + qs.size()),
                                    [](const CellRecord& a, const CellRecord& b) { return a.mean_error < b.mean_error; });
      char line[160];
      std::snprintf(line, sizeof line, "%g,%zu,%zu,%.6f,%s(t=%g)\n", worst->key.eps, worst->key.p, worst->key.n,
                    worst->mean_error, std::string(to_string(worst->key.q.family)).c_str(), worst->key.q.t);
      out << line;
      std::fputs(line, stderr);
    }
  };
  panel("fig5_eps", {0.05, 0.1, 0.15, 0.2}, {25}, 5000);
  panel("fig5_p", {0.1}, {10, 25, 50}, 1000);
  return 0;
}

} // namespace

int run_sweep(const SweepOptions& opt) {
  if (opt.figure == "fig3") return fig3(opt);
  if (opt.figure == "fig4") return fig4(opt);
  if (opt.figure == "fig5") return fig5(opt);
  throw std::invalid_argument("unknown figure '" + opt.figure + "'");
}

} // namespace robgan::cli
