#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "cli.hpp"
#include "robgan/baselines.hpp"
#include "robgan/config_json.hpp"
#include "robgan/contamination.hpp"
#include "robgan/experiment.hpp"
#include "robgan/landscape.hpp"
#include "robgan/tables.hpp"
#include "robgan/trainer.hpp"

namespace {

using namespace robgan;

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  return out;
}

struct GenArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  std::optional<double> eps;
};

int cmd_gen(const GenArgs& a) {
  DatasetSpec spec = dataset_spec_from_json(read_json_file(a.config));
  if (a.seed) spec.seed = *a.seed;
  if (a.n) spec.n = *a.n;
  if (a.eps) spec.eps = *a.eps;
  spec.validate();
  const Dataset data = sample_contaminated(spec);
  if (a.out.empty() || a.out == "-") {
    write_dataset_csv(data, std::cout);
  } else {
    std::ofstream out = open_or_throw(a.out);
    write_dataset_csv(data, out);
  }
  std::fprintf(stderr, "%zu rows, %zu contaminated\n", data.x.rows(), data.contaminated_count());
  return 0;
}

struct TrainArgs {
  std::string data_csv;
  std::string dataset_config;
  std::string estimator_config;
  std::string method = "jsgan";
  std::vector<std::size_t> hidden;
  bool no_hidden = false;
  std::string activation = "sigmoid";
  std::string generator = "location";
  std::uint64_t seed = 0;
  std::optional<double> gamma_d, gamma_g, lambda;
  std::optional<std::size_t> k_steps, epochs, avg_epochs, batch;
  std::string out;
  std::string trace;
  std::string dump_nets;
};

int cmd_train(const TrainArgs& a) {
  Matrix x;
  std::optional<DatasetSpec> spec;
  if (!a.data_csv.empty()) {
    std::ifstream in(a.data_csv);
    if (!in) throw std::runtime_error("cannot open '" + a.data_csv + "'");
    x = read_data_csv(in);
  } else if (!a.dataset_config.empty()) {
    spec = dataset_spec_from_json(read_json_file(a.dataset_config));
    x = sample_contaminated(*spec).x;
  } else {
    throw CLI::RequiredError("--data or --dataset");
  }

  EstimatorSpec est;
  if (!a.estimator_config.empty()) {
    est = estimator_from_json(read_json_file(a.estimator_config));
  } else {
    est.method = method_from_string(a.method);
    est.hidden_act = activation_from_string(a.activation);
    est.generator = generator_kind_from_string(a.generator);
    if (a.no_hidden) {
      est.hidden = std::vector<std::size_t>{};
    } else if (!a.hidden.empty()) {
      est.hidden = a.hidden;
    }
  }
  TrainOverrides& o = est.overrides;
  if (a.gamma_d) o.gamma_d = a.gamma_d;
  if (a.gamma_g) o.gamma_g = a.gamma_g;
  if (a.lambda) o.lambda_reg = a.lambda;
  if (a.k_steps) o.k_steps = a.k_steps;
  if (a.epochs) o.epochs = a.epochs;
  if (a.avg_epochs) o.avg_epochs = a.avg_epochs;
  if (a.batch) o.batch = a.batch;

  Json out;
  out["estimator"] = to_json(est);
  Estimate estimate;
  if (est.method == Method::JSGAN || est.method == Method::TVGAN) {
    TrainConfig cfg = resolved_train_config(est, x.cols(), x.rows());
    cfg.seed = a.seed;
    out["config"] = to_json(cfg);
    // run_estimator hides the trained nets; train directly so they can be dumped.
    const Mlp d0 = init_discriminator(discriminator_spec(x.cols(), resolved_hidden(est, x.rows()), est.hidden_act), cfg);
    Generator g0 = LocationGen{Vector(x.cols(), 0.0)};
    if (est.generator == GeneratorKind::Affine) {
      g0 = AffineGen{Vector(x.cols(), 0.0), Matrix::identity(x.cols())};
    } else if (est.generator == GeneratorKind::Elliptical) {
      Rng rng = Rng(cfg.seed).split(21);
      g0 = EllipticalGen{Vector(x.cols(), 0.0), std::nullopt, make_radial_net(est.radial_dims, cfg.init_scheme, rng),
                         est.radial_noise};
    }
    TrainResult res = train(x, d0, g0, cfg);
    estimate = std::move(res.estimate);
    if (!a.dump_nets.empty()) {
      std::ofstream nets = open_or_throw(a.dump_nets);
      nets << Json{{"discriminator", to_json(res.discriminator)}, {"generator", to_json(res.generator)}}.dump(2)
           << '\n';
    }
  } else {
    Dataset d;
    d.x = x;
    d.spec.p = x.cols();
    d.spec.n = x.rows();
    d.spec.theta = Vector(x.cols(), 0.0);
    estimate = run_estimator(est, d, a.seed).estimate;
  }
  out["estimate"] = to_json(estimate);
  if (spec) {
    out["dataset"] = to_json(*spec);
    out["l2_error"] = metrics(estimate, spec->theta).l2_error;
  }
  out["build"] = build_fingerprint();
  if (a.out.empty() || a.out == "-") {
    std::cout << out.dump(2) << '\n';
  } else {
    open_or_throw(a.out) << out.dump(2) << '\n';
  }
  if (!a.trace.empty()) {
    std::ofstream tr = open_or_throw(a.trace);
    write_trace_csv(estimate, tr);
  }
  return 0;
}

struct BenchArgs {
  std::string config;
  std::string out_dir;
  std::string format = "markdown";
  std::optional<std::size_t> jobs;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
};

int cmd_bench(const BenchArgs& a) {
  ExperimentConfig cfg = experiment_config_from_json(read_json_file(a.config));
  if (!a.out_dir.empty()) cfg.output_dir = a.out_dir;
  if (a.jobs) cfg.jobs = *a.jobs;
  if (a.reps) cfg.repetitions = *a.reps;
  if (a.seed) cfg.base_seed = *a.seed;
  const ExperimentResult res = run_experiment(cfg);
  const TableFormat fmt = table_format_from_string(a.format);
  for (const auto& path : emit_tables(res, fmt, cfg.output_dir)) {
    std::fprintf(stderr, "wrote %s\n", path.string().c_str());
  }
  if (fmt == TableFormat::Markdown) {
    std::ifstream md(std::filesystem::path(cfg.output_dir) / (cfg.name + "_table.md"));
    std::cout << md.rdbuf();
  }
  std::size_t failed = 0;
  for (const CellRecord& c : res.cells) {
    failed += c.failed() ? 1 : 0;
  }
  if (failed > 0) {
    std::fprintf(stderr, "%zu cell(s) had failed runs; see the summary json\n", failed);
  }
  return 0;
}

struct LandscapeArgs {
  std::string mix;
  std::string eta = "0:6:0.1";
  std::string w = "-10:10:0.2";
  std::size_t n = 10000;
  std::size_t fake = 10000;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_landscape(const LandscapeArgs& a) {
  const auto mix = parse_mixture(a.mix);
  const Vector data = sample_mixture_1d(mix, a.n, a.seed);
  const Vector eta = parse_range(a.eta);
  const Vector w = parse_range(a.w);
  const Matrix grid = landscape_grid(data, eta, w, a.fake, hash_combine(a.seed, 1));
  if (a.out.empty() || a.out == "-") {
    write_landscape_csv(grid, eta, w, std::cout);
  } else {
    std::ofstream out = open_or_throw(a.out);
    write_landscape_csv(grid, eta, w, out);
  }
  const auto arg = argmax_per_row(grid);
  for (std::size_t i = 0; i < eta.size(); ++i) {
    std::fprintf(stderr, "eta=%g argmax_w=%g F=%.6f\n", eta[i], w[arg[i]], grid(i, arg[i]));
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust location estimation with GAN-type estimators"};
  app.require_subcommand(1);
  app.set_version_flag("--version", build_fingerprint());

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Sample a contaminated dataset to CSV");
  g->add_option("--config", gen.config, "Dataset JSON")->required()->check(CLI::ExistingFile);
  g->add_option("--out,-o", gen.out, "Output CSV (default stdout)");
  g->add_option("--seed", gen.seed, "Override the dataset seed");
  g->add_option("--n", gen.n, "Override the sample size");
  g->add_option("--eps", gen.eps, "Override the contamination proportion");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Fit one estimator; writes an estimate JSON and optional trace CSV");
  auto* src = t->add_option_group("source");
  src->add_option("--data", tr.data_csv, "Data CSV (a 'contaminated' column is ignored)")->check(CLI::ExistingFile);
  src->add_option("--dataset", tr.dataset_config, "Dataset JSON to sample")->check(CLI::ExistingFile);
  src->require_option(1);
  t->add_option("--estimator", tr.estimator_config, "Estimator JSON (method, hidden, train overrides)")
      ->check(CLI::ExistingFile);
  t->add_option("--method", tr.method, "jsgan, tvgan, cwmedian, mean or tvlearn1d");
  t->add_option("--hidden", tr.hidden, "Hidden layer widths");
  t->add_flag("--no-hidden", tr.no_hidden, "Discriminator without hidden layers");
  t->add_option("--activation", tr.activation, "Hidden activation");
  t->add_option("--generator", tr.generator, "location, affine or elliptical");
  t->add_option("--seed", tr.seed, "Training seed");
  t->add_option("--gamma-d", tr.gamma_d);
  t->add_option("--gamma-g", tr.gamma_g);
  t->add_option("--k", tr.k_steps, "Discriminator steps per iteration");
  t->add_option("--epochs", tr.epochs);
  t->add_option("--avg-epochs", tr.avg_epochs);
  t->add_option("--batch", tr.batch);
  t->add_option("--lambda", tr.lambda, "Feature-matching penalty");
  t->add_option("--out,-o", tr.out, "Estimate JSON (default stdout)");
  t->add_option("--trace", tr.trace, "Per-epoch trace CSV");
  t->add_option("--dump-nets", tr.dump_nets, "Trained network parameters as JSON");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Run an experiment grid and emit tables");
  b->add_option("--config", bench.config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  b->add_option("--out", bench.out_dir, "Output directory (overrides the config)");
  b->add_option("--format", bench.format, "csv or markdown")->check(CLI::IsMember({"csv", "markdown", "md"}));
  b->add_option("--jobs,-j", bench.jobs, "Worker threads");
  b->add_option("--reps", bench.reps, "Override repetitions");
  b->add_option("--seed", bench.seed, "Override the base seed");

  LandscapeArgs land;
  auto* l = app.add_subcommand("landscape", "TV objective over an (eta, w) grid with the bias maximized out");
  l->add_option("--mix", land.mix, "Mixture, e.g. \"0.8:N(1,1),0.2:N(10,1)\"")->required();
  l->add_option("--eta", land.eta, "start:stop:step");
  l->add_option("--w", land.w, "start:stop:step");
  l->add_option("--n", land.n, "Data sample size");
  l->add_option("--fake", land.fake, "Fake draws per cell");
  l->add_option("--seed", land.seed);
  l->add_option("--out,-o", land.out, "Output CSV (default stdout)");

  cli::SweepOptions sw;
  auto* s = app.add_subcommand("sweep", "Fixed sweeps over t, eps and p");
  s->add_option("--figure", sw.figure, "fig3, fig4 or fig5")->required()->check(CLI::IsMember({"fig3", "fig4", "fig5"}));
  s->add_option("--out", sw.out_dir, "Output directory");
  s->add_option("--reps", sw.reps, "Repetitions per point");
  s->add_option("--jobs,-j", sw.jobs, "Worker threads");
  s->add_option("--seed", sw.seed, "Base seed");

  unsigned long long check_seed = 7;
  auto* c = app.add_subcommand("selfcheck", "Gradient, moment-matching and median oracle suites");
  c->add_option("--seed", check_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);
    }
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*t) return cmd_train(tr);
    if (*b) return cmd_bench(bench);
    if (*l) return cmd_landscape(land);
    if (*s) return cli::run_sweep(sw);
    if (*c) return cli::run_selfcheck(check_seed) == 0 ? 0 : 1;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
