#include "cli.hpp"

#include <CLI11.hpp>

#include "mlcd/graph.hpp"
#include "mlcd/harness.hpp"
#include "mlcd/methods.hpp"
#include "mlcd/metrics.hpp"
#include "mlcd/mlsbm.hpp"
#include "mlcd/theory.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace mlcd::cli {

namespace {

struct GenerateArgs {
  std::string scenario = "strong";
  int n = 300;
  int k = 3;
  int layers = 5;
  double degree = 10.0;
  std::uint64_t seed = 1;
  std::string out;
};

struct DetectArgs {
  std::string input;
  std::string method = "olmf";
  int k = 2;
  std::string mode = "algebraic";
  double gamma_multiplier = 4.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string truth;
};

struct SimulateArgs {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out = "-";
  int threads = 1;
  std::string svg;
  bool no_timing = false;
};

struct VerifyArgs {
  int n = 300;
  int k = 3;
  int layers = 8;
  double degree = 20.0;
  double snr = 3.0;
  int reps = 100;
  double eps = 0.05;
  std::uint64_t seed = 1;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

void generate(const GenerateArgs& a, std::ostream& out) {
  ScenarioShape shape{a.n, a.k, a.layers, a.degree};
  const Scenario s = parse_scenario(a.scenario);
  const double sweep = s == Scenario::layers ? static_cast<double>(a.layers) : a.degree;
  const BlockModel model = scenario_blocks(s, shape, sweep, derive_seed(a.seed, 0));
  const MultiLayerGraph g = sample(model, derive_seed(a.seed, 1));
  write_edge_list_file(g, a.out + ".edges");
  auto labels = open_out(a.out + ".labels");
  write_labels(model.membership(), labels);
  out << "wrote " << a.out << ".edges and " << a.out << ".labels (n=" << g.num_nodes() << ", layers="
      << g.num_layers() << ")\n";
}

void detect(const DetectArgs& a, std::ostream& out) {
  const MultiLayerGraph g = read_edge_list_file(a.input);
  MethodOptions opts;
  opts.mode = parse_mode(a.mode);
  opts.gamma_multiplier = a.gamma_multiplier;
  opts.seed = a.seed;
  const MethodResult res = run_method(parse_method(a.method), g.layers(), a.k, opts);
  auto f = open_out(a.out);
  write_labels(res.partition, f);
  out << "method=" << a.method << " k=" << a.k << " converged=" << (res.converged ? 1 : 0) << '\n';
  if (!a.truth.empty()) {
    std::ifstream t(a.truth);
    if (!t) throw std::runtime_error("cannot open " + a.truth);
    const Partition truth = read_labels(t);
    out << "nmi=" << nmi(truth, res.partition) << " miscluster=" << misclustering_rate(truth, res.partition)
        << '\n';
  }
}

void simulate(const SimulateArgs& a, std::ostream& out) {
  ScenarioConfig cfg = load_config(a.config);
  if (a.seed_given) cfg.seed = a.seed;
  if (a.no_timing) cfg.record_runtime = false;
  const ScenarioResult res = run_scenario(cfg, a.threads);
  if (a.out == "-") {
    write_csv(out, res);
  } else {
    auto f = open_out(a.out);
    write_csv(f, res);
  }
  if (!a.svg.empty()) {
    auto f = open_out(a.svg);
    write_svg(f, res, cfg.scenario);
  }
}

void verify(const VerifyArgs& a, std::ostream& out) {
  if (a.n % a.k != 0) throw std::invalid_argument("verify: n must be a multiple of k");
  if (!(a.snr > 0.0) || a.snr == 1.0) throw std::invalid_argument("verify: snr must be positive and not 1");
  // p = snr * q; average degree (n/k) p + (n - n/k) q.
  const int s = a.n / a.k;
  const double q = a.degree / (s * a.snr + (a.n - s));
  FourParamSpec spec{std::vector<double>(a.layers, a.snr * q), std::vector<double>(a.layers, q), a.k, s};
  const BlockModel model = four_param_model(spec);
  const TheoryQuantities tq = theory_quantities(model);
  const DeviationReport mean_dev = mean_deviation_check(model, a.reps, a.eps, a.seed);
  const DeviationReport sq_dev = squared_deviation_check(model, a.reps, derive_seed(a.seed, 1));
  const MisclusteringBounds b = misclustering_bounds(tq, a.n, a.layers, a.k, a.eps);

  out << std::setprecision(6);
  out << "model: n=" << a.n << " k=" << a.k << " layers=" << a.layers << " p=" << spec.p[0] << " q=" << q << '\n';
  out << "max_degree_mean=" << tq.mean_max_degree << " max_degree_sq_mean=" << tq.mean_sq_max_degree
      << " n_max=" << tq.n_max << '\n';
  out << "layer_eigengap=" << tq.layer_eigengap.front().value << " mean_eigengap=" << tq.mean_eigengap.value
      << (tq.mean_eigengap.zero ? " (zero)" : "") << '\n';
  if (tq.f_ab) out << "f_ab=" << *tq.f_ab << " g_ab=" << *tq.g_ab << '\n';
  auto worst = [](const DeviationReport& r) { return *std::max_element(r.norms.begin(), r.norms.end()); };
  out << "mean_deviation: bound=" << mean_dev.bound << " max_norm=" << worst(mean_dev)
      << " coverage=" << mean_dev.coverage << " precondition=" << (mean_dev.precondition_met ? 1 : 0) << '\n';
  out << "squared_deviation: bound=" << sq_dev.bound << " max_norm=" << worst(sq_dev)
      << " coverage=" << sq_dev.coverage << " precondition=" << (sq_dev.precondition_met ? 1 : 0) << '\n';
  out << "miscluster_bound: coreg=" << b.coreg << " olmf=" << b.olmf << " mean_adj=" << b.mean_adj << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Consensus community detection for multi-layer networks", "mlcd"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Sample a multi-layer SBM; write edge list and ground-truth labels");
  g->add_option("--scenario", gen.scenario, "strong|mixed|complementary|layers|hetero");
  g->add_option("--n", gen.n, "Number of nodes");
  g->add_option("--k", gen.k, "Number of communities");
  g->add_option("--layers", gen.layers, "Number of layers");
  g->add_option("--degree", gen.degree, "Target average degree");
  g->add_option("--seed", gen.seed, "Random seed");
  g->add_option("--out", gen.out, "Output prefix (<out>.edges, <out>.labels)")->required();

  DetectArgs det;
  auto* d = app.add_subcommand("detect", "Detect consensus communities in an edge-list file");
  d->add_option("--input", det.input, "Edge-list file")->required()->check(CLI::ExistingFile);
  d->add_option("--method", det.method, "olmf|coreg|mean_adj|spectral_kernel|module_allegiance");
  d->add_option("--k", det.k, "Number of communities")->required();
  d->add_option("--mode", det.mode, "algebraic|absolute");
  d->add_option("--gamma-multiplier", det.gamma_multiplier, "Coreg weight multiplier");
  d->add_option("--seed", det.seed, "Random seed");
  d->add_option("--out", det.out, "Labels output file")->required();
  d->add_option("--truth", det.truth, "Ground-truth labels; prints NMI and misclustering");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Run a scenario config and write CSV");
  s->add_option("--config", sim.config, "Scenario JSON config")->required()->check(CLI::ExistingFile);
  auto* seed_opt = s->add_option("--seed", sim.seed, "Override the config seed");
  s->add_option("--out", sim.out, "CSV output path, '-' for stdout");
  s->add_option("--threads", sim.threads, "Worker threads (0 = hardware concurrency)");
  s->add_option("--svg", sim.svg, "Optional SVG chart of mean NMI");
  s->add_flag("--no-timing", sim.no_timing, "Write runtime_ms as 0");

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Check concentration bounds on a four-parameter model");
  v->add_option("--n", ver.n, "Number of nodes (multiple of k)");
  v->add_option("--k", ver.k, "Number of communities");
  v->add_option("--layers", ver.layers, "Number of layers");
  v->add_option("--degree", ver.degree, "Expected average degree");
  v->add_option("--snr", ver.snr, "Within/between probability ratio");
  v->add_option("--reps", ver.reps, "Monte-Carlo replications");
  v->add_option("--eps", ver.eps, "Failure probability");
  v->add_option("--seed", ver.seed, "Random seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  sim.seed_given = seed_opt->count() > 0;

  try {
    if (g->parsed()) generate(gen, out);
    else if (d->parsed()) detect(det, out);
    else if (s->parsed()) simulate(sim, out);
    else if (v->parsed()) verify(ver, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace mlcd::cli
