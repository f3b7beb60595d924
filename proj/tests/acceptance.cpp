// Acceptance gate: one PASS/FAIL line per criterion.
//   acceptance                 run all twelve
//   acceptance --criterion N   run one
// Exit status is non-zero when any selected criterion fails.

#include "oracles.hpp"

#include "mlcd/harness.hpp"
#include "mlcd/methods.hpp"
#include "mlcd/metrics.hpp"
#include "mlcd/mlsbm.hpp"
#include "mlcd/spectral.hpp"
#include "mlcd/theory.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace mlcd;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0: no runtime limit
  std::function<Verdict()> run;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// Three informative layers' worth of full-rank blocks: off-diagonal band
// [0.050, 0.055], per-community diagonal ratio U(2, 3).
BlockModel informative_model(int n, int k, int num_layers, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 2));
  std::vector<Matrix> blocks;
  for (int m = 0; m < num_layers; ++m) {
    std::vector<double> rho(static_cast<std::size_t>(k));
    for (auto& r : rho) r = rng.uniform(kStrongSnrLo, kStrongSnrHi);
    blocks.push_back(random_blocks(k, kBandLo, kBandHi, rho, rng));
  }
  return BlockModel(multinomial_assignments(n, k, derive_seed(seed, 1)), std::move(blocks));
}

bool blocks_positive_definite(const BlockModel& model) {
  for (const auto& b : model.blocks())
    if (eigenvalues(b).minCoeff() <= 0.0) return false;
  return true;
}

Verdict noiseless_recovery() {
  int ok[4] = {0, 0, 0, 0};
  bool full_rank = true;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const BlockModel model = informative_model(120, 3, 4, seed);
    full_rank = full_rank && blocks_positive_definite(model);
    const auto pop = population_tensor(model);
    const auto& z = model.membership();
    OlmfOptions oo;
    oo.seed = seed;
    ok[0] += misclustering_rate(z, olmf_fit(pop.layers, 3, oo).partition) == 0.0;
    CoregOptions co;
    co.seed = seed;
    ok[1] += misclustering_rate(z, coreg_fit(pop.layers, 3, default_gammas(pop.layers, 4.0), co).partition) == 0.0;
    ok[2] += misclustering_rate(z, mean_adjacency_sc(pop.layers, 3, EigenOrder::algebraic, seed).partition) == 0.0;
    ok[3] += misclustering_rate(z, spectral_kernel_sc(pop.layers, 3, EigenOrder::algebraic, seed).partition) == 0.0;
  }
  const bool pass = full_rank && ok[0] == 20 && ok[1] == 20 && ok[2] == 20 && ok[3] == 20;
  return {pass, format("exact recovery on 20 seeds: olmf %d/20, coreg %d/20, mean_adj %d/20, spectral_kernel %d/20",
                       ok[0], ok[1], ok[2], ok[3])};
}

Verdict olmf_equivalence() {
  Rng rng(2);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    std::vector<Matrix> layers;
    for (int m = 0; m < 3; ++m) layers.push_back(oracle::random_adjacency(30, 0.3, rng));
    const Matrix p = oracle::random_orthonormal(30, 3, rng);
    double energy = 0.0;
    for (const auto& a : layers) energy += a.squaredNorm();
    const double residual = olmf_loss(layers, p, olmf_lambdas(layers, p)) + olmf_objective(layers, p) - energy;
    worst = std::max(worst, std::abs(residual) / energy);
  }
  return {worst <= 1e-8, format("max relative residual %.3e over 50 pairs (tol 1e-8)", worst)};
}

Verdict sin_theta_identity() {
  Rng rng(3);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Matrix u = oracle::random_orthonormal(40, 4, rng);
    const Matrix v = oracle::random_orthonormal(40, 4, rng);
    const double lhs = coreg_penalty(u, v);
    const double d = subspace_distance(u, v);
    worst = std::max(worst, std::abs(lhs - (4.0 - d * d)));
  }
  return {worst <= 1e-10, format("max |trace - (k - sin^2)| %.3e over 100 pairs (tol 1e-10)", worst)};
}

Verdict gradient_check() {
  Rng rng(4);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    std::vector<Matrix> layers{oracle::random_symmetric(8, rng), oracle::random_symmetric(8, rng)};
    const Matrix p = oracle::random_orthonormal(8, 2, rng);
    std::vector<Matrix> lambdas{oracle::random_symmetric(2, rng), oracle::random_symmetric(2, rng)};
    auto loss = [&](const Matrix& pp, const std::vector<Matrix>& ll) {
      double s = 0.0;
      for (std::size_t m = 0; m < 2; ++m) s += (layers[m] - pp * ll[m] * pp.transpose()).squaredNorm();
      return s;
    };
    const auto g = olmf_gradient(layers, p, lambdas);
    const Matrix horizontal = Matrix::Identity(8, 8) - p * p.transpose();
    double err = 0.0, scale = 0.0;
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 2; ++j) {
        Matrix e = Matrix::Zero(8, 2);
        e(i, j) = 1.0;
        const double fd =
            oracle::central_difference([&](const Matrix& x) { return loss(x, lambdas); }, p, horizontal * e, 1e-5);
        err += (fd - g.p(i, j)) * (fd - g.p(i, j));
        scale += g.p(i, j) * g.p(i, j);
      }
    for (std::size_t m = 0; m < 2; ++m)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          Matrix e = Matrix::Zero(2, 2);
          e(a, b) = 1.0;
          auto f = [&](const Matrix& x) {
            auto l = lambdas;
            l[m] = x;
            return loss(p, l);
          };
          const double fd = oracle::central_difference(f, lambdas[m], e, 1e-5);
          err += (fd - g.lambdas[m](a, b)) * (fd - g.lambdas[m](a, b));
          scale += g.lambdas[m](a, b) * g.lambdas[m](a, b);
        }
    worst = std::max(worst, std::sqrt(err / scale));
  }
  return {worst <= 1e-5, format("max relative error %.3e over 20 instances (tol 1e-5)", worst)};
}

Verdict assignment_oracle() {
  Rng rng(5);
  int agree = 0;
  for (int t = 0; t < 500; ++t) {
    const int k = 1 + static_cast<int>(rng.below(5));
    const int n = 1 + static_cast<int>(rng.below(40));
    const auto a = oracle::random_partition(n, k, rng);
    const auto b = oracle::random_partition(n, 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k))), rng);
    agree += std::abs(misclustering_rate(a, b) - oracle::brute_force_misclustering(a, b)) <= 1e-12;
  }
  return {agree == 500, format("%d/500 pairs agree with exhaustive permutation search", agree)};
}

// Four-parameter model with p = 3q at the requested average degree.
BlockModel four_param_at_degree(int n, int k, int num_layers, double degree) {
  const int s = n / k;
  const double q = degree / (3.0 * s + (n - s));
  return four_param_model({std::vector<double>(static_cast<std::size_t>(num_layers), 3.0 * q),
                           std::vector<double>(static_cast<std::size_t>(num_layers), q), k, s});
}

Verdict mean_deviation_coverage() {
  const BlockModel model = four_param_at_degree(300, 3, 8, 20.0);
  const auto report = mean_deviation_check(model, 100, 0.05, 6);
  const int held = static_cast<int>(std::lround(report.coverage * 100));
  const double worst = *std::max_element(report.norms.begin(), report.norms.end());
  return {held >= 95 && report.precondition_met,
          format("bound held in %d/100 reps (need 95); bound %.4f, max norm %.4f, precondition %s", held, report.bound,
                 worst, report.precondition_met ? "met" : "violated")};
}

Verdict eigengaps() {
  Rng rng(7);
  double worst_layer = 0.0, worst_mean = 0.0;
  for (int t = 0; t < 20; ++t) {
    FourParamSpec spec;
    spec.k = 2 + static_cast<int>(rng.below(3));
    spec.s = 20 + static_cast<int>(rng.below(41));
    const int layers = 2 + static_cast<int>(rng.below(4));
    double mean_diff = 0.0;
    do {
      spec.p.clear();
      spec.q.clear();
      mean_diff = 0.0;
      for (int m = 0; m < layers; ++m) {
        const double q = rng.uniform(0.02, 0.1);
        const double diff = rng.uniform(0.02, 0.2) * (rng.bernoulli(0.7) ? 1.0 : -0.1);
        spec.q.push_back(q);
        spec.p.push_back(q + diff);
        mean_diff += diff / layers;
      }
    } while (std::abs(mean_diff) < 0.01);
    const auto q = theory_quantities(four_param_model(spec));
    for (int m = 0; m < layers; ++m) {
      const double want = spec.s * (spec.p[static_cast<std::size_t>(m)] - spec.q[static_cast<std::size_t>(m)]);
      worst_layer = std::max(worst_layer, std::abs(q.layer_eigengap[static_cast<std::size_t>(m)].value - want) / std::abs(want));
    }
    const double want = spec.s * mean_diff;
    worst_mean = std::max(worst_mean, std::abs(q.mean_eigengap.value - want) / std::abs(want));
  }
  const auto cancel = theory_quantities(four_param_model({{0.1, 0.05}, {0.05, 0.1}, 3, 100}));
  const bool pass = worst_layer <= 1e-8 && worst_mean <= 1e-8 && cancel.mean_eigengap.zero;
  return {pass, format("max rel error per-layer %.2e, mean %.2e (tol 1e-8); cancellation flagged zero: %s", worst_layer,
                       worst_mean, cancel.mean_eigengap.zero ? "yes" : "no")};
}

SweepSummary run_point(const std::string& scenario, double degree, EigenOrder mode, std::vector<Method> methods,
                       std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.scenario = scenario;
  cfg.n = 300;
  cfg.k = 3;
  cfg.num_layers = 5;
  cfg.sweep = {degree};
  cfg.replications = 20;
  cfg.seed = seed;
  cfg.mode = mode;
  cfg.methods = std::move(methods);
  cfg.record_runtime = false;
  return summarize(run_scenario(cfg, 0));
}

Verdict hetero_ordering() {
  const auto s = run_point("hetero", 32, EigenOrder::absolute,
                           {Method::olmf, Method::coreg, Method::mean_adj, Method::spectral_kernel}, 15);
  const double ma = s.mean_nmi.at(Method::mean_adj)[0];
  const double ol = s.mean_nmi.at(Method::olmf)[0];
  const double co = s.mean_nmi.at(Method::coreg)[0];
  const double sk = s.mean_nmi.at(Method::spectral_kernel)[0];
  const bool pass = ma < 0.2 && ol > 0.6 && co > 0.6 && sk > 0.6;
  return {pass, format("mean NMI mean_adj %.3f (< 0.2), olmf %.3f, coreg %.3f, spectral_kernel %.3f (each > 0.6)", ma,
                       ol, co, sk)};
}

Verdict sparse_ordering() {
  const auto s = run_point("strong", 8, EigenOrder::algebraic,
                           {std::begin(kAllMethods), std::end(kAllMethods)}, 11);
  auto at = [&](Method m) { return s.mean_nmi.at(m)[0]; };
  const double lo = std::min({at(Method::olmf), at(Method::coreg), at(Method::mean_adj)});
  const double hi = std::max(at(Method::spectral_kernel), at(Method::module_allegiance));
  return {lo > hi, format("min(olmf %.3f, coreg %.3f, mean_adj %.3f) = %.3f > max(spectral_kernel %.3f, "
                          "module_allegiance %.3f) = %.3f",
                          at(Method::olmf), at(Method::coreg), at(Method::mean_adj), lo, at(Method::spectral_kernel),
                          at(Method::module_allegiance), hi)};
}

Verdict robustness() {
  ScenarioConfig layers_cfg = load_config(MLCD_CONFIG_DIR "/robust_layers.json");
  layers_cfg.record_runtime = false;
  const auto by_layers = summarize(run_scenario(layers_cfg, 0));

  int exact = 0, exact_total = 0, sk_wrong = 0;
  std::string sk_points;
  for (std::size_t i = 0; i < by_layers.sweep.size(); ++i) {
    for (Method m : {Method::mean_adj, Method::olmf, Method::coreg}) {
      ++exact_total;
      exact += by_layers.mean_miscluster.at(m)[i] == 0.0;
    }
    const double sk = by_layers.mean_miscluster.at(Method::spectral_kernel)[i];
    sk_wrong += sk > 0.0;
    sk_points += format("%s%g:%.3f", i ? " " : "", by_layers.sweep[i], sk);
  }
  const int points = static_cast<int>(by_layers.sweep.size());

  ScenarioConfig density_cfg = load_config(MLCD_CONFIG_DIR "/robust_density.json");
  density_cfg.record_runtime = false;
  const auto by_density = run_scenario(density_cfg, 0);
  const std::size_t per_point = static_cast<std::size_t>(density_cfg.replications) * density_cfg.methods.size();
  bool unchanged = true;
  for (std::size_t i = per_point; i < by_density.rows.size(); ++i) {
    const auto& a = by_density.rows[i];
    const auto& b = by_density.rows[i % per_point];
    unchanged = unchanged && a.method == b.method && a.rep == b.rep && a.miscluster == b.miscluster && a.nmi == b.nmi;
  }
  const bool pass = exact == exact_total && sk_wrong == points && unchanged;
  return {pass, format("mean_adj/olmf/coreg exact at %d/%d method-points; spectral_kernel misclusters at %d/%d "
                       "points (mean rate by layer count %s); results unchanged across densities: %s",
                       exact, exact_total, sk_wrong, points, sk_points.c_str(), unchanged ? "yes" : "no")};
}

Verdict coreg_global_optimum() {
  double worst = 0.0;
  bool full_rank = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const BlockModel model = informative_model(120, 3, 4, seed + 100);
    full_rank = full_rank && blocks_positive_definite(model);
    const auto pop = population_tensor(model);
    const auto gammas = default_gammas(pop.layers, 4.0);
    const Matrix u = community_embedding(model.membership()).matrix();
    double analytic = 0.0;
    for (std::size_t m = 0; m < pop.layers.size(); ++m)
      analytic += (u.transpose() * pop.layers[m] * u).trace() + gammas[m] * 3.0;
    CoregOptions opts;
    opts.seed = seed;
    const auto fit = coreg_fit(pop.layers, 3, gammas, opts);
    worst = std::max(worst, std::abs(fit.state.objective - analytic) / analytic);
  }
  return {full_rank && worst <= 1e-9, format("max relative gap to analytic maximum %.3e over 10 seeds (tol 1e-9)", worst)};
}

Verdict determinism() {
  const auto cfg = parse_config(R"({
    "scenario": "mixed", "n": 150, "k": 3, "layers": 5,
    "sweep": {"axis": "avg_degree", "values": [6, 12]},
    "replications": 4, "seed": 12, "record_runtime": false
  })");
  const std::string one = to_csv(run_scenario(cfg, 1));
  const std::string four = to_csv(run_scenario(cfg, 4));
  return {one == four, format("CSV with 1 and 4 threads: %zu vs %zu bytes, %s", one.size(), four.size(),
                              one == four ? "identical" : "different")};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "noiseless recovery", 30, noiseless_recovery},
      {2, "factorization/trace equivalence", 5, olmf_equivalence},
      {3, "sin-theta trace identity", 5, sin_theta_identity},
      {4, "OLMF gradient vs finite differences", 10, gradient_check},
      {5, "assignment vs brute-force misclustering", 5, assignment_oracle},
      {6, "mean-deviation bound coverage", 120, mean_deviation_coverage},
      {7, "population eigengaps", 10, eigengaps},
      {8, "heterophilic ordering", 180, hetero_ordering},
      {9, "sparse strong-signal ordering", 0, sparse_ordering},
      {10, "robustness to uninformative layers", 60, robustness},
      {11, "coreg global optimum on population tensors", 0, coreg_global_optimum},
      {12, "thread-count determinism", 0, determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  if (only < 0 || only > 12) {
    std::fprintf(stderr, "criterion must be 1..12\n");
    return 2;
  }

  int failures = 0;
  for (const auto& c : criteria()) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v = c.run();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = format("%.1f s", secs);
    if (c.limit_s > 0) {
      timing += format(" / limit %.0f s", c.limit_s);
      if (secs > c.limit_s) {
        v.pass = false;
        v.detail += "; runtime limit exceeded";
      }
    }
    std::printf("criterion %2d %-46s %s  %s [%s]\n", c.id, c.name, v.pass ? "PASS" : "FAIL", v.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
