#include "mlcd/theory.hpp"

#include "mlcd/errors.hpp"
#include "mlcd/graph.hpp"
#include "mlcd/random.hpp"
#include "mlcd/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mlcd {

namespace {

// Detects equal community sizes and blocks of the form (p - q) I + q 1 1^T.
bool is_four_param(const BlockModel& model, std::vector<double>& p, std::vector<double>& q) {
  const int k = model.num_communities();
  if (k < 2) return false;
  const auto sizes = model.membership().community_sizes();
  if (std::adjacent_find(sizes.begin(), sizes.end(), std::not_equal_to<>()) != sizes.end()) return false;
  p.clear();
  q.clear();
  for (const Matrix& b : model.blocks()) {
    const double diag = b(0, 0);
    const double off = b(0, 1);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if (b(i, j) != (i == j ? diag : off)) return false;
    p.push_back(diag);
    q.push_back(off);
  }
  return true;
}

}  // namespace

Eigengap population_eigengap(const SymMatrix& population, int k) {
  if (k < 1 || k > population.rows()) throw std::invalid_argument("population_eigengap: need 1 <= k <= n");
  Vector ev = eigenvalues(population);
  std::vector<double> vals(ev.data(), ev.data() + ev.size());
  std::stable_sort(vals.begin(), vals.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
  Eigengap g;
  g.value = vals[static_cast<std::size_t>(k - 1)];
  g.zero = std::abs(g.value) <= kZeroEigenvalueFactor * static_cast<double>(population.rows());
  if (g.zero) g.value = 0.0;
  return g;
}

TheoryQuantities theory_quantities(const BlockModel& model) {
  TheoryQuantities q;
  q.n = model.num_nodes();
  q.k = model.num_communities();
  q.num_layers = model.num_layers();
  const auto sizes = model.membership().community_sizes();
  q.n_max = *std::max_element(sizes.begin(), sizes.end());

  const PopulationTensor pop = population_tensor(model);
  for (const Matrix& a : pop.layers) {
    q.max_degree.push_back(a.rowwise().sum().maxCoeff());
    q.layer_eigengap.push_back(population_eigengap(a, q.k));
  }
  const double m = q.num_layers;
  q.mean_max_degree = std::accumulate(q.max_degree.begin(), q.max_degree.end(), 0.0) / m;
  q.mean_sq_max_degree =
      std::accumulate(q.max_degree.begin(), q.max_degree.end(), 0.0, [](double acc, double d) { return acc + d * d; }) / m;
  q.mean_eigengap = population_eigengap(mean_matrix(pop.view()), q.k);

  std::vector<double> p_vals, q_vals;
  if (is_four_param(model, p_vals, q_vals)) {
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < p_vals.size(); ++i) {
      const double scale = q.max_degree[i] > 0.0 ? q.n / q.max_degree[i] : 0.0;
      const double diff = (p_vals[i] - q_vals[i]) * scale;
      sum += diff;
      sum_sq += diff * diff;
    }
    q.f_ab = sum_sq / m;
    q.g_ab = (sum / m) * (sum / m);
  }
  return q;
}

double mean_deviation_bound(double mean_max_degree, int n, int num_layers, double eps) {
  return std::sqrt(4.0 * mean_max_degree * std::log(2.0 * n / eps) / num_layers);
}

double squared_deviation_bound(double mean_max_degree, double mean_sq_max_degree, int n, int num_layers,
                               double delta) {
  const double m = num_layers;
  return std::pow(std::log(static_cast<double>(n)), (3.0 + delta) / 2.0) * std::log(2.0 * m) / std::sqrt(m) *
             std::sqrt(mean_sq_max_degree) +
         mean_max_degree;
}

bool squared_deviation_condition(std::span<const double> max_degree, int n) {
  if (max_degree.empty()) return false;
  const double m = static_cast<double>(max_degree.size());
  const double l = std::log(2.0 * m * std::pow(static_cast<double>(n), 3.0));
  double avg = 0.0;
  for (double d : max_degree) {
    const double denom = 2.0 * d + 2.0 * std::sqrt(4.0 * d * l) / 3.0;
    avg += denom > 0.0 ? std::exp(-4.0 * d * l / denom) : 1.0;
  }
  return avg / m <= std::exp(-l);
}

double mean_deviation_norm(LayerSpan observed, LayerSpan population) {
  if (observed.size() != population.size() || observed.empty()) throw DimensionMismatch("layer counts differ");
  Matrix sum = Matrix::Zero(observed.front().rows(), observed.front().cols());
  for (std::size_t m = 0; m < observed.size(); ++m) sum += observed[m] - population[m];
  return spectral_norm(sum / static_cast<double>(observed.size()));
}

double squared_deviation_norm(LayerSpan observed, LayerSpan population) {
  if (observed.size() != population.size() || observed.empty()) throw DimensionMismatch("layer counts differ");
  Matrix sum = Matrix::Zero(observed.front().rows(), observed.front().cols());
  for (std::size_t m = 0; m < observed.size(); ++m) {
    const Matrix d = observed[m] - population[m];
    sum.noalias() += d * d;
  }
  sum /= static_cast<double>(observed.size());
  return spectral_norm(0.5 * (sum + sum.transpose()));
}

namespace {

template <typename Stat>
DeviationReport run_deviation(const BlockModel& model, int reps, std::uint64_t seed, double bound, bool precondition,
                              Stat stat) {
  if (reps < 1) throw std::invalid_argument("need at least one replication");
  const PopulationTensor pop = population_tensor(model);
  DeviationReport r;
  r.bound = bound;
  r.precondition_met = precondition;
  int covered = 0;
  for (int rep = 0; rep < reps; ++rep) {
    const MultiLayerGraph g = sample(model, derive_seed(seed, static_cast<std::uint64_t>(rep)));
    const double norm = stat(g.layers(), pop.view());
    r.norms.push_back(norm);
    covered += norm <= bound;
  }
  r.coverage = static_cast<double>(covered) / reps;
  return r;
}

}  // namespace

DeviationReport mean_deviation_check(const BlockModel& model, int reps, double eps, std::uint64_t seed) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  const TheoryQuantities q = theory_quantities(model);
  const double bound = mean_deviation_bound(q.mean_max_degree, q.n, q.num_layers, eps);
  const bool pre = q.num_layers * q.mean_max_degree > 4.0 / 9.0 * std::log(2.0 * q.n / eps);
  return run_deviation(model, reps, seed, bound, pre, mean_deviation_norm);
}

DeviationReport squared_deviation_check(const BlockModel& model, int reps, std::uint64_t seed, double delta) {
  const TheoryQuantities q = theory_quantities(model);
  const double bound = squared_deviation_bound(q.mean_max_degree, q.mean_sq_max_degree, q.n, q.num_layers, delta);
  const bool pre = squared_deviation_condition(q.max_degree, q.n);
  return run_deviation(model, reps, seed, bound, pre, squared_deviation_norm);
}

MisclusteringBounds misclustering_bounds(const TheoryQuantities& q, int n, int num_layers, int k, double eps,
                                         double log_exponent) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (q.max_degree.size() != q.layer_eigengap.size()) throw DimensionMismatch("inconsistent theory quantities");
  const double inf = std::numeric_limits<double>::infinity();
  const double nn = n;
  const double m = num_layers;
  const double layers_in_q = static_cast<double>(q.max_degree.size());

  double ratio_sum = 0.0;  // sum lambda_m^2 / Delta_m
  double sq_sum = 0.0;     // sum lambda_m^2
  for (std::size_t i = 0; i < q.max_degree.size(); ++i) {
    const double lam = q.layer_eigengap[i].value;
    sq_sum += lam * lam;
    if (q.max_degree[i] > 0.0) ratio_sum += lam * lam / q.max_degree[i];
  }
  const double ratio_mean = ratio_sum / layers_in_q;
  const double sq_mean = sq_sum / layers_in_q;

  MisclusteringBounds b;
  const double coreg_denom = nn * ratio_mean;
  if (coreg_denom > 0.0) {
    b.coreg = 96.0 * q.n_max * k / coreg_denom * std::sqrt(q.mean_max_degree * std::log(4.0 * nn / eps) / m);
  } else {
    b.coreg = inf;
    b.coreg_infinite = true;
  }

  const double olmf_denom = sq_mean * nn;
  if (olmf_denom > 0.0) {
    const double tail = std::pow(q.mean_sq_max_degree, 0.25) * std::sqrt(std::log(2.0 * m)) *
                        std::pow(std::log(nn), 2.0 + log_exponent) / std::pow(m, 0.25);
    b.olmf = 48.0 * q.n_max * k * std::sqrt(q.mean_sq_max_degree) * (std::sqrt(q.mean_max_degree) + tail) / olmf_denom;
  } else {
    b.olmf = inf;
    b.olmf_infinite = true;
  }

  const double lam_bar = q.mean_eigengap.zero ? 0.0 : q.mean_eigengap.value;
  const double mean_denom = lam_bar * lam_bar * nn * m;
  if (mean_denom > 0.0) {
    b.mean_adj = 256.0 * q.n_max * k * q.mean_max_degree * std::log(2.0 * nn / eps) / mean_denom;
  } else {
    b.mean_adj = inf;
    b.mean_adj_infinite = true;
  }
  return b;
}

}  // namespace mlcd
