#include "mlcd/mlsbm.hpp"

#include "mlcd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mlcd {

BlockModel::BlockModel(Partition membership, std::vector<Matrix> blocks)
    : membership_(std::move(membership)), blocks_(std::move(blocks)) {
  const int k = membership_.num_labels();
  if (k < 1) throw std::invalid_argument("block model needs at least one community");
  if (blocks_.empty()) throw std::invalid_argument("block model needs at least one layer");
  for (int size : membership_.community_sizes())
    if (size == 0) throw std::invalid_argument("block model has an empty community");
  for (std::size_t m = 0; m < blocks_.size(); ++m) {
    const Matrix& b = blocks_[m];
    if (b.rows() != k || b.cols() != k)
      throw DimensionMismatch("block " + std::to_string(m) + " is not k x k");
    if (!is_symmetric(b, 0.0)) throw std::invalid_argument("block " + std::to_string(m) + " is not symmetric");
    if (b.minCoeff() < 0.0 || b.maxCoeff() > 1.0)
      throw std::invalid_argument("block " + std::to_string(m) + " has entries outside [0, 1]");
  }
}

void FourParamSpec::validate() const {
  if (p.empty() || p.size() != q.size()) throw std::invalid_argument("four-param: p and q must be non-empty and equal length");
  if (k < 1 || s < 1) throw std::invalid_argument("four-param: k and s must be positive");
  for (std::size_t m = 0; m < p.size(); ++m) {
    if (p[m] == q[m]) throw std::invalid_argument("four-param: p == q in layer " + std::to_string(m));
    if (p[m] < 0.0 || p[m] > 1.0 || q[m] < 0.0 || q[m] > 1.0)
      throw std::invalid_argument("four-param: probability outside [0, 1] in layer " + std::to_string(m));
  }
}

Partition multinomial_assignments(int n, int k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("multinomial_assignments: k must be positive");
  if (n < k) throw std::invalid_argument("multinomial_assignments: n < k leaves a community empty");
  Rng rng(seed);
  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int& l : labels) l = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    Partition p(std::move(labels), k);
    const auto sizes = p.community_sizes();
    if (std::find(sizes.begin(), sizes.end(), 0) == sizes.end()) return p;
  }
  throw DegenerateInput("multinomial_assignments: every draw left a community empty");
}

Matrix random_blocks(int k, double lo, double hi, std::span<const double> rho, Rng& rng) {
  if (k < 1) throw std::invalid_argument("random_blocks: k must be positive");
  if (rho.size() != static_cast<std::size_t>(k)) throw DimensionMismatch("random_blocks: need one rho per community");
  if (!(lo >= 0.0) || !(hi >= lo) || hi > 1.0) throw std::invalid_argument("random_blocks: need 0 <= lo <= hi <= 1");
  for (double r : rho)
    if (!(r >= 0.0) || r * hi > 1.0) throw std::invalid_argument("random_blocks: rho * hi must lie in [0, 1]");

  Matrix b(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) b(i, j) = b(j, i) = rng.uniform(lo, hi);
  for (int i = 0; i < k; ++i) b(i, i) = rng.uniform(rho[static_cast<std::size_t>(i)] * lo, rho[static_cast<std::size_t>(i)] * hi);
  return b;
}

Matrix random_blocks(int k, double lo, double hi, double rho, Rng& rng) {
  const std::vector<double> rhos(static_cast<std::size_t>(std::max(k, 0)), rho);
  return random_blocks(k, lo, hi, rhos, rng);
}

Matrix random_blocks(int k, double lo, double hi, double rho, std::uint64_t seed) {
  Rng rng(seed);
  return random_blocks(k, lo, hi, rho, rng);
}

std::vector<Matrix> four_param_blocks(const FourParamSpec& spec) {
  spec.validate();
  std::vector<Matrix> blocks;
  blocks.reserve(spec.p.size());
  for (std::size_t m = 0; m < spec.p.size(); ++m) {
    Matrix b = Matrix::Constant(spec.k, spec.k, spec.q[m]);
    b.diagonal().setConstant(spec.p[m]);
    blocks.push_back(std::move(b));
  }
  return blocks;
}

BlockModel four_param_model(const FourParamSpec& spec) {
  std::vector<int> labels(static_cast<std::size_t>(spec.num_nodes()));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i) / spec.s;
  return BlockModel(Partition(std::move(labels), spec.k), four_param_blocks(spec));
}

PopulationTensor population_tensor(const BlockModel& model) {
  const auto& labels = model.membership().labels();
  const Eigen::Index n = model.num_nodes();
  PopulationTensor t;
  t.layers.reserve(model.blocks().size());
  for (const Matrix& b : model.blocks()) {
    Matrix a(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) a(i, j) = b(labels[static_cast<std::size_t>(i)], labels[static_cast<std::size_t>(j)]);
    t.layers.push_back(std::move(a));
  }
  return t;
}

MultiLayerGraph sample(const BlockModel& model, std::uint64_t seed) {
  Rng rng(seed);
  const auto& labels = model.membership().labels();
  const Eigen::Index n = model.num_nodes();
  std::vector<Matrix> layers;
  layers.reserve(model.blocks().size());
  for (const Matrix& b : model.blocks()) {
    Matrix a = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (rng.bernoulli(b(labels[static_cast<std::size_t>(i)], labels[static_cast<std::size_t>(j)]))) {
          a(i, j) = 1.0;
          a(j, i) = 1.0;
        }
      }
    }
    layers.push_back(std::move(a));
  }
  return MultiLayerGraph(std::move(layers));
}

double expected_average_degree(const BlockModel& model) {
  const auto sizes = model.membership().community_sizes();
  const int k = model.num_communities();
  double total = 0.0;
  for (const Matrix& b : model.blocks())
    for (int a = 0; a < k; ++a)
      for (int c = 0; c < k; ++c) total += sizes[static_cast<std::size_t>(a)] * static_cast<double>(sizes[static_cast<std::size_t>(c)]) * b(a, c);
  return total / model.num_nodes() / model.num_layers();
}

BlockModel scale_to_average_degree(const BlockModel& model, double target) {
  if (!(target > 0.0)) throw std::invalid_argument("target average degree must be positive");
  const double current = expected_average_degree(model);
  if (!(current > 0.0)) throw DegenerateInput("cannot rescale a model with no expected edges");
  const double factor = target / current;
  std::vector<Matrix> blocks;
  blocks.reserve(model.blocks().size());
  for (const Matrix& b : model.blocks()) blocks.push_back((b * factor).cwiseMin(1.0).cwiseMax(0.0));
  return BlockModel(model.membership(), std::move(blocks));
}

Scenario parse_scenario(std::string_view name) {
  if (name == "strong") return Scenario::strong;
  if (name == "mixed") return Scenario::mixed;
  if (name == "complementary") return Scenario::complementary;
  if (name == "layers") return Scenario::layers;
  if (name == "hetero") return Scenario::hetero;
  throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
}

std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::strong: return "strong";
    case Scenario::mixed: return "mixed";
    case Scenario::complementary: return "complementary";
    case Scenario::layers: return "layers";
    case Scenario::hetero: return "hetero";
  }
  return "unknown";
}

namespace {

std::vector<Matrix> scenario_layer_blocks(Scenario scenario, int k, int num_layers, Rng& rng) {
  std::vector<Matrix> blocks;
  blocks.reserve(static_cast<std::size_t>(num_layers));
  auto strong = [&] { return random_blocks(k, kBandLo, kBandHi, rng.uniform(kStrongSnrLo, kStrongSnrHi), rng); };

  switch (scenario) {
    case Scenario::strong:
      for (int m = 0; m < num_layers; ++m) blocks.push_back(strong());
      break;

    case Scenario::mixed:
      // Pattern of 3 strong then 2 near-noise layers, repeated.
      for (int m = 0; m < num_layers; ++m)
        blocks.push_back(m % 5 < 3 ? strong() : random_blocks(k, kBandLo, kBandHi, kNoiseSnr, rng));
      break;

    case Scenario::complementary: {
      if (num_layers < 3 || k < 2) throw std::invalid_argument("complementary scenario needs M >= 3 and k >= 2");
      std::vector<double> rho(static_cast<std::size_t>(k));
      for (int m = 0; m < num_layers; ++m) {
        std::fill(rho.begin(), rho.end(), kNoiseSnr);
        if (m < num_layers - 2) {
          rho[static_cast<std::size_t>(m % k)] = kHighSnr;
        } else {
          const double level = m == num_layers - 2 ? kHighSnr : kLowSnr;
          rho[0] = level;
          rho[1] = level;
        }
        blocks.push_back(random_blocks(k, kBandLo, kBandHi, rho, rng));
      }
      break;
    }

    case Scenario::layers:
      for (int m = 0; m < num_layers; ++m)
        blocks.push_back(m % 3 == 0 ? strong() : random_blocks(k, kBandLo, kBandHi, kLowSnr, rng));
      break;

    case Scenario::hetero: {
      int homophilic = 0;
      for (int m = 0; m < num_layers; ++m) homophilic += m % 5 < 3;
      const int heterophilic = num_layers - homophilic;
      // Heterophilic layers get a denser band so that the within-minus-between
      // contrast of the layer mean cancels in expectation.
      const double boost = heterophilic == 0
                               ? 1.0
                               : homophilic * (kHighSnr - 1.0) / (heterophilic * (1.0 - kHeteroSnr));
      for (int m = 0; m < num_layers; ++m) {
        if (m % 5 < 3)
          blocks.push_back(random_blocks(k, kBandLo, kBandHi, kHighSnr, rng));
        else
          blocks.push_back(random_blocks(k, boost * kBandLo, boost * kBandHi, kHeteroSnr, rng));
      }
      break;
    }
  }
  return blocks;
}

}  // namespace

BlockModel scenario_blocks(Scenario scenario, const ScenarioShape& shape, double sweep, std::uint64_t seed) {
  int num_layers = shape.num_layers;
  double degree = sweep;
  if (scenario == Scenario::layers) {
    num_layers = static_cast<int>(std::lround(sweep));
    if (num_layers < 3 || num_layers % 3 != 0 || std::abs(sweep - num_layers) > 1e-9)
      throw std::invalid_argument("layers scenario: sweep must be a positive multiple of 3");
    degree = shape.avg_degree;
  }
  if (num_layers < 1) throw std::invalid_argument("scenario needs at least one layer");

  Partition z = multinomial_assignments(shape.n, shape.k, derive_seed(seed, 1));
  Rng rng(derive_seed(seed, 2));
  BlockModel raw(std::move(z), scenario_layer_blocks(scenario, shape.k, num_layers, rng));
  return scale_to_average_degree(raw, degree);
}

}  // namespace mlcd
