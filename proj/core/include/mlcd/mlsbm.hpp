#pragma once

#include "mlcd/graph.hpp"
#include "mlcd/random.hpp"
#include "mlcd/types.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace mlcd {

// Multi-layer stochastic block model: one membership shared by M layers, each
// with its own symmetric k x k probability matrix.
class BlockModel {
 public:
  // Throws std::invalid_argument on empty communities, asymmetric blocks,
  // probabilities outside [0,1] or shape mismatches.
  BlockModel(Partition membership, std::vector<Matrix> blocks);

  const Partition& membership() const noexcept { return membership_; }
  const std::vector<Matrix>& blocks() const noexcept { return blocks_; }
  const Matrix& block(int m) const { return blocks_.at(static_cast<std::size_t>(m)); }

  int num_nodes() const noexcept { return static_cast<int>(membership_.size()); }
  int num_communities() const noexcept { return membership_.num_labels(); }
  int num_layers() const noexcept { return static_cast<int>(blocks_.size()); }

 private:
  Partition membership_;
  std::vector<Matrix> blocks_;
};

// Equal-size communities of size s, within/between probabilities p[m], q[m].
struct FourParamSpec {
  std::vector<double> p;
  std::vector<double> q;
  int k = 2;
  int s = 1;

  int num_nodes() const noexcept { return k * s; }
  void validate() const;
};

// E[A^(m)] = Z B^(m) Z^T. The diagonal keeps Z B Z^T values even though
// sampled graphs have no self-loops.
struct PopulationTensor {
  std::vector<Matrix> layers;

  LayerSpan view() const noexcept { return layers; }
  int num_layers() const noexcept { return static_cast<int>(layers.size()); }
};

// Each node uniform over k communities; resamples (at most 100 times) until
// no community is empty.
Partition multinomial_assignments(int n, int k, std::uint64_t seed);

// Off-diagonal entries U(lo, hi) mirrored to keep symmetry; diagonal entry c
// drawn from U(rho[c] * lo, rho[c] * hi).
Matrix random_blocks(int k, double lo, double hi, std::span<const double> rho, Rng& rng);
Matrix random_blocks(int k, double lo, double hi, double rho, Rng& rng);
Matrix random_blocks(int k, double lo, double hi, double rho, std::uint64_t seed);

// B^(m) = (p[m] - q[m]) I + q[m] 1 1^T.
std::vector<Matrix> four_param_blocks(const FourParamSpec& spec);

// Four-parameter model with contiguous communities: nodes [c*s, (c+1)*s) in c.
BlockModel four_param_model(const FourParamSpec& spec);

PopulationTensor population_tensor(const BlockModel& model);

// Independent Bernoulli(Z B^(m) Z^T)_ij edge for every i < j and layer.
MultiLayerGraph sample(const BlockModel& model, std::uint64_t seed);

// (1/M) sum_m mean row sum of Z B^(m) Z^T.
double expected_average_degree(const BlockModel& model);

// Multiplies every block by target / expected_average_degree, clamped to [0, 1].
BlockModel scale_to_average_degree(const BlockModel& model, double target);

enum class Scenario { strong, mixed, complementary, layers, hetero };

Scenario parse_scenario(std::string_view name);
std::string_view scenario_name(Scenario s);

struct ScenarioShape {
  int n = 300;
  int k = 3;
  int num_layers = 5;
  double avg_degree = 10.0;  // used by Scenario::layers, where the sweep is M
};

// SNR levels shared by the scenario recipes.
inline constexpr double kStrongSnrLo = 2.0;
inline constexpr double kStrongSnrHi = 3.0;
inline constexpr double kHighSnr = 3.0;
inline constexpr double kLowSnr = 1.2;
inline constexpr double kNoiseSnr = 1.1;
inline constexpr double kHeteroSnr = 1.0 / 3.0;

// Off-diagonal band before degree scaling.
inline constexpr double kBandLo = 0.050;
inline constexpr double kBandHi = 0.055;

// Block model for one point of a simulation scenario. `sweep` is the target
// average degree, except for Scenario::layers where it is the layer count
// (a positive multiple of 3) and shape.avg_degree is used.
BlockModel scenario_blocks(Scenario scenario, const ScenarioShape& shape, double sweep,
                           std::uint64_t seed);

}  // namespace mlcd
