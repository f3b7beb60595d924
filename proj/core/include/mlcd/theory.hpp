#pragma once

#include "mlcd/mlsbm.hpp"
#include "mlcd/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mlcd {

// Eigenvalues whose magnitude is at most this times n are treated as zero.
inline constexpr double kZeroEigenvalueFactor = 1e-8;

struct Eigengap {
  double value = 0.0;  // signed eigenvalue with the k-th largest magnitude
  bool zero = false;   // |value| <= kZeroEigenvalueFactor * n
};

// Smallest non-zero eigenvalue (in magnitude) of a rank-k population matrix,
// taken as the k-th largest |eigenvalue|; a rank-deficient matrix reports zero.
Eigengap population_eigengap(const SymMatrix& population, int k);

struct TheoryQuantities {
  int n = 0;
  int k = 0;
  int num_layers = 0;
  int n_max = 0;                    // largest community
  std::vector<double> max_degree;   // Delta_m = max expected degree of layer m
  double mean_max_degree = 0.0;     // (1/M) sum Delta_m
  double mean_sq_max_degree = 0.0;  // (1/M) sum Delta_m^2
  std::vector<Eigengap> layer_eigengap;
  Eigengap mean_eigengap;           // of the mean population matrix
  // Signal functionals, present only for four-parameter models:
  //   f = (1/M) sum (a_m - b_m)^2,  g = ((1/M) sum (a_m - b_m))^2,
  //   with a_m = p_m n / Delta_m, b_m = q_m n / Delta_m.
  std::optional<double> f_ab;
  std::optional<double> g_ab;
};

TheoryQuantities theory_quantities(const BlockModel& model);

// sqrt(4 Dbar log(2n/eps) / M)
double mean_deviation_bound(double mean_max_degree, int n, int num_layers, double eps);

// (log n)^((3+delta)/2) (log 2M / sqrt(M)) sqrt(Dbar') + Dbar
double squared_deviation_bound(double mean_max_degree, double mean_sq_max_degree, int n, int num_layers,
                               double delta);

// (1/M) sum_m exp(-4 D_m L / (2 D_m + 2 sqrt(4 D_m L) / 3)) <= exp(-L), L = log(2 M n^3).
bool squared_deviation_condition(std::span<const double> max_degree, int n);

struct DeviationReport {
  std::vector<double> norms;  // one empirical spectral norm per replication
  double bound = 0.0;
  double coverage = 0.0;       // fraction of replications with norm <= bound
  bool precondition_met = false;
};

// ||(1/M) sum (A_m - E A_m)||_2 against the mean-deviation bound.
DeviationReport mean_deviation_check(const BlockModel& model, int reps, double eps, std::uint64_t seed);

// ||(1/M) sum (A_m - E A_m)^2||_2 against the squared-deviation bound.
DeviationReport squared_deviation_check(const BlockModel& model, int reps, std::uint64_t seed,
                                        double delta = 0.1);

// The two statistics for one observed graph; exposed for direct checks.
double mean_deviation_norm(LayerSpan observed, LayerSpan population);
double squared_deviation_norm(LayerSpan observed, LayerSpan population);

struct MisclusteringBounds {
  double coreg = 0.0;
  double olmf = 0.0;
  double mean_adj = 0.0;
  bool coreg_infinite = false;
  bool olmf_infinite = false;
  bool mean_adj_infinite = false;
};

// Upper bounds on the misclustered fraction for co-regularized SC, OLMF and
// mean-adjacency SC. `log_exponent` is the small positive constant in the
// (log n)^(2 + .) factor of the OLMF bound.
MisclusteringBounds misclustering_bounds(const TheoryQuantities& q, int n, int num_layers, int k, double eps,
                                         double log_exponent = 0.1);

}  // namespace mlcd
