#pragma once

#include "mlcd/spectral.hpp"
#include "mlcd/types.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mlcd {

// ---------------------------------------------------------------------------
// Orthogonal linked matrix factorization
//
//   min_{P^T P = I, Lambda}  sum_m ||A^(m) - P Lambda^(m) P^T||_F^2
//   <=> max_{P^T P = I}      F(P) = sum_m ||P^T A^(m) P||_F^2,
//   with Lambda^(m) = P^T A^(m) P at the optimum.
// ---------------------------------------------------------------------------

double olmf_objective(LayerSpan layers, const Matrix& p);

// Factorization loss sum_m ||A^(m) - P Lambda^(m) P^T||_F^2.
double olmf_loss(LayerSpan layers, const Matrix& p, std::span<const Matrix> lambdas);

// Closed-form Lambda^(m) = P^T A^(m) P.
std::vector<Matrix> olmf_lambdas(LayerSpan layers, const Matrix& p);

struct OlmfGradient {
  Matrix p;                     // -4 sum_m (I - P P^T) A^(m) P Lambda^(m)
  std::vector<Matrix> lambdas;  // -2 P^T (A^(m) - P Lambda^(m) P^T) P
};

// Derivatives of the factorization loss. The Lambda part is the exact partial
// derivative; the P part is the component orthogonal to span(P), i.e. the
// derivative along any direction D with P^T D = 0.
OlmfGradient olmf_gradient(LayerSpan layers, const Matrix& p, std::span<const Matrix> lambdas);

struct OlmfFactors {
  Embedding p;
  std::vector<Matrix> lambdas;
  double objective = 0.0;  // F(P)
};

// |k-th selected eigenvalue| <= kRankTolerance * |largest| marks a layer as
// rank deficient for OLMF start selection.
inline constexpr double kRankTolerance = 1e-9;

struct OlmfOptions {
  int max_iter = 500;
  double tol = 1e-9;  // relative change of F
  int restarts = 3;   // distinct randomly chosen starting layers
  EigenOrder mode = EigenOrder::algebraic;
  bool quasi_newton = true;  // limited-memory direction instead of the plain gradient
  int memory = 5;
  std::uint64_t seed = 0;
  KMeansOptions kmeans;
};

struct OlmfRun {
  OlmfFactors factors;
  bool converged = false;
  int iterations = 0;
  std::vector<double> objective_trace;  // F after every accepted step, starting value first
};

// Monotone Riemannian ascent on F from `start` (QR retraction, Armijo
// backtracking with Barzilai-Borwein trial steps).
OlmfRun olmf_ascend(LayerSpan layers, const Embedding& start, const OlmfOptions& opts);

struct OlmfFit {
  OlmfRun run;
  Partition partition;
  int start_layer = -1;
};

// Best of opts.restarts ascents, each started from the top-k spectral embedding
// of a different randomly chosen layer; k-means on the rows of P.
OlmfFit olmf_fit(LayerSpan layers, int k, const OlmfOptions& opts = {});

// ---------------------------------------------------------------------------
// Co-regularized spectral clustering (centroid form)
//
//   max sum_m tr(U_m^T A_m U_m) + gamma_m tr(U*^T U_m U_m^T U*)
// ---------------------------------------------------------------------------

struct CoregState {
  std::vector<Embedding> us;
  Embedding ustar;
  std::vector<double> gammas;
  double objective = 0.0;
};

enum class CoregInit { mean_adjacency, random };

struct CoregOptions {
  int max_outer = 100;
  double tol = 1e-8;
  EigenOrder mode = EigenOrder::algebraic;  // applies to the per-layer updates only
  CoregInit init = CoregInit::mean_adjacency;
  std::optional<Matrix> start;  // explicit n x k starting U*; overrides `init`
  std::uint64_t seed = 0;
  KMeansOptions kmeans;
};

struct CoregFit {
  CoregState state;
  Partition partition;
  bool converged = false;
  int iterations = 0;
  std::vector<double> objective_trace;  // after each outer iteration
};

// tr(U*^T U U^T U*)
double coreg_penalty(const Matrix& u, const Matrix& ustar);

double coreg_objective(LayerSpan layers, std::span<const Embedding> us, const Embedding& ustar,
                       std::span<const double> gammas);

// Alternates U_m <- top-k(A_m + gamma_m U* U*^T) and U* <- top-k(sum_m gamma_m U_m U_m^T).
CoregFit coreg_fit(LayerSpan layers, int k, std::span<const double> gammas, const CoregOptions& opts = {});

// Value of the objective when every layer attains its own top-k eigenvalue
// sum and all subspaces coincide: sum_m [sum of top-k eigenvalues of A_m + gamma_m k].
// This is the global maximum for population tensors of full-rank models.
double coreg_shared_subspace_maximum(LayerSpan layers, int k, std::span<const double> gammas);

// c * max_m ||A^(m)||_2 for every layer.
std::vector<double> default_gammas(LayerSpan layers, double multiplier = 4.0);

// Data-driven lower thresholds
//   sqrt(M) ||A_m||_2^2 / sqrt(||(2/M) sum A||_2 log(4n/eps)).
// Throws DegenerateInput when the aggregate norm is zero.
std::vector<double> gamma_lower_thresholds(LayerSpan layers, double eps);

// ---------------------------------------------------------------------------
// Early and late fusion baselines
// ---------------------------------------------------------------------------

struct SpectralFit {
  Partition partition;
  Embedding embedding;
  Vector eigenvalues;
  bool rank_deficient = false;  // k-th selected |eigenvalue| <= 1e-8 n
};

// Spectral clustering of a single symmetric matrix.
SpectralFit spectral_clustering(const SymMatrix& s, int k, EigenOrder mode, std::uint64_t seed,
                                const KMeansOptions& kmeans = {});

SpectralFit mean_adjacency_sc(LayerSpan layers, int k, EigenOrder mode, std::uint64_t seed,
                              const KMeansOptions& kmeans = {});

enum class FusionKind { spectral_kernel, module_allegiance };

struct FusionKernel {
  SymMatrix matrix;
  FusionKind kind = FusionKind::spectral_kernel;
};

struct FusionFit {
  FusionKernel kernel;
  Partition partition;
  std::vector<Partition> layer_partitions;  // module allegiance only
};

// (1/M) sum_m U_m U_m^T
SymMatrix spectral_kernel(std::span<const Embedding> embeddings);

// K_ij = fraction of partitions that put i and j together.
SymMatrix module_allegiance(std::span<const Partition> partitions);

FusionFit spectral_kernel_sc(LayerSpan layers, int k, EigenOrder mode, std::uint64_t seed,
                             const KMeansOptions& kmeans = {});
FusionFit module_allegiance_sc(LayerSpan layers, int k, EigenOrder mode, std::uint64_t seed,
                               const KMeansOptions& kmeans = {});

// ---------------------------------------------------------------------------
// Uniform entry point used by the harness and the CLI
// ---------------------------------------------------------------------------

enum class Method { olmf, coreg, mean_adj, spectral_kernel, module_allegiance };

inline constexpr Method kAllMethods[] = {Method::olmf, Method::coreg, Method::mean_adj,
                                         Method::spectral_kernel, Method::module_allegiance};

Method parse_method(std::string_view name);
std::string_view method_name(Method m);
EigenOrder parse_mode(std::string_view name);
std::string_view mode_name(EigenOrder mode);

struct MethodOptions {
  EigenOrder mode = EigenOrder::algebraic;
  double gamma_multiplier = 4.0;
  int olmf_restarts = 3;
  std::uint64_t seed = 0;
  KMeansOptions kmeans;
};

struct MethodResult {
  Partition partition;
  double objective = std::numeric_limits<double>::quiet_NaN();
  bool converged = true;
  int iterations = 0;
};

MethodResult run_method(Method method, LayerSpan layers, int k, const MethodOptions& opts);

}  // namespace mlcd
