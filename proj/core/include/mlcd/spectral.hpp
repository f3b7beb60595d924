#pragma once

#include "mlcd/random.hpp"
#include "mlcd/types.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace mlcd {

// Full decomposition, eigenvalues ascending, eigenvectors in matching columns.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

SymmetricEigen eigh(const SymMatrix& s);
Vector eigenvalues(const SymMatrix& s);

// max |eigenvalue|; equals ||S||_2 for symmetric S.
double spectral_norm(const SymMatrix& s);

struct TopEigen {
  Vector values;  // in selection order
  Embedding vectors;
};

// The k leading eigenpairs under `order`. Ties go to the lower index of the
// ascending full decomposition. Each column is signed so that its
// largest-magnitude entry (first one on ties) is positive.
TopEigen top_k_eigen(const SymMatrix& s, int k, EigenOrder order = EigenOrder::algebraic);
Embedding top_k_eigvectors(const SymMatrix& s, int k, EigenOrder order = EigenOrder::algebraic);

// Same selection by block subspace iteration with Rayleigh-Ritz, warm-started
// from the n x k `start`. `floor` is a known lower bound on the spectrum used
// to shift in algebraic order (NaN: use minus the max absolute row sum).
// Stops when the Ritz residual is below tol * |s|; falls back to top_k_eigen
// if that does not happen within max_iter sweeps (for example when the k-th
// and (k+1)-th keys tie).
TopEigen top_k_eigen_from(const SymMatrix& s, int k, EigenOrder order, const Matrix& start,
                          double floor = std::numeric_limits<double>::quiet_NaN(), double tol = 1e-12,
                          int max_iter = 300);

// Thin QR with positive R diagonal. Throws DegenerateInput when the smallest
// singular value is below 1e-10 times the largest.
Embedding orthonormalize(const Matrix& m);

struct KMeansOptions {
  int restarts = 20;
  int max_iter = 300;
  double tol = 1e-9;  // relative WCSS change
};

struct KMeansResult {
  Partition partition;
  Matrix centers;  // k x d
  double wcss = 0.0;
  int iterations = 0;
  bool converged = false;
};

// One k-means++ seeded Lloyd run. When `history` is non-null it receives the
// WCSS after every centroid update (non-increasing).
KMeansResult kmeans_once(const Matrix& points, int k, Rng& rng, const KMeansOptions& opts,
                         std::vector<double>* history = nullptr);

// Best of opts.restarts runs by WCSS (lowest restart index on ties). Restart r
// draws from derive_seed(seed, r). Labels are renumbered by first appearance.
KMeansResult kmeans_rows(const Matrix& points, int k, std::uint64_t seed,
                         const KMeansOptions& opts = {});

}  // namespace mlcd
