#pragma once

#include "mlcd/types.hpp"

#include <vector>

namespace mlcd {

struct ConfusionTable {
  Eigen::MatrixXi counts;  // rows: labels of the first partition, cols: second
  int n = 0;
};

ConfusionTable confusion_table(const Partition& a, const Partition& b);

// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
// O(k^3)). Returns the column assigned to each row.
std::vector<int> solve_assignment(const Matrix& cost);

// (1/n) min over label permutations of the Hamming distance.
double misclustering_rate(const Partition& truth, const Partition& estimate);

// I(a;b) / sqrt(H(a) H(b)), natural logs. When either entropy is zero the
// result is 1 for identical set partitions and 0 otherwise.
double nmi(const Partition& a, const Partition& b);

// ||sin Theta(U, V)||_F = ||U U^T - V V^T||_F / sqrt(2).
double subspace_distance(const Embedding& u, const Embedding& v);
double subspace_distance(const Matrix& u, const Matrix& v);

// min over orthogonal O of ||U - V O||_F (orthogonal Procrustes).
double procrustes_distance(const Matrix& u, const Matrix& v);

// Z (Z^T Z)^{-1/2}: the orthonormal basis of the membership column space whose
// rows coincide exactly for nodes in the same community.
Embedding community_embedding(const Partition& p);

// Right-hand side of r <= (8 n_max / n) min_O ||U - Z (Z^T Z)^{-1/2} O||_F^2.
double misclustering_upper_bound(const Partition& truth, const Matrix& u);

}  // namespace mlcd
