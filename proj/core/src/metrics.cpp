#include "mlcd/metrics.hpp"

#include "mlcd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

namespace mlcd {

namespace {

void require_same_length(const Partition& a, const Partition& b) {
  if (a.size() != b.size())
    throw DimensionMismatch("partitions differ in length (" + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
}

double entropy(const Eigen::VectorXd& counts, double n) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < counts.size(); ++i)
    if (counts(i) > 0) h -= counts(i) / n * std::log(counts(i) / n);
  return h;
}

bool same_set_partition(const Partition& a, const Partition& b) {
  std::unordered_map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [it1, new1] = ab.emplace(a[i], b[i]);
    auto [it2, new2] = ba.emplace(b[i], a[i]);
    if (it1->second != b[i] || it2->second != a[i]) return false;
  }
  return true;
}

}  // namespace

ConfusionTable confusion_table(const Partition& a, const Partition& b) {
  require_same_length(a, b);
  ConfusionTable t{Eigen::MatrixXi::Zero(a.num_labels(), b.num_labels()), static_cast<int>(a.size())};
  for (std::size_t i = 0; i < a.size(); ++i) ++t.counts(a[i], b[i]);
  return t;
}

std::vector<int> solve_assignment(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw DimensionMismatch("assignment cost matrix must be square");
  const int n = static_cast<int>(cost.rows());
  if (n == 0) return {};
  const double inf = std::numeric_limits<double>::infinity();

  // Potentials formulation with 1-based sentinels; col_match[j] = row matched to column j.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> col_match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    col_match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = col_match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[col_match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_match[j0] != 0);
    do {
      const int j1 = way[j0];
      col_match[j0] = col_match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) row_to_col[static_cast<std::size_t>(col_match[j] - 1)] = j - 1;
  return row_to_col;
}

double misclustering_rate(const Partition& truth, const Partition& estimate) {
  require_same_length(truth, estimate);
  if (truth.size() == 0) return 0.0;
  const ConfusionTable t = confusion_table(truth, estimate);
  const int size = std::max(truth.num_labels(), estimate.num_labels());
  // Maximizing matched counts == minimizing negated counts on a padded square table.
  Matrix cost = Matrix::Zero(size, size);
  cost.topLeftCorner(t.counts.rows(), t.counts.cols()) = -t.counts.cast<double>();
  const std::vector<int> match = solve_assignment(cost);
  long matched = 0;
  for (int r = 0; r < t.counts.rows(); ++r) {
    const int c = match[static_cast<std::size_t>(r)];
    if (c < t.counts.cols()) matched += t.counts(r, c);
  }
  return 1.0 - static_cast<double>(matched) / static_cast<double>(truth.size());
}

double nmi(const Partition& a, const Partition& b) {
  require_same_length(a, b);
  if (a.size() == 0) return 1.0;
  const ConfusionTable t = confusion_table(a, b);
  const double n = static_cast<double>(a.size());
  const Eigen::MatrixXd joint = t.counts.cast<double>();
  const Eigen::VectorXd row = joint.rowwise().sum();
  const Eigen::VectorXd col = joint.colwise().sum().transpose();
  const double ha = entropy(row, n);
  const double hb = entropy(col, n);
  if (ha <= 0.0 || hb <= 0.0) return same_set_partition(a, b) ? 1.0 : 0.0;

  double mi = 0.0;
  for (Eigen::Index i = 0; i < joint.rows(); ++i)
    for (Eigen::Index j = 0; j < joint.cols(); ++j)
      if (joint(i, j) > 0) mi += joint(i, j) / n * std::log(joint(i, j) * n / (row(i) * col(j)));
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

double subspace_distance(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) throw DimensionMismatch("subspace_distance: shapes differ");
  // ||UU^T - VV^T||_F^2 = 2k - 2 ||U^T V||_F^2 for orthonormal U, V; the
  // explicit projector form avoids cancellation for nearly equal subspaces.
  const Matrix diff = u * u.transpose() - v * v.transpose();
  return diff.norm() / std::sqrt(2.0);
}

double subspace_distance(const Embedding& u, const Embedding& v) {
  return subspace_distance(u.matrix(), v.matrix());
}

double procrustes_distance(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) throw DimensionMismatch("procrustes_distance: shapes differ");
  // argmin_O ||U - V O||_F is O = W X^T from the SVD V^T U = W S X^T.
  const Eigen::JacobiSVD<Matrix> svd(v.transpose() * u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix o = svd.matrixU() * svd.matrixV().transpose();
  return (u - v * o).norm();
}

Embedding community_embedding(const Partition& p) {
  const auto sizes = p.community_sizes();
  Matrix e = Matrix::Zero(static_cast<Eigen::Index>(p.size()), p.num_labels());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int c = p[i];
    if (sizes[static_cast<std::size_t>(c)] > 0) e(static_cast<Eigen::Index>(i), c) = 1.0 / std::sqrt(sizes[static_cast<std::size_t>(c)]);
  }
  return Embedding(std::move(e));
}

double misclustering_upper_bound(const Partition& truth, const Matrix& u) {
  const auto sizes = truth.community_sizes();
  const int n_max = sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
  const double dist = procrustes_distance(u, community_embedding(truth).matrix());
  return 8.0 * n_max / static_cast<double>(truth.size()) * dist * dist;
}

}  // namespace mlcd
