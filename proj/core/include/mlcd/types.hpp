#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace mlcd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Dense symmetric matrix. Symmetry is a convention checked with is_symmetric(),
// not enforced by the type.
using SymMatrix = Eigen::MatrixXd;

// A stack of same-sized square layers: sampled adjacency matrices or population
// matrices. Every method accepts this view so that observed graphs and
// population tensors go through the same code.
using LayerSpan = std::span<const Matrix>;

bool is_symmetric(const Matrix& s, double tol = 1e-12);

// Which eigenvalues count as "top": largest signed value, or largest magnitude
// (needed when communities show up as negative eigenvalues).
enum class EigenOrder { algebraic, absolute };

// Community labels in [0, k).
class Partition {
 public:
  Partition() = default;
  Partition(std::vector<int> labels, int num_labels);

  // k = 1 + max label (or 0 when empty).
  static Partition from_labels(std::vector<int> labels);

  const std::vector<int>& labels() const noexcept { return labels_; }
  int num_labels() const noexcept { return k_; }
  std::size_t size() const noexcept { return labels_.size(); }
  int operator[](std::size_t i) const { return labels_[i]; }

  std::vector<int> community_sizes() const;

  // n x k 0/1 membership matrix.
  Matrix membership() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<int> labels_;
  int k_ = 0;
};

// n x k matrix with orthonormal columns.
class Embedding {
 public:
  static constexpr double kOrthonormalTol = 1e-8;

  Embedding() = default;

  // Throws DegenerateInput if ||U^T U - I||_F > kOrthonormalTol.
  explicit Embedding(Matrix u);

  const Matrix& matrix() const noexcept { return u_; }
  Eigen::Index rows() const noexcept { return u_.rows(); }
  Eigen::Index cols() const noexcept { return u_.cols(); }

  // U U^T
  Matrix projector() const { return u_ * u_.transpose(); }

 private:
  Matrix u_;
};

}  // namespace mlcd
