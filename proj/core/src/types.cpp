#include "mlcd/types.hpp"

#include "mlcd/errors.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mlcd {

bool is_symmetric(const Matrix& s, double tol) {
  if (s.rows() != s.cols()) return false;
  for (Eigen::Index j = 0; j < s.cols(); ++j)
    for (Eigen::Index i = j + 1; i < s.rows(); ++i)
      if (std::abs(s(i, j) - s(j, i)) > tol) return false;
  return true;
}

Partition::Partition(std::vector<int> labels, int num_labels)
    : labels_(std::move(labels)), k_(num_labels) {
  if (k_ < 0) throw std::invalid_argument("partition: negative label count");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= k_)
      throw std::invalid_argument("partition: label " + std::to_string(labels_[i]) +
                                  " at node " + std::to_string(i) + " outside [0, " +
                                  std::to_string(k_) + ")");
  }
}

Partition Partition::from_labels(std::vector<int> labels) {
  int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  return Partition(std::move(labels), k);
}

std::vector<int> Partition::community_sizes() const {
  std::vector<int> sizes(static_cast<std::size_t>(k_), 0);
  for (int l : labels_) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

Matrix Partition::membership() const {
  Matrix z = Matrix::Zero(static_cast<Eigen::Index>(labels_.size()), k_);
  for (std::size_t i = 0; i < labels_.size(); ++i) z(static_cast<Eigen::Index>(i), labels_[i]) = 1.0;
  return z;
}

Embedding::Embedding(Matrix u) : u_(std::move(u)) {
  const Matrix gram = u_.transpose() * u_;
  const double err = (gram - Matrix::Identity(u_.cols(), u_.cols())).norm();
  if (!(err <= kOrthonormalTol))
    throw DegenerateInput("embedding columns are not orthonormal (||U^T U - I||_F = " +
                          std::to_string(err) + ")");
}

}  // namespace mlcd
