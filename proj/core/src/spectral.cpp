#include "mlcd/spectral.hpp"

#include "mlcd/errors.hpp"
#include "mlcd/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mlcd {

namespace {

double max_abs(const Matrix& s) { return s.size() == 0 ? 0.0 : s.cwiseAbs().maxCoeff(); }

// Self-adjoint decomposition of s / max|s|. Dividing by the max-abs entry
// makes a constant matrix decompose the same way at every density.
void decompose(const SymMatrix& s, bool want_vectors, Vector& values, Matrix* vectors) {
  if (s.rows() != s.cols()) throw DimensionMismatch("eigendecomposition of a non-square matrix");
  const Eigen::Index n = s.rows();
  values.resize(n);
  if (n == 0) return;

  const double scale = max_abs(s);
  if (!std::isfinite(scale)) throw DegenerateInput("matrix has non-finite entries");
  if (!(scale > 0.0)) {
    values.setZero();
    if (vectors) *vectors = Matrix::Identity(n, n);
    return;
  }

  Matrix work = s / scale;
  const int options = want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(work, options);
  // The implicit QR step can stall on low-rank matrices with a large zero
  // eigenspace; a diagonal shift leaves the eigenvectors unchanged.
  double shift = 0.0;
  for (double trial : {1.0, -1.0, 0.5}) {
    if (solver.info() == Eigen::Success) break;
    work.diagonal().array() += trial - shift;
    shift = trial;
    solver.compute(work, options);
  }
  if (solver.info() != Eigen::Success) throw DegenerateInput("eigendecomposition did not converge");
  values = (solver.eigenvalues().array() - shift).matrix() * scale;
  if (vectors) *vectors = solver.eigenvectors();
}

void fix_sign(Eigen::Ref<Vector> v) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > best_abs) {
      best_abs = std::abs(v(i));
      best = i;
    }
  }
  if (v.size() > 0 && v(best) < 0.0) v = -v;
}

double squared_distance(const Matrix& points, Eigen::Index i, const Matrix& centers, Eigen::Index c) {
  return (points.row(i) - centers.row(c)).squaredNorm();
}

void recompute_centers(const Matrix& points, const std::vector<int>& assign, int k, Matrix& centers,
                       std::vector<int>& counts) {
  centers.setZero(k, points.cols());
  counts.assign(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    centers.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
    ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
  }
  for (int c = 0; c < k; ++c)
    if (counts[static_cast<std::size_t>(c)] > 0) centers.row(c) /= counts[static_cast<std::size_t>(c)];
}

double total_cost(const Matrix& points, const std::vector<int>& assign, const Matrix& centers) {
  double cost = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    cost += squared_distance(points, i, centers, assign[static_cast<std::size_t>(i)]);
  return cost;
}

Matrix seed_plus_plus(const Matrix& points, int k, Rng& rng) {
  const Eigen::Index n = points.rows();
  Matrix centers(k, points.cols());
  centers.row(0) = points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  Vector d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2(i) = squared_distance(points, i, centers, 0);

  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc > target && d2(i) > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) d2(i) = std::min(d2(i), squared_distance(points, i, centers, c));
  }
  return centers;
}

}  // namespace

SymmetricEigen eigh(const SymMatrix& s) {
  SymmetricEigen out;
  decompose(s, true, out.values, &out.vectors);
  return out;
}

Vector eigenvalues(const SymMatrix& s) {
  Vector values;
  decompose(s, false, values, nullptr);
  return values;
}

double spectral_norm(const SymMatrix& s) {
  const Vector v = eigenvalues(s);
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

TopEigen top_k_eigen(const SymMatrix& s, int k, EigenOrder order) {
  if (k < 1) throw std::invalid_argument("top_k_eigen: k must be positive");
  if (k > s.rows()) throw std::invalid_argument("top_k_eigen: k = " + std::to_string(k) + " exceeds n = " +
                                                std::to_string(s.rows()));
  const SymmetricEigen full = eigh(s);
  const Eigen::Index n = full.values.size();

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  auto key = [&](Eigen::Index i) {
    return order == EigenOrder::absolute ? std::abs(full.values(i)) : full.values(i);
  };
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return key(a) > key(b); });

  Vector values(k);
  Matrix vectors(n, k);
  for (int j = 0; j < k; ++j) {
    values(j) = full.values(idx[static_cast<std::size_t>(j)]);
    vectors.col(j) = full.vectors.col(idx[static_cast<std::size_t>(j)]);
    fix_sign(vectors.col(j));
  }
  return {std::move(values), Embedding(std::move(vectors))};
}

Embedding top_k_eigvectors(const SymMatrix& s, int k, EigenOrder order) {
  return top_k_eigen(s, k, order).vectors;
}

TopEigen top_k_eigen_from(const SymMatrix& s, int k, EigenOrder order, const Matrix& start, double floor,
                          double tol, int max_iter) {
  const Eigen::Index n = s.rows();
  if (k < 1 || k > n) throw std::invalid_argument("top_k_eigen_from: need 1 <= k <= n");
  if (start.rows() != n || start.cols() != k) throw DimensionMismatch("top_k_eigen_from: start must be n x k");
  const Eigen::Index block = std::min<Eigen::Index>(n, k + 2);
  if (2 * block >= n) return top_k_eigen(s, k, order);

  // Shifting by minus a spectrum floor makes every eigenvalue non-negative,
  // so the dominant subspace is the algebraically largest one.
  const double radius = s.cwiseAbs().rowwise().sum().maxCoeff();
  if (!std::isfinite(radius)) throw DegenerateInput("matrix has non-finite entries");
  if (!(radius > 0.0)) return top_k_eigen(s, k, order);
  double shift = 0.0;
  if (order == EigenOrder::algebraic) shift = std::isnan(floor) ? radius : std::max(0.0, -floor);

  Matrix q(n, block);
  q.leftCols(k) = start;
  Rng rng(0x5eed);
  for (Eigen::Index j = k; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) q(i, j) = rng.uniform(-1.0, 1.0);

  Matrix y(n, block);
  for (int it = 0; it < max_iter; ++it) {
    y.noalias() = s * q;
    y += shift * q;
    const Eigen::HouseholderQR<Matrix> qr(y);
    q = qr.householderQ() * Matrix::Identity(n, block);
    y.noalias() = s * q;
    const Matrix h = q.transpose() * y;
    const Eigen::SelfAdjointEigenSolver<Matrix> small(0.5 * (h + h.transpose()));
    if (small.info() != Eigen::Success) break;

    // Ritz pairs of s ordered by key, descending.
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(block));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    const Vector& theta = small.eigenvalues();
    auto key = [&](Eigen::Index i) { return order == EigenOrder::absolute ? std::abs(theta(i)) : theta(i); };
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return key(a) > key(b); });
    Matrix rot(block, block);
    Vector vals(block);
    for (Eigen::Index j = 0; j < block; ++j) {
      rot.col(j) = small.eigenvectors().col(idx[static_cast<std::size_t>(j)]);
      vals(j) = theta(idx[static_cast<std::size_t>(j)]);
    }
    q = q * rot;
    y = y * rot;

    const double resid = (y.leftCols(k) - q.leftCols(k) * vals.head(k).asDiagonal()).norm();
    if (resid <= tol * radius) {
      Matrix vectors = q.leftCols(k);
      for (int j = 0; j < k; ++j) fix_sign(vectors.col(j));
      return {vals.head(k), Embedding(std::move(vectors))};
    }
  }
  return top_k_eigen(s, k, order);
}

Embedding orthonormalize(const Matrix& m) {
  if (m.cols() < 1 || m.cols() > m.rows())
    throw std::invalid_argument("orthonormalize: need 1 <= columns <= rows");
  const Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  const double largest = sv(0);
  const double smallest = sv(sv.size() - 1);
  if (!(largest > 0.0) || smallest < 1e-10 * largest)
    throw DegenerateInput("orthonormalize: matrix is numerically rank deficient");

  const Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  const Matrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return Embedding(std::move(q));
}

KMeansResult kmeans_once(const Matrix& points, int k, Rng& rng, const KMeansOptions& opts,
                         std::vector<double>* history) {
  const Eigen::Index n = points.rows();
  if (k < 1) throw std::invalid_argument("kmeans: k must be positive");
  if (k > n) throw std::invalid_argument("kmeans: k exceeds the number of points");

  Matrix centers = seed_plus_plus(points, k, rng);
  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  std::vector<int> counts;
  KMeansResult res;
  double previous = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= opts.max_iter; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points, i, centers, 0);
      for (int c = 1; c < k; ++c) {
        const double d = squared_distance(points, i, centers, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    recompute_centers(points, assign, k, centers, counts);

    // Empty cluster: hand it the point farthest from its own center.
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])] < 2) continue;
        const double d = squared_distance(points, i, centers, assign[static_cast<std::size_t>(i)]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far < 0) break;
      assign[static_cast<std::size_t>(far)] = c;
      recompute_centers(points, assign, k, centers, counts);
      changed = true;
    }

    const double cost = total_cost(points, assign, centers);
    if (history) history->push_back(cost);
    res.iterations = it;
    const bool small_change = previous - cost <= opts.tol * std::max(previous, 1e-300);
    previous = cost;
    if (!changed || small_change) {
      res.converged = true;
      break;
    }
  }

  res.wcss = previous;
  res.centers = std::move(centers);
  res.partition = Partition(std::move(assign), k);
  return res;
}

KMeansResult kmeans_rows(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& opts) {
  if (opts.restarts < 1) throw std::invalid_argument("kmeans: restarts must be at least 1");
  KMeansResult best;
  bool have = false;
  for (int r = 0; r < opts.restarts; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    KMeansResult run = kmeans_once(points, k, rng, opts);
    if (!have || run.wcss < best.wcss) {
      best = std::move(run);
      have = true;
    }
  }

  // Renumber by first appearance so equal partitions print equally.
  std::vector<int> remap(static_cast<std::size_t>(k), -1);
  std::vector<int> labels = best.partition.labels();
  int next = 0;
  for (int& l : labels) {
    if (remap[static_cast<std::size_t>(l)] < 0) remap[static_cast<std::size_t>(l)] = next++;
    l = remap[static_cast<std::size_t>(l)];
  }
  Matrix centers(best.centers.rows(), best.centers.cols());
  for (int c = 0; c < k; ++c) {
    const int to = remap[static_cast<std::size_t>(c)] >= 0 ? remap[static_cast<std::size_t>(c)] : next++;
    centers.row(to) = best.centers.row(c);
  }
  best.centers = std::move(centers);
  best.partition = Partition(std::move(labels), k);
  return best;
}

}  // namespace mlcd
