#include "mlcd/methods.hpp"

#include "mlcd/errors.hpp"
#include "mlcd/graph.hpp"
#include "mlcd/random.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mlcd {

namespace {

Eigen::Index check_layers(LayerSpan layers) {
  if (layers.empty()) throw std::invalid_argument("need at least one layer");
  const Eigen::Index n = layers.front().rows();
  for (const Matrix& a : layers)
    if (a.rows() != n || a.cols() != n) throw DimensionMismatch("layers must be square and equally sized");
  return n;
}

void check_factor(LayerSpan layers, const Matrix& p) {
  const Eigen::Index n = check_layers(layers);
  if (p.rows() != n) throw DimensionMismatch("factor has " + std::to_string(p.rows()) + " rows, layers have " +
                                             std::to_string(n));
}

void check_k(Eigen::Index n, int k) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  if (k > n) throw std::invalid_argument("k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
}

struct FEval {
  double value = 0.0;
  Matrix grad;  // ascent gradient of F restricted to directions orthogonal to span(P)
};

FEval evaluate_f(LayerSpan layers, const Matrix& p, bool with_grad) {
  FEval out;
  Matrix acc;
  if (with_grad) acc = Matrix::Zero(p.rows(), p.cols());
  for (const Matrix& a : layers) {
    const Matrix ap = a * p;
    const Matrix s = p.transpose() * ap;
    out.value += s.squaredNorm();
    if (with_grad) acc.noalias() += ap * s;
  }
  if (with_grad) out.grad = 4.0 * (acc - p * (p.transpose() * acc));
  return out;
}

double inner(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

Matrix horizontal(const Matrix& p, const Matrix& d) { return d - p * (p.transpose() * d); }

Matrix random_start(Eigen::Index n, int k, Rng& rng) {
  Matrix m(n, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

// --- OLMF -------------------------------------------------------------------

double olmf_objective(LayerSpan layers, const Matrix& p) {
  check_factor(layers, p);
  return evaluate_f(layers, p, false).value;
}

double olmf_loss(LayerSpan layers, const Matrix& p, std::span<const Matrix> lambdas) {
  check_factor(layers, p);
  if (lambdas.size() != layers.size()) throw DimensionMismatch("need one Lambda per layer");
  double loss = 0.0;
  for (std::size_t m = 0; m < layers.size(); ++m) {
    if (lambdas[m].rows() != p.cols() || lambdas[m].cols() != p.cols()) throw DimensionMismatch("Lambda must be k x k");
    loss += (layers[m] - p * lambdas[m] * p.transpose()).squaredNorm();
  }
  return loss;
}

std::vector<Matrix> olmf_lambdas(LayerSpan layers, const Matrix& p) {
  check_factor(layers, p);
  std::vector<Matrix> out;
  out.reserve(layers.size());
  for (const Matrix& a : layers) out.push_back(p.transpose() * a * p);
  return out;
}

OlmfGradient olmf_gradient(LayerSpan layers, const Matrix& p, std::span<const Matrix> lambdas) {
  check_factor(layers, p);
  if (lambdas.size() != layers.size()) throw DimensionMismatch("need one Lambda per layer");
  OlmfGradient g{Matrix::Zero(p.rows(), p.cols()), {}};
  g.lambdas.reserve(layers.size());
  for (std::size_t m = 0; m < layers.size(); ++m) {
    const Matrix& a = layers[m];
    const Matrix& lam = lambdas[m];
    if (lam.rows() != p.cols() || lam.cols() != p.cols()) throw DimensionMismatch("Lambda must be k x k");
    const Matrix ap = a * p;
    g.p -= 4.0 * (ap - p * (p.transpose() * ap)) * lam;
    g.lambdas.push_back(-2.0 * p.transpose() * (a - p * lam * p.transpose()) * p);
  }
  return g;
}

OlmfRun olmf_ascend(LayerSpan layers, const Embedding& start, const OlmfOptions& opts) {
  check_factor(layers, start.matrix());
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 60;

  Matrix p = start.matrix();
  FEval cur = evaluate_f(layers, p, true);
  OlmfRun run;
  run.objective_trace.push_back(cur.value);

  // Limited-memory pairs for minimizing -F: s = step, y = change of -grad.
  std::deque<std::pair<Matrix, Matrix>> pairs;
  const double gnorm0 = cur.grad.norm();
  double step = gnorm0 > 0.0 ? 1.0 / gnorm0 : 1.0;

  for (int it = 1; it <= opts.max_iter; ++it) {
    const double gnorm = cur.grad.norm();
    if (gnorm <= 1e-13 * std::max(1.0, cur.value)) {
      run.converged = true;
      break;
    }

    Matrix dir = cur.grad;
    double trial = step;
    if (opts.quasi_newton && !pairs.empty()) {
      Matrix q = -cur.grad;
      std::vector<double> alpha(pairs.size());
      for (std::size_t i = pairs.size(); i-- > 0;) {
        const auto& [s, y] = pairs[i];
        alpha[i] = inner(s, q) / inner(y, s);
        q -= alpha[i] * y;
      }
      const auto& [s_last, y_last] = pairs.back();
      Matrix r = inner(s_last, y_last) / inner(y_last, y_last) * q;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [s, y] = pairs[i];
        const double beta = inner(y, r) / inner(y, s);
        r += (alpha[i] - beta) * s;
      }
      dir = horizontal(p, -r);
      if (inner(dir, cur.grad) <= 0.0) {
        dir = cur.grad;
        pairs.clear();
      } else {
        trial = 1.0;
      }
    }

    const double slope = inner(cur.grad, dir);
    Matrix next;
    double next_value = cur.value;
    bool accepted = false;
    for (int ls = 0; ls < kMaxBacktracks; ++ls) {
      next = orthonormalize(p + trial * dir).matrix();
      next_value = evaluate_f(layers, next, false).value;
      if (next_value >= cur.value + kArmijo * trial * slope) {
        accepted = true;
        break;
      }
      trial *= 0.5;
    }
    if (!accepted) {
      // No representable ascent along the direction: stationary to working precision.
      run.converged = true;
      break;
    }

    FEval nxt = evaluate_f(layers, next, true);
    const Matrix s = next - p;
    const Matrix y = nxt.grad - cur.grad;
    const double sy = inner(s, y);
    const double ss = inner(s, s);
    step = sy != 0.0 ? std::min(ss / std::abs(sy), 1e3 * trial) : 2.0 * trial;
    if (opts.quasi_newton) {
      if (-sy > 1e-12 * ss) pairs.emplace_back(s, -y);
      while (static_cast<int>(pairs.size()) > std::max(opts.memory, 1)) pairs.pop_front();
    }

    const double change = (nxt.value - cur.value) / std::max(std::abs(cur.value), 1e-300);
    p = std::move(next);
    cur = std::move(nxt);
    run.objective_trace.push_back(cur.value);
    run.iterations = it;
    if (change < opts.tol) {
      run.converged = true;
      break;
    }
  }

  run.factors.p = Embedding(p);
  run.factors.lambdas = olmf_lambdas(layers, p);
  run.factors.objective = cur.value;
  return run;
}

OlmfFit olmf_fit(LayerSpan layers, int k, const OlmfOptions& opts) {
  const Eigen::Index n = check_layers(layers);
  check_k(n, k);
  if (opts.restarts < 1) throw std::invalid_argument("olmf: restarts must be at least 1");

  // Distinct starting layers in random order. A layer whose k-th selected
  // eigenvalue vanishes has no unique k-dimensional embedding, so such layers
  // are only used when too few others exist.
  std::vector<int> order(layers.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(opts.seed, 0));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const std::size_t starts = std::min<std::size_t>(static_cast<std::size_t>(opts.restarts), order.size());

  std::vector<std::pair<int, Embedding>> chosen, deficient;
  for (int layer : order) {
    if (chosen.size() == starts) break;
    TopEigen te = top_k_eigen(layers[static_cast<std::size_t>(layer)], k, opts.mode);
    const bool full = std::abs(te.values(k - 1)) > kRankTolerance * std::abs(te.values(0));
    (full ? chosen : deficient).emplace_back(layer, std::move(te.vectors));
  }
  for (std::size_t i = 0; chosen.size() < starts && i < deficient.size(); ++i) chosen.push_back(deficient[i]);

  OlmfFit best;
  bool have = false;
  for (const auto& [layer, start] : chosen) {
    OlmfRun run = olmf_ascend(layers, start, opts);
    if (!have || run.factors.objective > best.run.factors.objective) {
      best.run = std::move(run);
      best.start_layer = layer;
      have = true;
    }
  }
  best.partition = kmeans_rows(best.run.factors.p.matrix(), k, derive_seed(opts.seed, 1), opts.kmeans).partition;
  return best;
}

// --- Co-regularized spectral clustering -------------------------------------

double coreg_penalty(const Matrix& u, const Matrix& ustar) {
  if (u.rows() != ustar.rows() || u.cols() != ustar.cols()) throw DimensionMismatch("coreg_penalty: shapes differ");
  return (ustar.transpose() * u).squaredNorm();
}

double coreg_objective(LayerSpan layers, std::span<const Embedding> us, const Embedding& ustar,
                       std::span<const double> gammas) {
  check_layers(layers);
  if (us.size() != layers.size() || gammas.size() != layers.size())
    throw DimensionMismatch("coreg_objective: need one embedding and gamma per layer");
  double total = 0.0;
  for (std::size_t m = 0; m < layers.size(); ++m) {
    const Matrix& u = us[m].matrix();
    if (u.rows() != layers[m].rows()) throw DimensionMismatch("coreg_objective: embedding row count");
    total += (u.transpose() * layers[m] * u).trace() + gammas[m] * coreg_penalty(u, ustar.matrix());
  }
  return total;
}

namespace {

// Top-k eigenvectors of sum_m gamma_m U_m U_m^T, read off the left singular
// vectors of [sqrt(gamma_1) U_1, ..., sqrt(gamma_M) U_M].
Embedding shared_embedding(const std::vector<Embedding>& us, std::span<const double> gammas, int k) {
  const Eigen::Index n = us.front().rows();
  Matrix stacked(n, static_cast<Eigen::Index>(us.size()) * k);
  for (std::size_t m = 0; m < us.size(); ++m)
    stacked.middleCols(static_cast<Eigen::Index>(m) * k, k) = std::sqrt(gammas[m]) * us[m].matrix();
  const Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner> svd(stacked, Eigen::ComputeThinU);
  Matrix u = svd.matrixU().leftCols(k);
  for (int j = 0; j < k; ++j) {
    Eigen::Index at = 0;
    u.col(j).cwiseAbs().maxCoeff(&at);
    if (u(at, j) < 0.0) u.col(j) = -u.col(j);
  }
  return Embedding(std::move(u));
}

}  // namespace

CoregFit coreg_fit(LayerSpan layers, int k, std::span<const double> gammas, const CoregOptions& opts) {
  const Eigen::Index n = check_layers(layers);
  check_k(n, k);
  if (gammas.size() != layers.size()) throw DimensionMismatch("coreg: need one gamma per layer");
  for (double g : gammas)
    if (!(g > 0.0)) throw std::invalid_argument("coreg: every gamma must be positive");

  CoregFit fit;
  CoregState& st = fit.state;
  st.gammas.assign(gammas.begin(), gammas.end());
  if (opts.start) {
    st.ustar = orthonormalize(*opts.start);
  } else if (opts.init == CoregInit::random) {
    Rng rng(derive_seed(opts.seed, 0));
    st.ustar = orthonormalize(random_start(n, k, rng));
  } else {
    st.ustar = top_k_eigvectors(mean_matrix(layers), k, opts.mode);
  }
  st.us.resize(layers.size());

  // Adding gamma U* U*^T never lowers the spectrum, so lambda_min(A_m) bounds
  // every per-layer update from below.
  std::vector<double> floors;
  for (const Matrix& a : layers) floors.push_back(eigenvalues(a)(0));

  double previous = 0.0;
  for (int it = 1; it <= opts.max_outer; ++it) {
    const Matrix star_proj = st.ustar.projector();
    for (std::size_t m = 0; m < layers.size(); ++m) {
      const Matrix& warm = it == 1 ? st.ustar.matrix() : st.us[m].matrix();
      st.us[m] = top_k_eigen_from(layers[m] + gammas[m] * star_proj, k, opts.mode, warm, floors[m]).vectors;
    }
    st.ustar = shared_embedding(st.us, gammas, k);

    st.objective = coreg_objective(layers, st.us, st.ustar, gammas);
    fit.objective_trace.push_back(st.objective);
    fit.iterations = it;
    if (it > 1 && std::abs(st.objective - previous) <= opts.tol * std::max(std::abs(st.objective), 1e-300)) {
      fit.converged = true;
      break;
    }
    previous = st.objective;
  }

  fit.partition = kmeans_rows(st.ustar.matrix(), k, derive_seed(opts.seed, 1), opts.kmeans).partition;
  return fit;
}

double coreg_shared_subspace_maximum(LayerSpan layers, int k, std::span<const double> gammas) {
  const Eigen::Index n = check_layers(layers);
  check_k(n, k);
  if (gammas.size() != layers.size()) throw DimensionMismatch("need one gamma per layer");
  double total = 0.0;
  for (std::size_t m = 0; m < layers.size(); ++m) {
    const Vector ev = eigenvalues(layers[m]);  // ascending
    total += ev.tail(k).sum() + gammas[m] * k;
  }
  return total;
}

std::vector<double> default_gammas(LayerSpan layers, double multiplier) {
  check_layers(layers);
  if (!(multiplier > 0.0)) throw std::invalid_argument("gamma multiplier must be positive");
  double largest = 0.0;
  for (const Matrix& a : layers) largest = std::max(largest, spectral_norm(a));
  return std::vector<double>(layers.size(), multiplier * largest);
}

std::vector<double> gamma_lower_thresholds(LayerSpan layers, double eps) {
  const Eigen::Index n = check_layers(layers);
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  const double num_layers = static_cast<double>(layers.size());
  const double aggregate = spectral_norm(2.0 * mean_matrix(layers));
  const double denom_sq = aggregate * std::log(4.0 * static_cast<double>(n) / eps);
  if (!(denom_sq > 0.0)) throw DegenerateInput("gamma thresholds undefined for an all-zero layer stack");
  std::vector<double> out;
  out.reserve(layers.size());
  for (const Matrix& a : layers) {
    const double norm = spectral_norm(a);
    out.push_back(std::sqrt(num_layers) * norm * norm / std::sqrt(denom_sq));
  }
  return out;
}

// --- Fusion baselines -------------------------------------------------------

SpectralFit spectral_clustering(const SymMatrix& s, int k, EigenOrder mode, std::uint64_t seed,
                                const KMeansOptions& kmeans) {
  check_k(s.rows(), k);
  TopEigen top = top_k_eigen(s, k, mode);
  SpectralFit fit;
  fit.partition = kmeans_rows(top.vectors.matrix(), k, seed, kmeans).partition;
  fit.rank_deficient = std::abs(top.values(k - 1)) <= 1e-8 * static_cast<double>(s.rows());
  fit.eigenvalues = std::move(top.values);
  fit.embedding = std::move(top.vectors);
  return fit;
}

SpectralFit mean_adjacency_sc(LayerSpan layers, int k, EigenOrder mode, std::uint64_t seed,
                              const KMeansOptions& kmeans) {
  check_layers(layers);
  return spectral_clustering(mean_matrix(layers), k, mode, seed, kmeans);
}

SymMatrix spectral_kernel(std::span<const Embedding> embeddings) {
  if (embeddings.empty()) throw std::invalid_argument("spectral_kernel: no embeddings");
  const Eigen::Index n = embeddings.front().rows();
  SymMatrix k = SymMatrix::Zero(n, n);
  for (const Embedding& e : embeddings) {
    if (e.rows() != n) throw DimensionMismatch("spectral_kernel: embeddings differ in row count");
    k.noalias() += e.matrix() * e.matrix().transpose();
  }
  return k / static_cast<double>(embeddings.size());
}

SymMatrix module_allegiance(std::span<const Partition> partitions) {
  if (partitions.empty()) throw std::invalid_argument("module_allegiance: no partitions");
  const std::size_t n = partitions.front().size();
  SymMatrix k = SymMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const Partition& p : partitions) {
    if (p.size() != n) throw DimensionMismatch("module_allegiance: partitions differ in length");
    const Matrix z = p.membership();
    k.noalias() += z * z.transpose();
  }
  return k / static_cast<double>(partitions.size());
}

FusionFit spectral_kernel_sc(LayerSpan layers, int k, EigenOrder mode, std::uint64_t seed,
                             const KMeansOptions& kmeans) {
  const Eigen::Index n = check_layers(layers);
  check_k(n, k);
  std::vector<Embedding> us;
  us.reserve(layers.size());
  for (const Matrix& a : layers) us.push_back(top_k_eigvectors(a, k, mode));
  FusionFit fit;
  fit.kernel = {spectral_kernel(us), FusionKind::spectral_kernel};
  fit.partition = spectral_clustering(fit.kernel.matrix, k, EigenOrder::algebraic, seed, kmeans).partition;
  return fit;
}

FusionFit module_allegiance_sc(LayerSpan layers, int k, EigenOrder mode, std::uint64_t seed,
                               const KMeansOptions& kmeans) {
  const Eigen::Index n = check_layers(layers);
  check_k(n, k);
  FusionFit fit;
  fit.layer_partitions.reserve(layers.size());
  for (std::size_t m = 0; m < layers.size(); ++m)
    fit.layer_partitions.push_back(spectral_clustering(layers[m], k, mode, derive_seed(seed, m + 1), kmeans).partition);
  fit.kernel = {module_allegiance(fit.layer_partitions), FusionKind::module_allegiance};
  fit.partition = spectral_clustering(fit.kernel.matrix, k, EigenOrder::algebraic, seed, kmeans).partition;
  return fit;
}

// --- Dispatch ---------------------------------------------------------------

Method parse_method(std::string_view name) {
  if (name == "olmf") return Method::olmf;
  if (name == "coreg") return Method::coreg;
  if (name == "mean_adj") return Method::mean_adj;
  if (name == "spectral_kernel") return Method::spectral_kernel;
  if (name == "module_allegiance") return Method::module_allegiance;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::olmf: return "olmf";
    case Method::coreg: return "coreg";
    case Method::mean_adj: return "mean_adj";
    case Method::spectral_kernel: return "spectral_kernel";
    case Method::module_allegiance: return "module_allegiance";
  }
  return "unknown";
}

EigenOrder parse_mode(std::string_view name) {
  if (name == "algebraic") return EigenOrder::algebraic;
  if (name == "absolute") return EigenOrder::absolute;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "' (expected algebraic or absolute)");
}

std::string_view mode_name(EigenOrder mode) {
  return mode == EigenOrder::absolute ? "absolute" : "algebraic";
}

MethodResult run_method(Method method, LayerSpan layers, int k, const MethodOptions& opts) {
  MethodResult res;
  switch (method) {
    case Method::olmf: {
      OlmfOptions o;
      o.mode = opts.mode;
      o.restarts = opts.olmf_restarts;
      o.seed = opts.seed;
      o.kmeans = opts.kmeans;
      OlmfFit fit = olmf_fit(layers, k, o);
      res.partition = std::move(fit.partition);
      res.objective = fit.run.factors.objective;
      res.converged = fit.run.converged;
      res.iterations = fit.run.iterations;
      break;
    }
    case Method::coreg: {
      CoregOptions o;
      o.mode = opts.mode;
      o.seed = opts.seed;
      o.kmeans = opts.kmeans;
      const std::vector<double> gammas = default_gammas(layers, opts.gamma_multiplier);
      CoregFit fit = coreg_fit(layers, k, gammas, o);
      res.partition = std::move(fit.partition);
      res.objective = fit.state.objective;
      res.converged = fit.converged;
      res.iterations = fit.iterations;
      break;
    }
    case Method::mean_adj:
      res.partition = mean_adjacency_sc(layers, k, opts.mode, opts.seed, opts.kmeans).partition;
      break;
    case Method::spectral_kernel:
      res.partition = spectral_kernel_sc(layers, k, opts.mode, opts.seed, opts.kmeans).partition;
      break;
    case Method::module_allegiance:
      res.partition = module_allegiance_sc(layers, k, opts.mode, opts.seed, opts.kmeans).partition;
      break;
  }
  return res;
}

}  // namespace mlcd
