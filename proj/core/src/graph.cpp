#include "mlcd/graph.hpp"

#include "mlcd/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mlcd {

namespace {

void validate_layer(const Matrix& a, Eigen::Index n, std::size_t m) {
  const std::string where = "layer " + std::to_string(m) + ": ";
  if (a.rows() != n || a.cols() != n) throw DimensionMismatch(where + "shape differs from layer 0");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (a(j, j) != 0.0) throw std::invalid_argument(where + "self-loop at node " + std::to_string(j));
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = a(i, j);
      if (v != 0.0 && v != 1.0) throw std::invalid_argument(where + "non-binary entry");
      if (a(j, i) != v) throw std::invalid_argument(where + "adjacency not symmetric");
    }
  }
}

// Splits a line into whitespace-separated non-negative integers; '#' starts a comment.
bool parse_ints(std::string_view line, std::vector<long long>& out) {
  out.clear();
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos == line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    long long value = 0;
    auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + end, value);
    if (ec != std::errc() || ptr != line.data() + end || value < 0) return false;
    out.push_back(value);
    pos = end;
  }
  return true;
}

}  // namespace

MultiLayerGraph::MultiLayerGraph(std::vector<Matrix> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("multi-layer graph needs at least one layer");
  const Eigen::Index n = layers_.front().rows();
  if (n < 2) throw std::invalid_argument("multi-layer graph needs at least two nodes");
  for (std::size_t m = 0; m < layers_.size(); ++m) validate_layer(layers_[m], n, m);
}

MultiLayerGraph MultiLayerGraph::empty(int num_nodes, int num_layers) {
  if (num_layers < 1) throw std::invalid_argument("multi-layer graph needs at least one layer");
  return MultiLayerGraph(std::vector<Matrix>(static_cast<std::size_t>(num_layers),
                                             Matrix::Zero(num_nodes, num_nodes)));
}

std::size_t MultiLayerGraph::num_edges(int m) const {
  return static_cast<std::size_t>(layer(m).sum() / 2.0 + 0.5);
}

DegreeTable degrees(const MultiLayerGraph& g) {
  DegreeTable t{Eigen::MatrixXi(g.num_layers(), g.num_nodes())};
  for (int m = 0; m < g.num_layers(); ++m)
    t.degrees.row(m) = g.layer(m).colwise().sum().cast<int>();
  return t;
}

SymMatrix mean_matrix(LayerSpan layers) {
  if (layers.empty()) throw std::invalid_argument("mean of an empty layer stack");
  SymMatrix sum = layers.front();
  for (std::size_t m = 1; m < layers.size(); ++m) {
    if (layers[m].rows() != sum.rows() || layers[m].cols() != sum.cols())
      throw DimensionMismatch("layers differ in shape");
    sum += layers[m];
  }
  return sum / static_cast<double>(layers.size());
}

SymMatrix mean_adjacency(const MultiLayerGraph& g) { return mean_matrix(g.layers()); }

SymMatrix normalized_laplacian(const MultiLayerGraph& g, int m) {
  if (m < 0 || m >= g.num_layers()) throw std::out_of_range("layer index out of range");
  const Matrix& a = g.layer(m);
  Vector inv_sqrt = a.rowwise().sum();
  for (Eigen::Index i = 0; i < inv_sqrt.size(); ++i)
    inv_sqrt(i) = inv_sqrt(i) > 0.0 ? 1.0 / std::sqrt(inv_sqrt(i)) : 0.0;
  return inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
}

MultiLayerGraph read_edge_list(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<long long> fields;
  std::vector<Matrix> layers;
  long long n = 0;
  long long num_layers = 0;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!parse_ints(line, fields)) throw ParseError(lineno, "expected non-negative integers");
    if (fields.empty()) continue;

    if (!have_header) {
      if (fields.size() != 2) throw ParseError(lineno, "header must be \"n M\"");
      n = fields[0];
      num_layers = fields[1];
      if (n < 2) throw ParseError(lineno, "node count must be at least 2");
      if (num_layers < 1) throw ParseError(lineno, "layer count must be at least 1");
      if (n > 100000 || num_layers > 100000) throw ParseError(lineno, "graph too large for dense storage");
      layers.assign(static_cast<std::size_t>(num_layers), Matrix::Zero(n, n));
      have_header = true;
      continue;
    }

    if (fields.size() != 3) throw ParseError(lineno, "edge line must be \"m u v\"");
    const long long m = fields[0], u = fields[1], v = fields[2];
    if (m >= num_layers) throw ParseError(lineno, "layer index " + std::to_string(m) + " >= M");
    if (u >= n || v >= n) throw ParseError(lineno, "node index >= n");
    if (u == v) throw ParseError(lineno, "self-loop on node " + std::to_string(u));
    layers[static_cast<std::size_t>(m)](u, v) = 1.0;
    layers[static_cast<std::size_t>(m)](v, u) = 1.0;
  }
  if (!have_header) throw ParseError(lineno, "missing \"n M\" header");
  return MultiLayerGraph(std::move(layers));
}

MultiLayerGraph parse_edge_list(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_edge_list(in);
}

MultiLayerGraph read_edge_list_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_edge_list(in);
}

void write_edge_list(const MultiLayerGraph& g, std::ostream& out) {
  out << g.num_nodes() << ' ' << g.num_layers() << '\n';
  for (int m = 0; m < g.num_layers(); ++m) {
    const Matrix& a = g.layer(m);
    for (Eigen::Index u = 0; u < a.rows(); ++u)
      for (Eigen::Index v = u + 1; v < a.cols(); ++v)
        if (a(u, v) != 0.0) out << m << ' ' << u << ' ' << v << '\n';
  }
}

void write_edge_list_file(const MultiLayerGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_edge_list(g, out);
}

void write_labels(const Partition& p, std::ostream& out) {
  for (int l : p.labels()) out << l << '\n';
}

Partition read_labels(std::istream& in) {
  std::vector<int> labels;
  std::vector<long long> fields;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!parse_ints(line, fields)) throw ParseError(lineno, "expected a non-negative label");
    if (fields.empty()) continue;
    if (fields.size() != 1) throw ParseError(lineno, "expected one label per line");
    labels.push_back(static_cast<int>(fields[0]));
  }
  return Partition::from_labels(std::move(labels));
}

}  // namespace mlcd
