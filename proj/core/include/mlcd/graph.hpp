#pragma once

#include "mlcd/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace mlcd {

// Undirected multiplex graph: M binary symmetric layers over n shared nodes,
// no self-loops, no inter-layer edges. Immutable after construction.
class MultiLayerGraph {
 public:
  // Validates every layer (square, same n, symmetric, zero diagonal, {0,1}).
  explicit MultiLayerGraph(std::vector<Matrix> layers);

  static MultiLayerGraph empty(int num_nodes, int num_layers);

  int num_nodes() const noexcept { return static_cast<int>(layers_.front().rows()); }
  int num_layers() const noexcept { return static_cast<int>(layers_.size()); }

  const Matrix& layer(int m) const { return layers_.at(static_cast<std::size_t>(m)); }
  LayerSpan layers() const noexcept { return layers_; }

  std::size_t num_edges(int m) const;

 private:
  std::vector<Matrix> layers_;
};

// degrees(m, i) = row sum of layer m at node i.
struct DegreeTable {
  Eigen::MatrixXi degrees;  // M x n

  int operator()(int m, int i) const { return degrees(m, i); }
};

DegreeTable degrees(const MultiLayerGraph& g);

// (1/M) sum_m A^(m). Works on any layer stack (population tensors included).
SymMatrix mean_matrix(LayerSpan layers);
SymMatrix mean_adjacency(const MultiLayerGraph& g);

// D^{-1/2} A D^{-1/2} for one layer; isolated nodes get zero rows and columns.
SymMatrix normalized_laplacian(const MultiLayerGraph& g, int m);

// Edge-list text format:
//   # comment
//   n M
//   m u v      (0-based, undirected, duplicates ignored)
MultiLayerGraph read_edge_list(std::istream& in);
MultiLayerGraph parse_edge_list(std::string_view text);
MultiLayerGraph read_edge_list_file(const std::filesystem::path& path);

// Writes each undirected edge once (u < v), layers in order.
void write_edge_list(const MultiLayerGraph& g, std::ostream& out);
void write_edge_list_file(const MultiLayerGraph& g, const std::filesystem::path& path);

// Labels file: one integer per line.
void write_labels(const Partition& p, std::ostream& out);
Partition read_labels(std::istream& in);

}  // namespace mlcd
