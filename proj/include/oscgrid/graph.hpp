#pragma once

#include <utility>
#include <vector>

#include "oscgrid/linalg.hpp"

namespace oscgrid {

// Undirected weighted edge between 0-based node indices.
struct Edge {
  Index a = 0;
  Index b = 0;
  double weight = 1.0;
};

struct Neighbor {
  Index node;
  double weight;
};

/// Simple, connected, undirected graph with strictly positive edge weights.
///
/// Construction validates every invariant and throws InputError otherwise, so a
/// Graph value is always usable by the Laplacian and controller code.
class Graph {
 public:
  Graph(Index n_nodes, std::vector<Edge> edges);

  Index n_nodes() const { return n_nodes_; }
  Index n_edges() const { return static_cast<Index>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Neighbor>& neighbors(Index k) const { return adjacency_[static_cast<std::size_t>(k)]; }

  // Zero when (j, k) is not an edge.
  double weight(Index j, Index k) const;

 private:
  Index n_nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

// Oriented incidence matrix (n_nodes x n_edges). Column l is +1 at the smaller
// node index of edge l (the sink) and -1 at the larger one.
Mat incidence_matrix(const Graph& graph);

// L = B diag(w) B^T.
Mat laplacian(const Graph& graph);

// Second-smallest eigenvalue of a symmetric Laplacian. Eigenvalues below
// 1e-9 times the largest are treated as zero; more than one zero eigenvalue
// means the graph is disconnected and raises InputError.
double algebraic_connectivity(const Mat& laplacian);

// L (x) I2.
Mat extend(const Mat& laplacian);

inline constexpr double kZeroEigenvalueTolerance = 1e-9;

}  // namespace oscgrid
