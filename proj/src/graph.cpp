#include "oscgrid/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "oscgrid/errors.hpp"

namespace oscgrid {

Graph::Graph(Index n_nodes, std::vector<Edge> edges) : n_nodes_(n_nodes), edges_(std::move(edges)) {
  if (n_nodes_ < 1) throw InputError("graph needs at least one node");

  std::set<std::pair<Index, Index>> seen;
  adjacency_.resize(static_cast<std::size_t>(n_nodes_));
  for (const auto& e : edges_) {
    if (e.a < 0 || e.b < 0 || e.a >= n_nodes_ || e.b >= n_nodes_) {
      throw InputError("edge (" + std::to_string(e.a + 1) + ", " + std::to_string(e.b + 1) +
                       ") references a node outside 1.." + std::to_string(n_nodes_));
    }
    if (e.a == e.b) throw InputError("self-loop at node " + std::to_string(e.a + 1));
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw InputError("edge (" + std::to_string(e.a + 1) + ", " + std::to_string(e.b + 1) +
                       ") has non-positive weight");
    }
    if (!seen.insert(std::minmax(e.a, e.b)).second) {
      throw InputError("duplicate edge (" + std::to_string(e.a + 1) + ", " + std::to_string(e.b + 1) + ")");
    }
    adjacency_[static_cast<std::size_t>(e.a)].push_back({e.b, e.weight});
    adjacency_[static_cast<std::size_t>(e.b)].push_back({e.a, e.weight});
  }

  std::vector<bool> visited(static_cast<std::size_t>(n_nodes_), false);
  std::vector<Index> stack{0};
  visited[0] = true;
  Index reached = 1;
  while (!stack.empty()) {
    const Index k = stack.back();
    stack.pop_back();
    for (const auto& nb : adjacency_[static_cast<std::size_t>(k)]) {
      if (!visited[static_cast<std::size_t>(nb.node)]) {
        visited[static_cast<std::size_t>(nb.node)] = true;
        ++reached;
        stack.push_back(nb.node);
      }
    }
  }
  if (reached != n_nodes_) throw InputError("disconnected graph");
}

double Graph::weight(Index j, Index k) const {
  for (const auto& nb : adjacency_[static_cast<std::size_t>(k)]) {
    if (nb.node == j) return nb.weight;
  }
  return 0.0;
}

Mat incidence_matrix(const Graph& graph) {
  Mat b = Mat::Zero(graph.n_nodes(), graph.n_edges());
  for (Index l = 0; l < graph.n_edges(); ++l) {
    const auto& e = graph.edges()[static_cast<std::size_t>(l)];
    b(std::min(e.a, e.b), l) = 1.0;
    b(std::max(e.a, e.b), l) = -1.0;
  }
  return b;
}

Mat laplacian(const Graph& graph) {
  const Mat b = incidence_matrix(graph);
  Vec w(graph.n_edges());
  for (Index l = 0; l < graph.n_edges(); ++l) w(l) = graph.edges()[static_cast<std::size_t>(l)].weight;
  return b * w.asDiagonal() * b.transpose();
}

double algebraic_connectivity(const Mat& laplacian) {
  if (laplacian.rows() != laplacian.cols()) throw InputError("Laplacian must be square");
  if (laplacian.rows() < 2) throw InputError("algebraic connectivity needs at least two nodes");

  Eigen::SelfAdjointEigenSolver<Mat> solver(laplacian, Eigen::EigenvaluesOnly);
  const Vec& eig = solver.eigenvalues();
  const double largest = std::abs(eig(eig.size() - 1));
  const double zero_tol = kZeroEigenvalueTolerance * largest;
  Index zeros = 0;
  for (Index i = 0; i < eig.size(); ++i) {
    if (std::abs(eig(i)) <= zero_tol) ++zeros;
  }
  if (zeros > 1 || largest == 0.0) throw InputError("disconnected graph");
  return eig(1);
}

Mat extend(const Mat& laplacian) { return kron_i2(laplacian); }

}  // namespace oscgrid
