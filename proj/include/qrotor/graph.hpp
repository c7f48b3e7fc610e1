#pragma once

#include <vector>

#include <Eigen/Core>

namespace qrotor {

// Undirected interaction edge {i, j} with coupling weight beta.
struct Edge {
  int i = 0;
  int j = 0;
  double beta = 0.0;
};

// Interaction graph for a rotor network: n vertices carrying kinetic weights
// h_i >= 0 and a set of weighted edges. Construction canonicalizes every edge
// to i < j and sorts the edge list lexicographically, so iteration order (and
// everything downstream of it) is deterministic. Immutable after construction.
class RotorGraph {
 public:
  RotorGraph(int n, std::vector<Edge> edges, Eigen::VectorXd h);

  int num_vertices() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Eigen::VectorXd& vertex_weights() const { return h_; }
  double vertex_weight(int i) const { return h_(i); }

  // True when every h_i equals a common value, which is then stored in *h.
  bool uniform_vertex_weight(double* h = nullptr) const;

  // Sum of |beta| over edges and plain sum of beta over edges.
  double total_abs_coupling() const;
  double total_coupling() const;

  bool connected() const;

 private:
  int n_;
  std::vector<Edge> edges_;
  Eigen::VectorXd h_;
};

// Generators for the benchmark families, with uniform h and beta.
RotorGraph make_chain(int n, double h, double beta);
RotorGraph make_grid(int rows, int cols, double h, double beta);
RotorGraph make_complete(int n, double h, double beta);

}  // namespace qrotor
