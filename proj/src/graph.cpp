#include "qrotor/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace qrotor {

RotorGraph::RotorGraph(int n, std::vector<Edge> edges, Eigen::VectorXd h)
    : n_(n), edges_(std::move(edges)), h_(std::move(h)) {
  if (n_ <= 0) throw std::invalid_argument("graph: vertex count must be positive");
  if (h_.size() != n_)
    throw std::invalid_argument("graph: expected " + std::to_string(n_) +
                                " vertex weights, got " + std::to_string(h_.size()));
  for (int i = 0; i < n_; ++i) {
    if (!std::isfinite(h_(i)) || h_(i) < 0.0)
      throw std::invalid_argument("graph: vertex weight h_" + std::to_string(i) +
                                  " must be finite and nonnegative");
  }
  for (Edge& e : edges_) {
    if (e.i < 0 || e.i >= n_ || e.j < 0 || e.j >= n_)
      throw std::invalid_argument("graph: edge endpoint out of range");
    if (e.i == e.j) throw std::invalid_argument("graph: self-loops are not allowed");
    if (!std::isfinite(e.beta))
      throw std::invalid_argument("graph: edge weight must be finite");
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    if (edges_[k - 1].i == edges_[k].i && edges_[k - 1].j == edges_[k].j)
      throw std::invalid_argument("graph: duplicate edge {" + std::to_string(edges_[k].i) +
                                  "," + std::to_string(edges_[k].j) + "}");
  }
}

bool RotorGraph::uniform_vertex_weight(double* h) const {
  for (int i = 1; i < n_; ++i)
    if (h_(i) != h_(0)) return false;
  if (h) *h = h_(0);
  return true;
}

double RotorGraph::total_abs_coupling() const {
  double s = 0.0;
  for (const Edge& e : edges_) s += std::abs(e.beta);
  return s;
}

double RotorGraph::total_coupling() const {
  double s = 0.0;
  for (const Edge& e : edges_) s += e.beta;
  return s;
}

bool RotorGraph::connected() const {
  std::vector<std::vector<int>> adj(n_);
  for (const Edge& e : edges_) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  std::vector<char> seen(n_, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == n_;
}

RotorGraph make_chain(int n, double h, double beta) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, beta});
  return RotorGraph(n, std::move(edges), Eigen::VectorXd::Constant(n, h));
}

RotorGraph make_grid(int rows, int cols, double h, double beta) {
  if (rows <= 0 || cols <= 0)
    throw std::invalid_argument("grid: dimensions must be positive");
  std::vector<Edge> edges;
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.push_back({id(r, c), id(r, c + 1), beta});
      if (r + 1 < rows) edges.push_back({id(r, c), id(r + 1, c), beta});
    }
  }
  int n = rows * cols;
  return RotorGraph(n, std::move(edges), Eigen::VectorXd::Constant(n, h));
}

RotorGraph make_complete(int n, double h, double beta) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j, beta});
  return RotorGraph(n, std::move(edges), Eigen::VectorXd::Constant(n, h));
}

}  // namespace qrotor
