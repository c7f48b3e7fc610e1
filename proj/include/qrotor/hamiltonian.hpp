#pragma once

#include <cmath>
#include <stdexcept>

#include "qrotor/circle.hpp"
#include "qrotor/graph.hpp"

namespace qrotor {

// A rotor configuration is a vector of n angles, kept in [-pi, pi).
using RotorConfig = Eigen::VectorXd;

inline void wrap_config(RotorConfig& theta) {
  for (Eigen::Index j = 0; j < theta.size(); ++j) theta(j) = wrap_angle(theta(j));
}

// Interaction energy sum_{ij in E} beta_ij (2 - 2 cos(theta_i - theta_j)).
// Nonnegative whenever all beta >= 0, with maximum 4 sum beta at antiparallel
// neighbors; invariant under a global rotation of all angles.
inline double potential_energy(const RotorGraph& g, const RotorConfig& theta) {
  if (theta.size() != g.num_vertices())
    throw std::invalid_argument("potential_energy: config/graph size mismatch");
  double v = 0.0;
  for (const Edge& e : g.edges())
    v += e.beta * (2.0 - 2.0 * std::cos(theta(e.i) - theta(e.j)));
  return v;
}

// mu = -4 sum |beta_ij|: every Rayleigh quotient of the Hamiltonian is >= mu,
// so H - mu I is positive semidefinite. Used as the inverse-iteration shift.
inline double eigenvalue_lower_bound(const RotorGraph& g) {
  return -4.0 * g.total_abs_coupling();
}

}  // namespace qrotor
