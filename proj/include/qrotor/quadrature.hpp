#pragma once

#include <functional>

#include "qrotor/graph.hpp"

namespace qrotor {

// Brute-force Rayleigh quotient <psi, H psi> / <psi, psi> for tiny systems
// (n <= 3), with psi = exp(logpsi) evaluated on a uniform periodic grid.
// The integrals use the trapezoid rule (spectrally accurate for smooth
// periodic integrands; on this grid it reduces to a plain sum) and the
// Laplacian uses second-order central differences, so the result carries an
// O(delta^2) discretization bias. The grid resolution is a parameter so the
// oracle's own convergence can be demonstrated. The finite-difference kinetic
// form is positive semidefinite, hence the result respects the -4 sum|beta|
// lower bound exactly, not just up to discretization error.
double rayleigh_quotient_quadrature(
    const RotorGraph& g,
    const std::function<double(const Eigen::VectorXd&)>& logpsi,
    int grid_points_per_dim);

}  // namespace qrotor
