#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

#include "qrotor/bessel.hpp"

// Jastrow baseline on chain graphs. The trial state is a product of
// normalized per-edge factors exp(w_i cos(theta_i - theta_{i+1})), whose
// energy has the closed form
//
//   E = sum_i [ 2 beta_i + g(2 w_i) (h/2 w_i - 2 beta_i) ],   g = I_1/I_0.
//
// Each term depends only on its own weight, so the energy is additive over
// edges and the uniform-weight optimum is found edge by edge. Serves as an
// analytic variational upper bound on the chain ground energy.

namespace qrotor {

struct JastrowChain {
  int n = 0;              // rotor count, >= 2
  double h = 0.0;         // common vertex weight, > 0
  Eigen::VectorXd beta;   // n-1 edge couplings
  Eigen::VectorXd w;      // n-1 variational weights
};

inline double jastrow_edge_energy(double h, double beta, double w) {
  return 2.0 * beta + bessel::ratio(2.0 * w) * (0.5 * h * w - 2.0 * beta);
}

inline double jastrow_energy(const JastrowChain& jc) {
  if (jc.n < 2) throw std::invalid_argument("jastrow: need at least 2 rotors");
  if (!(jc.h > 0.0)) throw std::invalid_argument("jastrow: h must be positive");
  if (jc.beta.size() != jc.n - 1 || jc.w.size() != jc.n - 1)
    throw std::invalid_argument("jastrow: expected n-1 edge weights");
  double e = 0.0;
  for (int i = 0; i < jc.n - 1; ++i)
    e += jastrow_edge_energy(jc.h, jc.beta(i), jc.w(i));
  return e;
}

struct JastrowOptimum {
  double w_star = 0.0;
  double energy_per_edge = 0.0;
};

// Minimize the single-edge energy over w >= 0 by golden-section search on
// [0, 8 beta/h + 4], refined until the bracket is shorter than 1e-10. The
// objective is smooth and coercive there, and golden section avoids
// differentiating the Bessel ratio near zero.
inline JastrowOptimum optimize_uniform_weight(double h, double beta) {
  if (!(h > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("optimize_uniform_weight: need h > 0 and beta > 0");
  const auto objective = [h, beta](double w) { return jastrow_edge_energy(h, beta, w); };
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 8.0 * beta / h + 4.0;
  double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  while (b - a > 1e-10) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = objective(x2);
    }
  }
  const double w = 0.5 * (a + b);
  return {w, objective(w)};
}

}  // namespace qrotor
