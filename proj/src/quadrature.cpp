#include "qrotor/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qrotor/circle.hpp"
#include "qrotor/hamiltonian.hpp"

namespace qrotor {

double rayleigh_quotient_quadrature(
    const RotorGraph& g,
    const std::function<double(const Eigen::VectorXd&)>& logpsi,
    int grid_points_per_dim) {
  const int n = g.num_vertices();
  const int q = grid_points_per_dim;
  if (n > 3)
    throw std::invalid_argument("quadrature: limited to n <= 3 (memory guard)");
  if (q < 8) throw std::invalid_argument("quadrature: need at least 8 grid points");

  long long size = 1;
  for (int k = 0; k < n; ++k) size *= q;
  std::vector<long long> stride(n);
  for (int k = 0; k < n; ++k) {
    stride[k] = 1;
    for (int l = k + 1; l < n; ++l) stride[k] *= q;
  }
  const double delta = two_pi / q;

  // log psi over the grid, then a max shift so exp never overflows; the
  // Rayleigh quotient is scale invariant.
  Eigen::VectorXd lp(size);
  Eigen::VectorXd theta(n);
  for (long long f = 0; f < size; ++f) {
    for (int k = 0; k < n; ++k)
      theta(k) = -pi + delta * static_cast<double>((f / stride[k]) % q);
    const double v = logpsi(theta);
    if (!std::isfinite(v))
      throw std::invalid_argument("quadrature: logpsi is not finite on the grid");
    lp(f) = v;
  }
  const double shift = lp.maxCoeff();
  Eigen::VectorXd psi = (lp.array() - shift).exp();

  double num = 0.0, den = 0.0;
  for (long long f = 0; f < size; ++f) {
    const double pf = psi(f);
    den += pf * pf;
    double kin = 0.0;
    for (int k = 0; k < n; ++k) {
      const long long d = (f / stride[k]) % q;
      const long long up = d + 1 == q ? f - (q - 1) * stride[k] : f + stride[k];
      const long long dn = d == 0 ? f + (q - 1) * stride[k] : f - stride[k];
      kin += 0.5 * g.vertex_weight(k) * (2.0 * pf - psi(up) - psi(dn));
    }
    for (int k = 0; k < n; ++k)
      theta(k) = -pi + delta * static_cast<double>((f / stride[k]) % q);
    num += pf * kin / (delta * delta) + potential_energy(g, theta) * pf * pf;
  }
  return num / den;
}

}  // namespace qrotor
