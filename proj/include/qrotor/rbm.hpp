#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

#include <Eigen/Core>

#include "qrotor/bessel.hpp"
#include "qrotor/circle.hpp"
#include "qrotor/random.hpp"

// Rotor restricted Boltzmann machine with planar (d=1) units. Visible rotors
// enter through their embeddings x_j = (cos theta_j, sin theta_j); the hidden
// units have been integrated out analytically, leaving
//
//   log psi(theta) = sum_j <c_j, x_j> + sum_i log[2 pi I_0(r_i)],
//
// with pre-activations y_i = sum_j a_ij x_j + b_i and r_i = |y_i|. All
// parameters are real; log psi is invariant under a simultaneous O(2)
// rotation/reflection of every x_j when b = c = 0.

namespace qrotor {

template <typename Scalar>
struct RbmParams {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix a;  // m x n hidden-visible couplings
  Matrix b;  // m x 2 hidden biases
  Matrix c;  // n x 2 visible biases

  Eigen::Index hidden_count() const { return a.rows(); }
  Eigen::Index visible_count() const { return a.cols(); }
  Eigen::Index parameter_count() const { return a.size() + b.size() + c.size(); }

  bool all_finite() const {
    return a.allFinite() && b.allFinite() && c.allFinite();
  }
};

template <typename Scalar>
RbmParams<Scalar> zero_params(Eigen::Index m, Eigen::Index n) {
  RbmParams<Scalar> p;
  p.a.setZero(m, n);
  p.b.setZero(m, 2);
  p.c.setZero(n, 2);
  return p;
}

// Independent Gaussian entries; stddev 0.01 keeps the initial state near the
// uniform wavefunction, whose energy is known in closed form.
template <typename Scalar>
RbmParams<Scalar> random_params(Eigen::Index m, Eigen::Index n, Scalar stddev,
                                std::mt19937_64& rng) {
  Gaussian gauss;
  RbmParams<Scalar> p = zero_params<Scalar>(m, n);
  auto fill = [&](typename RbmParams<Scalar>::Matrix& mat) {
    for (Eigen::Index r = 0; r < mat.rows(); ++r)
      for (Eigen::Index col = 0; col < mat.cols(); ++col)
        mat(r, col) = stddev * Scalar(gauss(rng));
  };
  fill(p.a);
  fill(p.b);
  fill(p.c);
  return p;
}

// Flat parameter order: a row-major, then b row-major, then c row-major;
// total length P = mn + 2m + 2n. This layout is the on-disk checkpoint
// format and the coordinate system of every gradient vector.
template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> flatten(const RbmParams<Scalar>& p) {
  Eigen::Vector<Scalar, Eigen::Dynamic> v(p.parameter_count());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < p.a.rows(); ++i)
    for (Eigen::Index j = 0; j < p.a.cols(); ++j) v(k++) = p.a(i, j);
  for (Eigen::Index i = 0; i < p.b.rows(); ++i)
    for (Eigen::Index d = 0; d < 2; ++d) v(k++) = p.b(i, d);
  for (Eigen::Index j = 0; j < p.c.rows(); ++j)
    for (Eigen::Index d = 0; d < 2; ++d) v(k++) = p.c(j, d);
  return v;
}

template <typename Scalar>
RbmParams<Scalar> unflatten(const Eigen::Vector<Scalar, Eigen::Dynamic>& v,
                            Eigen::Index m, Eigen::Index n) {
  if (v.size() != m * n + 2 * m + 2 * n)
    throw std::invalid_argument("unflatten: parameter vector has wrong length");
  RbmParams<Scalar> p = zero_params<Scalar>(m, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) p.a(i, j) = v(k++);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index d = 0; d < 2; ++d) p.b(i, d) = v(k++);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index d = 0; d < 2; ++d) p.c(j, d) = v(k++);
  return p;
}

// Sampling cache: the embeddings plus everything that depends on them.
// Kept consistent incrementally by update_rotor; r_i always equals |y_i| up
// to accumulated roundoff (rebuild drift < 1e-10 over 1000 updates).
template <typename Scalar>
struct RbmCache {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix x;                                  // n x 2 unit rows (cos, sin)
  Matrix y;                                  // m x 2 pre-activations
  Eigen::Vector<Scalar, Eigen::Dynamic> r;   // m norms |y_i|
};

template <typename Scalar>
RbmCache<Scalar> build_cache(const RbmParams<Scalar>& p,
                             const Eigen::Vector<Scalar, Eigen::Dynamic>& theta) {
  if (theta.size() != p.visible_count())
    throw std::invalid_argument("build_cache: angle count does not match model");
  RbmCache<Scalar> cache;
  cache.x.resize(p.visible_count(), 2);
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    cache.x(j, 0) = std::cos(theta(j));
    cache.x(j, 1) = std::sin(theta(j));
  }
  cache.y.noalias() = p.a * cache.x;
  cache.y += p.b;
  cache.r = cache.y.rowwise().norm();
  return cache;
}

// O(m) move of rotor j to a new angle: y_i += a_ij (x'_j - x_j), r_i = |y_i|.
// Written as an explicit row loop so the sampler's proposal evaluation can
// reproduce the exact same arithmetic.
template <typename Scalar>
void update_rotor(const RbmParams<Scalar>& p, RbmCache<Scalar>& cache, int j,
                  Scalar theta_new) {
  if (j < 0 || j >= cache.x.rows())
    throw std::out_of_range("update_rotor: rotor index out of range");
  const Scalar xn0 = std::cos(theta_new), xn1 = std::sin(theta_new);
  const Scalar d0 = xn0 - cache.x(j, 0), d1 = xn1 - cache.x(j, 1);
  for (Eigen::Index i = 0; i < cache.y.rows(); ++i) {
    const Scalar aij = p.a(i, j);
    const Scalar y0 = cache.y(i, 0) + aij * d0;
    const Scalar y1 = cache.y(i, 1) + aij * d1;
    cache.y(i, 0) = y0;
    cache.y(i, 1) = y1;
    cache.r(i) = std::sqrt(y0 * y0 + y1 * y1);
  }
  cache.x(j, 0) = xn0;
  cache.x(j, 1) = xn1;
}

template <typename Scalar>
Scalar log_psi(const RbmParams<Scalar>& p, const RbmCache<Scalar>& cache) {
  if (!p.all_finite())
    throw std::invalid_argument("log_psi: non-finite parameter");
  Scalar s = p.c.cwiseProduct(cache.x).sum();
  for (Eigen::Index i = 0; i < cache.r.size(); ++i)
    s += bessel::log_i0(cache.r(i));
  return s + Scalar(cache.r.size()) * std::log(Scalar(two_pi));
}

// d log psi / d p in flat order:
//   d/da_ij = (g(r_i)/r_i) <y_i, x_j>,  d/db_i = (g(r_i)/r_i) y_i,
//   d/dc_j  = x_j,
// with g = I_1/I_0; the g(r)/r limit 1/2 makes the a and b rows vanish
// smoothly as y_i -> 0.
template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> param_gradient(const RbmParams<Scalar>& p,
                                                     const RbmCache<Scalar>& cache) {
  using Matrix = typename RbmParams<Scalar>::Matrix;
  const Eigen::Index m = p.hidden_count(), n = p.visible_count();
  Eigen::Vector<Scalar, Eigen::Dynamic> w(m);
  for (Eigen::Index i = 0; i < m; ++i) w(i) = bessel::ratio_over_x(cache.r(i));
  Matrix wy = w.asDiagonal() * cache.y;                  // m x 2
  Matrix ga = wy * cache.x.transpose();                  // m x n
  Eigen::Vector<Scalar, Eigen::Dynamic> grad(p.parameter_count());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) grad(k++) = ga(i, j);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index d = 0; d < 2; ++d) grad(k++) = wy(i, d);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index d = 0; d < 2; ++d) grad(k++) = cache.x(j, d);
  return grad;
}

// First and second partials of log psi in each angle. With the tangent
// t_j = (-sin theta_j, cos theta_j) and unit vector yhat_i = y_i / r_i:
//
//   first_j  = <c_j, t_j> + sum_i g(r_i) a_ij <yhat_i, t_j>
//   second_j = -<c_j, x_j> + sum_i [ g'(r_i) a_ij^2 <yhat_i, t_j>^2
//              + g(r_i) ( a_ij^2 (1 - <yhat_i, t_j>^2) / r_i
//                         - a_ij <yhat_i, x_j> ) ]
//
// computed through the smooth combinations g(r)/r and g'(r), whose r -> 0
// limits are both 1/2; <yhat, t> is taken as 0 below the same threshold,
// where its coefficient g' - g/r vanishes anyway.
template <typename Scalar>
std::pair<Eigen::Vector<Scalar, Eigen::Dynamic>, Eigen::Vector<Scalar, Eigen::Dynamic>>
angle_derivatives(const RbmParams<Scalar>& p, const RbmCache<Scalar>& cache) {
  using Matrix = typename RbmParams<Scalar>::Matrix;
  using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;
  const Eigen::Index m = p.hidden_count(), n = p.visible_count();

  Matrix t(n, 2);  // tangent rows
  t.col(0) = -cache.x.col(1);
  t.col(1) = cache.x.col(0);

  Vector w(m), gp(m), inv_r(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    w(i) = bessel::ratio_over_x(cache.r(i));
    gp(i) = bessel::ratio_prime(cache.r(i));
    inv_r(i) = cache.r(i) < Scalar(1e-8) ? Scalar(0) : Scalar(1) / cache.r(i);
  }

  Matrix yt = cache.y * t.transpose();       // m x n, <y_i, t_j>
  Matrix yx = cache.y * cache.x.transpose(); // m x n, <y_i, x_j>
  Matrix v = inv_r.asDiagonal() * yt;        // <yhat_i, t_j>, 0 at r ~ 0

  Vector first(n), second(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    first(j) = p.c(j, 0) * t(j, 0) + p.c(j, 1) * t(j, 1);
    second(j) = -(p.c(j, 0) * cache.x(j, 0) + p.c(j, 1) * cache.x(j, 1));
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Scalar aij = p.a(i, j);
      const Scalar vij = v(i, j);
      first(j) += w(i) * aij * yt(i, j);
      second(j) += gp(i) * aij * aij * vij * vij +
                   w(i) * (aij * aij * (Scalar(1) - vij * vij) - aij * yx(i, j));
    }
  }
  return {std::move(first), std::move(second)};
}

}  // namespace qrotor
