#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "qrotor/graph.hpp"
#include "qrotor/hamiltonian.hpp"
#include "qrotor/random.hpp"

// Frequency-space ground-state solver. The eigenvalue problem is posed on
// Fourier coefficients psi_hat(omega), omega in Z^n, hard-truncated to the
// hypercube |omega_k| <= omega_max (reads outside the cube are zero):
//
//   (H psi_hat)(omega) = h/2 |omega|^2 psi_hat(omega)
//     + sum_{ij in E} beta_ij [2 psi_hat(omega) - psi_hat(omega + e_i - e_j)
//                                              - psi_hat(omega - e_i + e_j)]
//
// The operator is applied matrix-free on a flat row-major tensor; each edge
// touches neighbors at flat offset +-(stride_i - stride_j), visited as
// contiguous runs so boundary handling costs no per-entry branching.
// Coefficients are kept real: H is real symmetric, so the ground state can be
// chosen real (and for beta >= 0 strictly positive at omega = 0).

namespace qrotor {

inline long long fourier_size(int n, int omega_max) {
  long long size = 1;
  for (int k = 0; k < n; ++k) size *= 2 * omega_max + 1;
  return size;
}

template <typename Scalar>
struct FourierState {
  int n = 0;
  int omega_max = 0;
  // length (2 omega_max + 1)^n, row-major, axis index omega_k + omega_max
  Eigen::Vector<Scalar, Eigen::Dynamic> coeffs;
};

template <typename Scalar>
FourierState<Scalar> make_fourier_state(int n, int omega_max) {
  FourierState<Scalar> s;
  s.n = n;
  s.omega_max = omega_max;
  s.coeffs.setZero(fourier_size(n, omega_max));
  return s;
}

// Flat index of a frequency vector (array of n entries in [-omega_max, omega_max]).
template <typename Scalar>
long long fourier_flat_index(const FourierState<Scalar>& s, const std::vector<int>& omega) {
  long long f = 0;
  for (int k = 0; k < s.n; ++k) f = f * (2 * s.omega_max + 1) + (omega[k] + s.omega_max);
  return f;
}

template <typename Scalar>
class FourierOperator {
 public:
  using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;

  FourierOperator(const RotorGraph& g, int omega_max)
      : n_(g.num_vertices()), omega_max_(omega_max), edges_(g.edges()) {
    if (omega_max_ < 1)
      throw std::invalid_argument("fourier: omega_max must be >= 1");
    double h = 0.0;
    if (!g.uniform_vertex_weight(&h))
      throw std::invalid_argument(
          "fourier: the spectral solver requires a uniform vertex weight h; "
          "got non-uniform weights");
    h_ = Scalar(h);
    k_ = 2 * omega_max_ + 1;
    size_ = fourier_size(n_, omega_max_);
    strides_.resize(n_);
    for (int k = 0; k < n_; ++k) {
      strides_[k] = 1;
      for (int l = k + 1; l < n_; ++l) strides_[k] *= k_;
    }
    const Scalar two_beta = Scalar(2) * Scalar(g.total_coupling());
    diag_.resize(size_);
    for (long long f = 0; f < size_; ++f) {
      long long norm2 = 0;
      for (int k = 0; k < n_; ++k) {
        const long long w = (f / strides_[k]) % k_ - omega_max_;
        norm2 += w * w;
      }
      diag_(f) = h_ / Scalar(2) * Scalar(norm2) + two_beta;
    }
  }

  int n() const { return n_; }
  int omega_max() const { return omega_max_; }
  long long size() const { return size_; }
  Scalar vertex_weight() const { return h_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<long long>& strides() const { return strides_; }
  const Vector& diagonal() const { return diag_; }

  // out = H in; out must be a distinct vector of the right length.
  void apply(const Vector& in, Vector& out) const {
    if (in.size() != size_)
      throw std::invalid_argument("fourier apply: wrong coefficient count");
    out.resize(size_);
    out.array() = diag_.array() * in.array();
    for (const Edge& e : edges_) apply_edge(in, out, e);
  }

 private:
  // Couples every in-cube pair (omega, omega + e_i - e_j) with weight -beta,
  // both directions at once. With axes i < j, valid source indices have
  // digit_i <= K-2 and digit_j >= 1; for each assignment of the axes before j
  // those sources form one contiguous run of length (K-1) stride_j.
  void apply_edge(const Vector& in, Vector& out, const Edge& e) const {
    const long long sj = strides_[e.j];
    const long long d = strides_[e.i] - sj;
    const long long span = (k_ - 1) * sj;
    const Scalar beta = Scalar(e.beta);
    std::vector<int> digit(e.j, 0);
    while (true) {
      long long base = 0;
      for (int k = 0; k < e.j; ++k) base += static_cast<long long>(digit[k]) * strides_[k];
      const long long lo = base + sj;
      for (long long f = lo; f < lo + span; ++f) {
        out(f) -= beta * in(f + d);
        out(f + d) -= beta * in(f);
      }
      int k = e.j - 1;
      for (; k >= 0; --k) {
        const int cap = k == e.i ? k_ - 1 : k_;
        if (++digit[k] < cap) break;
        digit[k] = 0;
      }
      if (k < 0) break;
    }
  }

  int n_;
  int omega_max_;
  std::vector<Edge> edges_;
  Scalar h_ = 0;
  int k_ = 0;
  long long size_ = 0;
  std::vector<long long> strides_;
  Vector diag_;
};

// Diagonal preconditioner M(omega) = (h/2 |omega|^2 + sum 2 beta - mu)^{1/2}.
// For beta >= 0 and mu = -4 sum|beta| the square is always positive; for
// mixed-sign beta it may not be, in which case `positive` is false and the
// CG solve falls back to the unpreconditioned operator.
template <typename Scalar>
struct FourierPreconditioner {
  Eigen::Vector<Scalar, Eigen::Dynamic> inv_m;  // 1 / M(omega)
  bool positive = false;
};

template <typename Scalar>
FourierPreconditioner<Scalar> build_preconditioner(const FourierOperator<Scalar>& op,
                                                   Scalar mu) {
  FourierPreconditioner<Scalar> pre;
  if (op.diagonal().minCoeff() - mu <= Scalar(0)) return pre;
  pre.inv_m = (op.diagonal().array() - mu).rsqrt();
  pre.positive = true;
  return pre;
}

// Divide each coefficient by M(omega). Applying it twice divides by the full
// diagonal h/2 |omega|^2 + sum 2 beta - mu.
template <typename Scalar>
void apply_preconditioner_inverse(const FourierOperator<Scalar>& op, Scalar mu,
                                  FourierState<Scalar>& psi) {
  const FourierPreconditioner<Scalar> pre = build_preconditioner(op, mu);
  if (!pre.positive)
    throw std::domain_error("preconditioner: nonpositive diagonal entry");
  psi.coeffs.array() *= pre.inv_m.array();
}

struct EigSettings {
  double tau_cg = 1e-10;   // CG relative-residual tolerance
  double tau_inv = 1e-12;  // eigenvalue-change stopping tolerance
  int max_inv_iters = 1000;
  int max_cg_iters = 10000;
  std::uint64_t seed = 1;
};

template <typename Scalar>
struct CgResult {
  Eigen::Vector<Scalar, Eigen::Dynamic> x;
  int iterations = 0;
  Scalar rel_residual = 0;
  bool converged = false;
  bool preconditioned = false;
};

// Preconditioned CG for (H - mu I) x = rhs, requiring mu < lambda_min so the
// operator is positive definite. Convergence is declared on the true relative
// residual |(H - mu I) x - rhs| / |rhs| <= tau_cg.
template <typename Scalar>
CgResult<Scalar> cg_solve(const FourierOperator<Scalar>& op, Scalar mu,
                          const Eigen::Vector<Scalar, Eigen::Dynamic>& rhs,
                          const EigSettings& settings) {
  using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;
  if (!rhs.allFinite()) throw std::invalid_argument("cg_solve: rhs is not finite");
  const FourierPreconditioner<Scalar> pre = build_preconditioner(op, mu);

  CgResult<Scalar> res;
  res.preconditioned = pre.positive;
  res.x.setZero(rhs.size());
  const Scalar bnorm = rhs.norm();
  if (bnorm == Scalar(0)) {
    res.converged = true;
    return res;
  }
  Vector r = rhs;
  // z = M^{-1} (M^{-1} r): two half-applications of the split preconditioner
  Vector z = pre.positive
                 ? (r.array() * pre.inv_m.array() * pre.inv_m.array()).matrix().eval()
                 : r;
  Vector p = z;
  Vector q(rhs.size());
  Scalar rz = r.dot(z);
  while (res.iterations < settings.max_cg_iters) {
    op.apply(p, q);
    q -= mu * p;
    const Scalar alpha = rz / p.dot(q);
    res.x += alpha * p;
    r -= alpha * q;
    ++res.iterations;
    res.rel_residual = r.norm() / bnorm;
    if (res.rel_residual <= Scalar(settings.tau_cg)) {
      res.converged = true;
      break;
    }
    if (pre.positive)
      z = (r.array() * pre.inv_m.array() * pre.inv_m.array()).matrix();
    else
      z = r;
    const Scalar rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return res;
}

template <typename Scalar>
struct EigResult {
  Scalar lambda_min = 0;
  FourierState<Scalar> ground_state;
  int inv_iters = 0;
  std::vector<int> cg_iters_per_inv;
  std::vector<Scalar> cg_residuals;
  std::vector<Scalar> lambda_history;  // lambda_history[0] is the seed state's
  std::vector<double> iter_wall_ms;
  bool converged = false;
  bool preconditioned = true;
  bool degenerate = false;  // disconnected graph: eigenspace is degenerate
};

// Inverse power iteration with the -4 sum|beta| shift: repeatedly solve
// (H - mu I) phi = psi by CG, normalize, and track the Rayleigh quotient
// lambda = psi . H psi until successive values differ by less than tau_inv.
// For an edgeless graph mu = 0 coincides with the ground energy, making
// H - mu I singular; the shift is lowered by h/2 (or 1 if h = 0) there, which
// changes nothing reported since lambda comes from the Rayleigh quotient.
template <typename Scalar>
EigResult<Scalar> inverse_power_iteration(const RotorGraph& g, int omega_max,
                                          const EigSettings& settings) {
  using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;
  FourierOperator<Scalar> op(g, omega_max);

  EigResult<Scalar> res;
  res.degenerate = !g.connected();
  Scalar mu = Scalar(eigenvalue_lower_bound(g));
  if (g.num_edges() == 0)
    mu -= op.vertex_weight() > Scalar(0) ? op.vertex_weight() / Scalar(2) : Scalar(1);

  // Seeded random start, drawn shell by shell in ||omega||_inf with a fixed
  // lexicographic order inside each shell. Refining omega_max then extends the
  // start instead of reshuffling it, so the slow-mode content -- and with it
  // the iteration count -- does not depend on the truncation.
  std::mt19937_64 rng(settings.seed);
  Gaussian gauss;
  Vector psi(op.size());
  {
    std::vector<int> w(op.n());
    for (int shell = 0; shell <= omega_max; ++shell) {
      for (int k = 0; k < op.n(); ++k) w[k] = -shell;
      while (true) {
        int norm_inf = 0;
        for (int k = 0; k < op.n(); ++k) norm_inf = std::max(norm_inf, std::abs(w[k]));
        if (norm_inf == shell) {
          long long f = 0;
          for (int k = 0; k < op.n(); ++k) f += (w[k] + omega_max) * op.strides()[k];
          psi(f) = Scalar(gauss(rng));
        }
        int k = op.n() - 1;
        for (; k >= 0; --k) {
          if (++w[k] <= shell) break;
          w[k] = -shell;
        }
        if (k < 0) break;
      }
    }
  }
  psi /= psi.norm();

  Vector hpsi(op.size());
  op.apply(psi, hpsi);
  Scalar lambda = psi.dot(hpsi);
  res.lambda_history.push_back(lambda);

  while (res.inv_iters < settings.max_inv_iters) {
    const auto t0 = std::chrono::steady_clock::now();
    CgResult<Scalar> cg = cg_solve(op, mu, psi, settings);
    res.preconditioned = res.preconditioned && cg.preconditioned;
    psi = cg.x / cg.x.norm();
    op.apply(psi, hpsi);
    const Scalar lambda_new = psi.dot(hpsi);
    ++res.inv_iters;
    res.cg_iters_per_inv.push_back(cg.iterations);
    res.cg_residuals.push_back(cg.rel_residual);
    res.lambda_history.push_back(lambda_new);
    res.iter_wall_ms.push_back(std::chrono::duration<double, std::milli>(
                                   std::chrono::steady_clock::now() - t0)
                                   .count());
    const bool done = std::abs(lambda_new - lambda) < Scalar(settings.tau_inv);
    lambda = lambda_new;
    if (done) {
      res.converged = true;
      break;
    }
  }
  res.lambda_min = lambda;
  res.ground_state.n = op.n();
  res.ground_state.omega_max = omega_max;
  res.ground_state.coeffs = std::move(psi);
  return res;
}

}  // namespace qrotor
