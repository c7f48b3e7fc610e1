#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "qrotor/fourier.hpp"
#include "qrotor/jastrow.hpp"
#include "qrotor/quadrature.hpp"

using namespace qrotor;

namespace {

JastrowChain uniform_chain(int n, double h, double beta, double w) {
  JastrowChain jc;
  jc.n = n;
  jc.h = h;
  jc.beta = Eigen::VectorXd::Constant(n - 1, beta);
  jc.w = Eigen::VectorXd::Constant(n - 1, w);
  return jc;
}

}  // namespace

TEST_CASE("zero weights give the uniform-state energy") {
  CHECK(jastrow_energy(uniform_chain(2, 5.0, 1.0, 0.0)) == 2.0);
  JastrowChain jc = uniform_chain(4, 5.0, 1.0, 0.0);
  jc.beta << 1.0, 0.5, 2.0;
  CHECK(jastrow_energy(jc) == doctest::Approx(7.0).epsilon(1e-15));
}

TEST_CASE("optimal uniform weight for the benchmark edge") {
  const JastrowOptimum opt = optimize_uniform_weight(5.0, 1.0);
  CHECK(std::abs(opt.energy_per_edge - 1.62718) < 1e-4);
  CHECK(std::abs(opt.w_star - 0.37339) < 1e-4);
  // regression pins at solver precision
  CHECK(std::abs(opt.w_star - 0.37338786113840505) < 1e-9);
  CHECK(std::abs(opt.energy_per_edge - 1.6271761798600228) < 1e-12);
  // the n-rotor optimal chain energy is (n-1) times the per-edge optimum
  CHECK(jastrow_energy(uniform_chain(5, 5.0, 1.0, opt.w_star)) ==
        doctest::Approx(4.0 * opt.energy_per_edge).epsilon(1e-14));
}

TEST_CASE("closed form matches the quadrature Rayleigh quotient") {
  // the quadrature kinetic term is a second-order difference form, so its
  // accuracy is O((2 pi / q)^2)
  const double w = 0.5;
  const RotorGraph g = make_chain(2, 5.0, 1.0);
  const double closed = jastrow_energy(uniform_chain(2, 5.0, 1.0, w));
  const auto log_pair = [w](const Eigen::VectorXd& t) {
    return w * std::cos(t(0) - t(1));
  };
  const double q128 = rayleigh_quotient_quadrature(g, log_pair, 128);
  const double q512 = rayleigh_quotient_quadrature(g, log_pair, 512);
  CHECK(std::abs(q128 - closed) < 5e-4);
  CHECK(std::abs(q512 - closed) < 2e-5);
  // refinement shrinks the error at the expected second-order rate
  CHECK(std::abs(q512 - closed) < 0.10 * std::abs(q128 - closed));
}

TEST_CASE("the edge energy is stationary at the optimum") {
  for (double beta : {0.3, 1.0, 2.5}) {
    const JastrowOptimum opt = optimize_uniform_weight(5.0, beta);
    const double slope = oracle::fd_first(
        [beta](double w) { return jastrow_edge_energy(5.0, beta, w); },
        opt.w_star, 1e-4);
    CHECK(std::abs(slope) < 1e-6);
    // and it is a minimum against nearby weights
    CHECK(jastrow_edge_energy(5.0, beta, opt.w_star) <
          jastrow_edge_energy(5.0, beta, opt.w_star + 0.05));
    CHECK(jastrow_edge_energy(5.0, beta, opt.w_star) <
          jastrow_edge_energy(5.0, beta, opt.w_star - 0.05));
  }
}

TEST_CASE("weak-coupling limit is the free rotor") {
  const JastrowOptimum opt = optimize_uniform_weight(5.0, 1e-9);
  CHECK(opt.w_star < 1e-3);
  CHECK(std::abs(opt.energy_per_edge) < 1e-8);
}

TEST_CASE("per-edge optimum exceeds the spectral per-edge increment") {
  const JastrowOptimum opt = optimize_uniform_weight(5.0, 1.0);
  const auto l2 =
      inverse_power_iteration<double>(make_chain(2, 5.0, 1.0), 4, EigSettings{});
  const auto l3 =
      inverse_power_iteration<double>(make_chain(3, 5.0, 1.0), 4, EigSettings{});
  REQUIRE(l2.converged);
  REQUIRE(l3.converged);
  const double increment = l3.lambda_min - l2.lambda_min;
  CHECK(std::abs(increment - 1.610) < 1e-3);
  CHECK(opt.energy_per_edge > increment + 1e-2);
}

TEST_CASE("optimal Jastrow energy upper-bounds the spectral level") {
  const JastrowOptimum opt = optimize_uniform_weight(5.0, 1.0);
  for (int n = 2; n <= 5; ++n) {
    const auto res =
        inverse_power_iteration<double>(make_chain(n, 5.0, 1.0), 4, EigSettings{});
    REQUIRE(res.converged);
    const double ej = jastrow_energy(uniform_chain(n, 5.0, 1.0, opt.w_star));
    CHECK(ej > res.lambda_min);
    CHECK(ej - res.lambda_min > 1e-3 * (n - 1));  // real, not numerical, gap
  }
}

TEST_CASE("energy is additive over edges") {
  for (double w : {0.0, 0.4, 1.3}) {
    const double inc54 = jastrow_energy(uniform_chain(5, 5.0, 1.0, w)) -
                         jastrow_energy(uniform_chain(4, 5.0, 1.0, w));
    const double inc32 = jastrow_energy(uniform_chain(3, 5.0, 1.0, w)) -
                         jastrow_energy(uniform_chain(2, 5.0, 1.0, w));
    CHECK(inc54 == doctest::Approx(jastrow_edge_energy(5.0, 1.0, w)).epsilon(1e-14));
    CHECK(inc32 == doctest::Approx(inc54).epsilon(1e-14));
  }
  JastrowChain jc = uniform_chain(4, 5.0, 0.0, 0.0);
  jc.beta << 1.0, 0.7, 1.9;
  jc.w << 0.2, 0.9, 0.4;
  double direct = 0.0;
  for (int i = 0; i < 3; ++i)
    direct += jastrow_edge_energy(5.0, jc.beta(i), jc.w(i));
  CHECK(jastrow_energy(jc) == doctest::Approx(direct).epsilon(1e-15));
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(jastrow_energy(uniform_chain(2, -5.0, 1.0, 0.0)),
                  std::invalid_argument);
  JastrowChain too_small;
  too_small.n = 1;
  too_small.h = 5.0;
  CHECK_THROWS_AS(jastrow_energy(too_small), std::invalid_argument);
  JastrowChain bad_len = uniform_chain(3, 5.0, 1.0, 0.0);
  bad_len.w.resize(5);
  bad_len.w.setZero();
  CHECK_THROWS_AS(jastrow_energy(bad_len), std::invalid_argument);
  CHECK_THROWS_AS(optimize_uniform_weight(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(optimize_uniform_weight(5.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(optimize_uniform_weight(5.0, -1.0), std::invalid_argument);
}
