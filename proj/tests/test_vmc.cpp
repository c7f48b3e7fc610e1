#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qrotor/quadrature.hpp"
#include "qrotor/vmc.hpp"

using namespace qrotor;

namespace {

Eigen::VectorXd random_angles(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-pi, pi);
  Eigen::VectorXd t(n);
  for (int j = 0; j < n; ++j) t(j) = u(rng);
  return t;
}

double log_psi_at(const RbmParams<double>& p, const Eigen::VectorXd& theta) {
  return log_psi(p, build_cache(p, theta));
}

}  // namespace

TEST_CASE("sampler settings validation") {
  SamplerSettings s;
  CHECK_NOTHROW(validate(s));
  s.burn_in = s.total_samples;
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
  s = SamplerSettings{};
  s.thin = 0;
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
  s = SamplerSettings{};
  s.proposal_width = 0.0;
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
  s = SamplerSettings{};
  s.chains = 0;
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
  s = SamplerSettings{};
  s.total_samples = s.burn_in + 1;  // one retained sample is too few
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
  CHECK(retained_count(24000, 4000, 20) == 1000);
  CHECK(retained_count(10, 0, 3) == 3);
}

TEST_CASE("local_energy: zero parameters leave only the potential") {
  std::mt19937_64 rng(3);
  for (const RotorGraph& g : {make_chain(3, 5.0, 1.0), make_complete(4, 2.0, 0.6)}) {
    const RbmParams<double> p = zero_params<double>(5, g.num_vertices());
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd t = random_angles(g.num_vertices(), rng);
      CHECK(local_energy(g, p, build_cache(p, t)) ==
            doctest::Approx(potential_energy(g, t)).epsilon(1e-13));
    }
  }
}

TEST_CASE("local_energy matches the finite-difference Hamiltonian oracle") {
  std::mt19937_64 rng(5);
  const RotorGraph g = make_chain(2, 5.0, 1.0);
  for (int inst = 0; inst < 10; ++inst) {
    const RbmParams<double> p = random_params<double>(5, 2, 0.6, rng);
    const Eigen::VectorXd t = random_angles(2, rng);
    const double mine = local_energy(g, p, build_cache(p, t));
    const double ref = oracle::fd_local_energy(
        g, [&](const Eigen::VectorXd& v) { return log_psi_at(p, v); }, t, 1e-4);
    CHECK(std::abs(mine - ref) < 1e-5 * std::max(1.0, std::abs(mine)));
  }
}

TEST_CASE("local_energy: single free rotor with c=(1,0) has a closed form") {
  // logpsi = cos(theta) + const, h = 5:
  // E = -(h/2)(f'' + f'^2) = (5/2)(cos t - sin^2 t)
  RbmParams<double> p = zero_params<double>(2, 1);
  p.c(0, 0) = 1.0;
  const RotorGraph g(1, {}, Eigen::VectorXd::Constant(1, 5.0));
  for (double t = -3.0; t < 3.2; t += 0.37) {
    Eigen::VectorXd theta(1);
    theta << t;
    const double expect = 2.5 * (std::cos(t) - std::sin(t) * std::sin(t));
    CHECK(local_energy(g, p, build_cache(p, theta)) ==
          doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("metropolis: uniform target accepts every proposal") {
  const RotorGraph g = make_chain(3, 5.0, 1.0);
  const RbmParams<double> p = zero_params<double>(4, 3);
  MarkovChain ch = make_chain(g, p, 7);
  double acc_sum = 0.0;
  for (int k = 0; k < 50; ++k) acc_sum += metropolis_sweep(g, p, ch, 1.0);
  CHECK(acc_sum == doctest::Approx(50.0));
  CHECK(ch.accepted == ch.proposed);
  for (int j = 0; j < 3; ++j) {
    CHECK(ch.theta(j) >= -pi);
    CHECK(ch.theta(j) < pi);
  }
}

TEST_CASE("metropolis: vanishing proposal width freezes the chain") {
  std::mt19937_64 rng(11);
  const RotorGraph g = make_chain(2, 5.0, 1.0);
  const RbmParams<double> p = random_params<double>(4, 2, 0.5, rng);
  MarkovChain ch = make_chain(g, p, 9);
  const Eigen::VectorXd before = ch.theta;
  for (int k = 0; k < 20; ++k) metropolis_sweep(g, p, ch, 1e-300);
  // the step itself is absorbed; only re-wrapping rounding remains
  for (int j = 0; j < 2; ++j)
    CHECK(circle_distance(ch.theta(j), before(j)) < 1e-12);
}

TEST_CASE("metropolis acceptance rate matches the stationary expectation") {
  // Independently compute a* = E_pi E_delta E_j min(1, e^{2 dlogpsi}) by
  // quadrature and compare with the long-run empirical acceptance rate. A
  // wrong acceptance exponent would shift a* by far more than the tolerance.
  std::mt19937_64 rng(13);
  const RotorGraph g = make_chain(2, 5.0, 1.0);
  RbmParams<double> p = random_params<double>(3, 2, 0.6, rng);
  const double width = 1.0;

  const int q = 72, qd = 33;
  Eigen::MatrixXd f(q, q), w(q, q);
  for (int k1 = 0; k1 < q; ++k1)
    for (int k2 = 0; k2 < q; ++k2) {
      Eigen::VectorXd t(2);
      t << -pi + two_pi * k1 / q, -pi + two_pi * k2 / q;
      f(k1, k2) = log_psi_at(p, t);
    }
  const double fmax = f.maxCoeff();
  w = (2.0 * (f.array() - fmax)).exp();
  double accept_expect = 0.0, weight_sum = 0.0;
  for (int k1 = 0; k1 < q; ++k1)
    for (int k2 = 0; k2 < q; ++k2) {
      double local = 0.0;
      for (int j = 0; j < 2; ++j)
        for (int d = 0; d < qd; ++d) {
          const double delta = -width + 2.0 * width * (d + 0.5) / qd;
          Eigen::VectorXd t(2);
          t << -pi + two_pi * k1 / q, -pi + two_pi * k2 / q;
          t(j) = wrap_angle(t(j) + delta);
          local += std::min(1.0, std::exp(2.0 * (log_psi_at(p, t) - f(k1, k2))));
        }
      accept_expect += w(k1, k2) * local / (2.0 * qd);
      weight_sum += w(k1, k2);
    }
  accept_expect /= weight_sum;

  MarkovChain ch = make_chain(g, p, 21);
  for (int k = 0; k < 2000; ++k) metropolis_sweep(g, p, ch, width);
  const long long prop0 = ch.proposed, acc0 = ch.accepted;
  for (int k = 0; k < 30000; ++k) metropolis_sweep(g, p, ch, width);
  const double observed = static_cast<double>(ch.accepted - acc0) /
                          static_cast<double>(ch.proposed - prop0);
  CHECK(observed == doctest::Approx(accept_expect).epsilon(0.02));
}

TEST_CASE("sampled pair-angle marginal matches the quadrature marginal") {
  const RotorGraph g = make_chain(2, 5.0, 1.0);
  SamplerSettings sampler;
  sampler.total_samples = 2500;
  sampler.burn_in = 500;
  sampler.thin = 5;
  sampler.seed = 31;
  SrSettings sr;
  sr.steps = 200;
  std::mt19937_64 rng(31);
  const VmcResult trained =
      run_vmc(g, random_params<double>(6, 2, 0.01, rng), sampler, sr);
  REQUIRE_FALSE(trained.report.aborted);
  const RbmParams<double>& p = trained.params;

  const int q = 128;
  Eigen::MatrixXd f(q, q);
  for (int k1 = 0; k1 < q; ++k1)
    for (int k2 = 0; k2 < q; ++k2) {
      Eigen::VectorXd t(2);
      t << -pi + two_pi * k1 / q, -pi + two_pi * k2 / q;
      f(k1, k2) = log_psi_at(p, t);
    }
  const double fmax = f.maxCoeff();
  std::vector<double> marginal(q, 0.0);
  double total = 0.0;
  for (int k1 = 0; k1 < q; ++k1)
    for (int k2 = 0; k2 < q; ++k2) {
      const double wgt = std::exp(2.0 * (f(k1, k2) - fmax));
      marginal[((k1 - k2) % q + q) % q] += wgt;
      total += wgt;
    }
  // cell d of the difference grid is centered at -pi + 2 pi d / q; rotate so
  // cell 0 starts at -pi
  std::vector<double> cells(q, 0.0);
  for (int d = 0; d < q; ++d) {
    const int shifted = (d + q / 2) % q;  // difference value wrapped
    cells[shifted] += marginal[d] / total;
  }

  MarkovChain ch = make_chain(g, p, 77);
  for (int k = 0; k < 2000; ++k) metropolis_sweep(g, p, ch, 1.0);
  std::vector<double> samples;
  samples.reserve(20000);
  for (int k = 0; k < 200000; ++k) {
    metropolis_sweep(g, p, ch, 1.0);
    if (k % 10 == 9)
      samples.push_back(wrap_angle(ch.theta(0) - ch.theta(1) + pi / q));
  }
  CHECK(oracle::ks_distance(std::move(samples), cells) < 0.05);
}

TEST_CASE("estimator: constant local energy gives zero F and zero std") {
  const RotorGraph g(3, {}, Eigen::VectorXd::Constant(3, 5.0));  // edgeless
  const RbmParams<double> p = zero_params<double>(4, 3);
  SamplerSettings s;
  s.total_samples = 600;
  s.burn_in = 100;
  s.thin = 2;
  const SampleStats stats = estimate_energy_and_gradient(g, p, s);
  CHECK(stats.energy.mean == 0.0);
  CHECK(stats.energy.std == 0.0);
  CHECK(stats.grad_f.norm() == 0.0);
  CHECK(stats.retained == retained_count(600, 100, 2));
}

TEST_CASE("estimator: returned statistics are consistent with kept samples") {
  std::mt19937_64 rng(17);
  const RotorGraph g = make_chain(3, 5.0, 1.0);
  const RbmParams<double> p = random_params<double>(4, 3, 0.3, rng);
  SamplerSettings s;
  s.total_samples = 800;
  s.burn_in = 200;
  s.thin = 3;
  const SampleStats stats = estimate_energy_and_gradient(g, p, s, true, true);
  const double k = static_cast<double>(stats.retained);
  REQUIRE(stats.o_centered.cols() == stats.retained);
  REQUIRE(stats.e_centered.size() == stats.retained);
  CHECK(std::abs(stats.e_centered.mean()) < 1e-12);
  CHECK((stats.grad_f - stats.o_centered * stats.e_centered / k).norm() < 1e-12);
  const Eigen::MatrixXd s_ref = stats.o_centered * stats.o_centered.transpose() / k;
  CHECK((stats.s - s_ref).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(stats.energy.std ==
        doctest::Approx(std::sqrt(stats.e_centered.squaredNorm() / k)));

  // duplicating every sample changes none of the estimates
  Eigen::MatrixXd o2(stats.o_centered.rows(), 2 * stats.o_centered.cols());
  o2 << stats.o_centered, stats.o_centered;
  Eigen::VectorXd e2(2 * stats.e_centered.size());
  e2 << stats.e_centered, stats.e_centered;
  CHECK((o2 * e2 / (2.0 * k) - stats.grad_f).norm() < 1e-12);
  CHECK((o2 * o2.transpose() / (2.0 * k) - s_ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("estimator F equals half the parameter gradient of the Rayleigh quotient") {
  const RotorGraph g = make_chain(2, 5.0, 1.0);
  std::mt19937_64 rng(19);
  RbmParams<double> p = random_params<double>(1, 2, 0.4, rng);
  const int pcount = static_cast<int>(p.parameter_count());

  SamplerSettings s;
  s.total_samples = 60000;
  s.burn_in = 4000;
  s.thin = 8;
  s.seed = 100;
  const SampleStats stats = estimate_energy_and_gradient(g, p, s, false, true);
  const double k = static_cast<double>(stats.retained);
  // per-component standard error of F from the kept samples
  Eigen::VectorXd f_se(pcount);
  for (int i = 0; i < pcount; ++i) {
    const Eigen::ArrayXd prod =
        stats.o_centered.row(i).transpose().array() * stats.e_centered.array();
    const double var = (prod - prod.mean()).square().sum() / k;
    f_se(i) = std::sqrt(var / k);
  }

  const Eigen::VectorXd flat = flatten(p);
  for (int i = 0; i < pcount; ++i) {
    const double drq = oracle::fd_first(
        [&](double v) {
          Eigen::VectorXd mod = flat;
          mod(i) = v;
          const RbmParams<double> q = unflatten(mod, 1, 2);
          return rayleigh_quotient_quadrature(
              g, [&](const Eigen::VectorXd& t) { return log_psi_at(q, t); }, 96);
        },
        flat(i), 1e-4);
    // F is the covariance form; for real parameters it equals (1/2) dR/dp
    CHECK(std::abs(stats.grad_f(i) - 0.5 * drq) < 3.0 * f_se(i) + 3e-4);
  }
}

TEST_CASE("sr_step closed-form cases") {
  std::mt19937_64 rng(23);
  const RbmParams<double> p = random_params<double>(2, 2, 0.5, rng);
  const int pc = static_cast<int>(p.parameter_count());
  SrSettings sr;
  sr.learning_rate = 0.3;
  sr.sr_shift = 1e-6;

  // F = 0 -> fixed point
  const RbmParams<double> same = sr_step(
      p, Eigen::VectorXd::Zero(pc), Eigen::MatrixXd::Identity(pc, pc), sr);
  CHECK(flatten(same) == flatten(p));

  // S = 0 -> delta = F / eps
  Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(pc, -1.0, 1.0);
  const RbmParams<double> scaled =
      sr_step(p, f, Eigen::MatrixXd::Zero(pc, pc), sr);
  const Eigen::VectorXd expect0 = flatten(p) - (sr.learning_rate / sr.sr_shift) * f;
  CHECK((flatten(scaled) - expect0).cwiseAbs().maxCoeff() < 1e-6 * expect0.norm());

  // S = I, eps = 0, eta = 1 -> p - F
  sr.learning_rate = 1.0;
  sr.sr_shift = 0.0;
  const RbmParams<double> shifted =
      sr_step(p, f, Eigen::MatrixXd::Identity(pc, pc), sr);
  CHECK((flatten(shifted) - (flatten(p) - f)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("matrix-free SR agrees with the dense solve") {
  std::mt19937_64 rng(29);
  const RbmParams<double> p = random_params<double>(3, 3, 0.5, rng);
  const int pc = static_cast<int>(p.parameter_count());
  const int k = 40;
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd oc(pc, k);
  for (int i = 0; i < pc; ++i)
    for (int j = 0; j < k; ++j) oc(i, j) = gauss(rng);
  oc.colwise() -= oc.rowwise().mean().eval();
  Eigen::VectorXd f(pc);
  for (int i = 0; i < pc; ++i) f(i) = gauss(rng);

  SrSettings sr;
  sr.learning_rate = 0.1;
  sr.sr_shift = 1e-4;
  const Eigen::MatrixXd s =
      oc * oc.transpose() / static_cast<double>(k);
  const Eigen::VectorXd dense = flatten(sr_step(p, f, s, sr));
  const Eigen::VectorXd matfree = flatten(sr_step_matrix_free(p, f, oc, sr));
  CHECK((dense - matfree).cwiseAbs().maxCoeff() < 1e-8 * (1.0 + dense.norm()));
}

TEST_CASE("run_vmc is deterministic for a fixed seed") {
  const RotorGraph g = make_chain(2, 5.0, 1.0);
  SamplerSettings s;
  s.total_samples = 500;
  s.burn_in = 100;
  s.thin = 4;
  s.seed = 5;
  SrSettings sr;
  sr.steps = 25;
  std::mt19937_64 rng1(9), rng2(9);
  const RbmParams<double> init1 = random_params<double>(4, 2, 0.01, rng1);
  const RbmParams<double> init2 = random_params<double>(4, 2, 0.01, rng2);
  const VmcResult a = run_vmc(g, init1, s, sr);
  const VmcResult b = run_vmc(g, init2, s, sr);
  REQUIRE(a.report.steps.size() == b.report.steps.size());
  for (std::size_t k = 0; k < a.report.steps.size(); ++k) {
    CHECK(a.report.steps[k].energy_mean == b.report.steps[k].energy_mean);
    CHECK(a.report.steps[k].energy_std == b.report.steps[k].energy_std);
    CHECK(a.report.steps[k].grad_norm == b.report.steps[k].grad_norm);
    CHECK(a.report.steps[k].acceptance_rate == b.report.steps[k].acceptance_rate);
  }
  CHECK(flatten(a.params) == flatten(b.params));

  s.chains = 3;  // multi-chain runs are deterministic too
  const VmcResult c = run_vmc(g, init1, s, sr);
  const VmcResult d = run_vmc(g, init2, s, sr);
  CHECK(flatten(c.params) == flatten(d.params));
  CHECK(c.report.steps.back().energy_mean == d.report.steps.back().energy_mean);
}

TEST_CASE("run_vmc: free rotor converges to zero energy with vanishing std") {
  const RotorGraph g(1, {}, Eigen::VectorXd::Constant(1, 5.0));
  SamplerSettings s;
  s.total_samples = 1500;
  s.burn_in = 300;
  s.thin = 3;
  SrSettings sr;
  sr.steps = 300;
  std::mt19937_64 rng(15);
  const VmcResult r = run_vmc(g, random_params<double>(3, 1, 0.01, rng), s, sr);
  REQUIRE_FALSE(r.report.aborted);
  const std::vector<double> roll = rolling_average(r.report.energy_series(), 250);
  CHECK(std::abs(roll.back()) < 5e-3);
  CHECK(r.report.steps.back().energy_std < 5e-3);
  // near-zero energies with correlated samples can graze the 5-sigma floor
  // monitor; a handful of counts is noise, not a bound violation
  CHECK(r.report.floor_violations <= 2);
}

TEST_CASE("run_vmc: short n=2 chain run approaches the spectral level") {
  const RotorGraph g = make_chain(2, 5.0, 1.0);
  SamplerSettings s;
  s.total_samples = 4000;
  s.burn_in = 800;
  s.thin = 5;
  s.seed = 77;
  SrSettings sr;
  sr.steps = 500;
  std::mt19937_64 rng(77);
  const VmcResult r = run_vmc(g, random_params<double>(10, 2, 0.01, rng), s, sr);
  REQUIRE_FALSE(r.report.aborted);
  const double rolled = rolling_average(r.report.energy_series(), 250).back();
  CHECK(rolled == doctest::Approx(1.6245089946).epsilon(0.02));
  CHECK(r.report.floor_violations == 0);
  // variational: not below the known level beyond statistical slack
  const double se = r.report.steps.back().energy_std /
                    std::sqrt(static_cast<double>(r.report.retained_per_step));
  CHECK(r.report.steps.back().energy_mean > 1.6245089946 - 3.0 * se - 5e-3);
}

TEST_CASE("run_vmc: per-move sample unit works") {
  const RotorGraph g = make_chain(2, 5.0, 1.0);
  SamplerSettings s;
  s.total_samples = 8000;  // single-rotor proposals
  s.burn_in = 1600;
  s.thin = 10;
  s.per_move_samples = true;
  SrSettings sr;
  sr.steps = 300;
  std::mt19937_64 rng(21);
  const VmcResult r = run_vmc(g, random_params<double>(6, 2, 0.01, rng), s, sr);
  REQUIRE_FALSE(r.report.aborted);
  CHECK(r.report.retained_per_step == retained_count(8000, 1600, 10));
  CHECK(rolling_average(r.report.energy_series(), 250).back() ==
        doctest::Approx(1.6245).epsilon(0.05));
}

TEST_CASE("run_vmc aborts with a diagnostic when parameters blow up") {
  const RotorGraph g = make_chain(2, 5.0, 1.0);
  SamplerSettings s;
  s.total_samples = 400;
  s.burn_in = 100;
  s.thin = 2;
  SrSettings sr;
  sr.steps = 200;
  sr.learning_rate = 1e10;  // deliberately unstable
  std::mt19937_64 rng(33);
  const VmcResult r = run_vmc(g, random_params<double>(4, 2, 0.5, rng), s, sr);
  CHECK(r.report.aborted);
  CHECK_FALSE(r.report.abort_reason.empty());
  CHECK(r.report.steps.size() < 200);  // partial trace retained
}

TEST_CASE("rolling_average windows") {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
  const std::vector<double> r3 = rolling_average(x, 3);
  REQUIRE(r3.size() == 5);
  CHECK(r3[0] == doctest::Approx(1.0));
  CHECK(r3[1] == doctest::Approx(1.5));
  CHECK(r3[2] == doctest::Approx(2.0));
  CHECK(r3[3] == doctest::Approx(3.0));
  CHECK(r3[4] == doctest::Approx(4.0));
  const std::vector<double> rbig = rolling_average(x, 250);
  CHECK(rbig.back() == doctest::Approx(3.0));
}
