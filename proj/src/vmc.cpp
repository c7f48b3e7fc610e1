#include "qrotor/vmc.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "qrotor/bessel.hpp"
#include "qrotor/random.hpp"

namespace qrotor {

namespace {

constexpr long long kRebuildPeriod = 4096;  // accepted moves between full rebuilds
constexpr long long kDenseSrLimit = 5000;   // largest P solved by dense Cholesky

long long chain_share(const SamplerSettings& s) {
  return (s.total_samples - s.burn_in + s.chains - 1) / s.chains;
}

}  // namespace

void validate(const SamplerSettings& s) {
  if (s.total_samples <= 0 || s.burn_in < 0 || s.burn_in >= s.total_samples)
    throw std::invalid_argument("sampler: need 0 <= burn_in < total_samples");
  if (s.thin < 1) throw std::invalid_argument("sampler: thin must be >= 1");
  if (!(s.proposal_width > 0.0) || !std::isfinite(s.proposal_width))
    throw std::invalid_argument("sampler: proposal_width must be positive");
  if (s.chains < 1) throw std::invalid_argument("sampler: chains must be >= 1");
  const long long per_chain =
      retained_count(s.burn_in + chain_share(s), s.burn_in, s.thin);
  if (s.chains * per_chain < 2)
    throw std::invalid_argument("sampler: fewer than 2 retained samples");
}

long long retained_count(long long total, long long burn, long long thin) {
  return (total - burn) / thin;
}

MarkovChain make_chain(const RotorGraph& g, const RbmParams<double>& p,
                       std::uint64_t seed) {
  if (g.num_vertices() != p.visible_count())
    throw std::invalid_argument("make_chain: graph/model size mismatch");
  MarkovChain ch;
  ch.rng.seed(seed);
  ch.theta.resize(g.num_vertices());
  for (Eigen::Index j = 0; j < ch.theta.size(); ++j)
    ch.theta(j) = uniform_symmetric(ch.rng, pi);
  rebuild_chain(p, ch);
  return ch;
}

void rebuild_chain(const RbmParams<double>& p, MarkovChain& ch) {
  ch.cache = build_cache(p, ch.theta);
  ch.log_i0_r.resize(ch.cache.r.size());
  for (Eigen::Index i = 0; i < ch.cache.r.size(); ++i)
    ch.log_i0_r(i) = bessel::log_i0(ch.cache.r(i));
  ch.updates_since_rebuild = 0;
}

double local_energy(const RotorGraph& g, const RbmParams<double>& p,
                    const RbmCache<double>& cache) {
  auto [first, second] = angle_derivatives(p, cache);
  double kin = 0.0;
  for (Eigen::Index j = 0; j < first.size(); ++j)
    kin += g.vertex_weight(static_cast<int>(j)) *
           (second(j) + first(j) * first(j));
  double pot = 0.0;
  for (const Edge& e : g.edges())
    pot += e.beta * (2.0 - 2.0 * cache.x.row(e.i).dot(cache.x.row(e.j)));
  return -0.5 * kin + pot;
}

bool metropolis_move(const RotorGraph& g, const RbmParams<double>& p,
                     MarkovChain& ch, int j, double width) {
  (void)g;
  ++ch.proposed;
  const double theta_new = wrap_angle(ch.theta(j) + uniform_symmetric(ch.rng, width));
  const double u = uniform01(ch.rng);  // drawn unconditionally: fixed stream layout

  const double d0 = std::cos(theta_new) - ch.cache.x(j, 0);
  const double d1 = std::sin(theta_new) - ch.cache.x(j, 1);
  double dlog = p.c(j, 0) * d0 + p.c(j, 1) * d1;
  const Eigen::Index m = ch.cache.y.rows();
  if (ch.log_i0_scratch.size() != m) ch.log_i0_scratch.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    // same arithmetic as update_rotor, so the scratch values stay valid on accept
    const double aij = p.a(i, j);
    const double y0 = ch.cache.y(i, 0) + aij * d0;
    const double y1 = ch.cache.y(i, 1) + aij * d1;
    const double li0 = bessel::log_i0(std::sqrt(y0 * y0 + y1 * y1));
    ch.log_i0_scratch(i) = li0;
    dlog += li0 - ch.log_i0_r(i);
  }

  const bool accept = 2.0 * dlog >= 0.0 || u < std::exp(2.0 * dlog);
  if (accept) {
    update_rotor(p, ch.cache, j, theta_new);
    ch.theta(j) = theta_new;
    ch.log_i0_r = ch.log_i0_scratch;
    ++ch.accepted;
    if (++ch.updates_since_rebuild >= kRebuildPeriod) rebuild_chain(p, ch);
  }
  return accept;
}

double metropolis_sweep(const RotorGraph& g, const RbmParams<double>& p,
                        MarkovChain& ch, double width) {
  const int n = g.num_vertices();
  int acc = 0;
  for (int j = 0; j < n; ++j)
    acc += metropolis_move(g, p, ch, j, width) ? 1 : 0;
  return static_cast<double>(acc) / n;
}

SampleStats estimate_with_chains(const RotorGraph& g, const RbmParams<double>& p,
                                 const SamplerSettings& settings,
                                 std::vector<MarkovChain>& chains, bool form_s,
                                 bool keep_samples) {
  validate(settings);
  if (static_cast<int>(chains.size()) != settings.chains)
    throw std::invalid_argument("estimate: chain count does not match settings");
  // caches may have been built against different parameters (warm starts)
  for (MarkovChain& ch : chains) rebuild_chain(p, ch);

  const int n = g.num_vertices();
  const Eigen::Index pdim = p.parameter_count();
  const long long chain_total = settings.burn_in + chain_share(settings);
  const long long per_chain =
      retained_count(chain_total, settings.burn_in, settings.thin);
  const long long k_total = per_chain * settings.chains;

  Eigen::VectorXd e(k_total);
  Eigen::MatrixXd o(pdim, k_total);
  long long col = 0;
  long long proposed = 0, accepted = 0;

  for (MarkovChain& ch : chains) {
    const long long prop0 = ch.proposed, acc0 = ch.accepted;
    for (long long tick = 0; tick < chain_total; ++tick) {
      if (settings.per_move_samples) {
        metropolis_move(g, p, ch, ch.next_vertex, settings.proposal_width);
        ch.next_vertex = (ch.next_vertex + 1) % n;
      } else {
        metropolis_sweep(g, p, ch, settings.proposal_width);
      }
      const long long since_burn = tick - settings.burn_in;
      if (since_burn >= 0 && (since_burn + 1) % settings.thin == 0 &&
          col < k_total) {
        e(col) = local_energy(g, p, ch.cache);
        o.col(col) = param_gradient(p, ch.cache);
        ++col;
      }
    }
    proposed += ch.proposed - prop0;
    accepted += ch.accepted - acc0;
  }

  SampleStats stats;
  stats.retained = col;
  stats.acceptance_rate =
      proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;

  const double mean = e.mean();
  e.array() -= mean;
  stats.energy.mean = mean;
  stats.energy.std = std::sqrt(e.squaredNorm() / static_cast<double>(col));
  const Eigen::VectorXd o_mean = o.rowwise().mean();
  o.colwise() -= o_mean;
  stats.grad_f = o * e / static_cast<double>(col);
  stats.energy.grad_norm = stats.grad_f.norm();
  if (form_s) {
    stats.s.noalias() = o * o.transpose() / static_cast<double>(col);
    stats.s = 0.5 * (stats.s + stats.s.transpose()).eval();  // exact symmetry
  }
  if (keep_samples) {
    stats.o_centered = std::move(o);
    stats.e_centered = std::move(e);
  }
  stats.finite = std::isfinite(stats.energy.mean) &&
                 std::isfinite(stats.energy.std) && stats.grad_f.allFinite();
  return stats;
}

SampleStats estimate_energy_and_gradient(const RotorGraph& g,
                                         const RbmParams<double>& p,
                                         const SamplerSettings& settings,
                                         bool form_s, bool keep_samples) {
  std::vector<MarkovChain> chains;
  chains.reserve(settings.chains);
  for (int c = 0; c < settings.chains; ++c)
    chains.push_back(make_chain(g, p, settings.seed + static_cast<std::uint64_t>(c)));
  return estimate_with_chains(g, p, settings, chains, form_s, keep_samples);
}

RbmParams<double> sr_step(const RbmParams<double>& p, const Eigen::VectorXd& f,
                          const Eigen::MatrixXd& s, const SrSettings& sr) {
  if (s.rows() != f.size() || s.cols() != f.size())
    throw std::invalid_argument("sr_step: S/F dimension mismatch");
  Eigen::MatrixXd shifted = s;
  shifted.diagonal().array() += sr.sr_shift;
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "sr_step: S + eps I is not positive definite; the shift is too small "
        "for this sample covariance");
  const Eigen::VectorXd delta = llt.solve(f);
  const Eigen::VectorXd stepped = flatten(p) - sr.learning_rate * delta;
  return unflatten<double>(stepped, p.hidden_count(), p.visible_count());
}

RbmParams<double> sr_step_matrix_free(const RbmParams<double>& p,
                                      const Eigen::VectorXd& f,
                                      const Eigen::MatrixXd& o_centered,
                                      const SrSettings& sr) {
  const double k = static_cast<double>(o_centered.cols());
  auto apply = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return o_centered * (o_centered.transpose() * v) / k + sr.sr_shift * v;
  };
  // plain CG; S + eps I is symmetric positive definite for eps > 0
  Eigen::VectorXd x = Eigen::VectorXd::Zero(f.size());
  Eigen::VectorXd r = f;
  Eigen::VectorXd d = r;
  double rs = r.squaredNorm();
  const double stop = 1e-20 * rs + 1e-300;
  const int max_iters = static_cast<int>(5 * f.size()) + 10;
  for (int it = 0; it < max_iters && rs > stop; ++it) {
    const Eigen::VectorXd q = apply(d);
    const double alpha = rs / d.dot(q);
    if (!std::isfinite(alpha)) break;
    x += alpha * d;
    r -= alpha * q;
    const double rs_new = r.squaredNorm();
    d = r + (rs_new / rs) * d;
    rs = rs_new;
  }
  const Eigen::VectorXd stepped = flatten(p) - sr.learning_rate * x;
  return unflatten<double>(stepped, p.hidden_count(), p.visible_count());
}

std::vector<double> VmcReport::energy_series() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const VmcStepRecord& rec : steps) out.push_back(rec.energy_mean);
  return out;
}

std::vector<double> rolling_average(const std::vector<double>& x, int window) {
  std::vector<double> out(x.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += x[i];
    if (i >= static_cast<std::size_t>(window)) acc -= x[i - window];
    out[i] = acc / static_cast<double>(std::min<std::size_t>(i + 1, window));
  }
  return out;
}

VmcResult run_vmc(const RotorGraph& g, const RbmParams<double>& init,
                  const SamplerSettings& settings, const SrSettings& sr,
                  const StepCallback& on_step) {
  validate(settings);
  if (sr.steps < 1) throw std::invalid_argument("sr: steps must be >= 1");
  if (!(sr.learning_rate > 0.0))
    throw std::invalid_argument("sr: learning rate must be positive");
  if (sr.sr_shift < 0.0)
    throw std::invalid_argument("sr: shift must be nonnegative");

  VmcResult res;
  res.params = init;
  if (!init.all_finite()) {
    res.report.aborted = true;
    res.report.abort_reason = "initial parameters are not finite";
    return res;
  }

  const double mu = eigenvalue_lower_bound(g);
  const bool dense = init.parameter_count() <= kDenseSrLimit;
  std::vector<MarkovChain> chains;
  chains.reserve(settings.chains);
  for (int c = 0; c < settings.chains; ++c)
    chains.push_back(
        make_chain(g, res.params, settings.seed + static_cast<std::uint64_t>(c)));

  for (int step = 0; step < sr.steps; ++step) {
    const auto t0 = std::chrono::steady_clock::now();
    SampleStats stats =
        estimate_with_chains(g, res.params, settings, chains, dense, !dense);
    res.report.retained_per_step = stats.retained;

    VmcStepRecord rec;
    rec.step = step;
    rec.energy_mean = stats.energy.mean;
    rec.energy_std = stats.energy.std;
    rec.grad_norm = stats.energy.grad_norm;
    rec.acceptance_rate = stats.acceptance_rate;

    if (!stats.finite) {
      res.report.steps.push_back(rec);
      res.report.aborted = true;
      res.report.abort_reason =
          "non-finite energy estimate at step " + std::to_string(step);
      break;
    }
    const double se = stats.energy.std / std::sqrt(static_cast<double>(stats.retained));
    if (stats.energy.mean < mu - 5.0 * se) ++res.report.floor_violations;

    RbmParams<double> next =
        dense ? sr_step(res.params, stats.grad_f, stats.s, sr)
              : sr_step_matrix_free(res.params, stats.grad_f, stats.o_centered, sr);
    if (!next.all_finite()) {
      res.report.steps.push_back(rec);
      res.report.aborted = true;
      res.report.abort_reason =
          "non-finite parameters after update at step " + std::to_string(step);
      break;
    }
    res.params = std::move(next);

    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    res.report.steps.push_back(rec);
    if (on_step) on_step(rec);
  }
  return res;
}

}  // namespace qrotor
