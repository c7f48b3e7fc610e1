#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "qrotor/graph.hpp"
#include "qrotor/hamiltonian.hpp"
#include "qrotor/rbm.hpp"

// Variational Monte Carlo for the rotor RBM: sequential-scan Metropolis
// sampling of |psi|^2, local-energy estimation, and stochastic
// reconfiguration (natural-gradient) parameter updates.

namespace qrotor {

struct SamplerSettings {
  long long total_samples = 24000;
  long long burn_in = 4000;
  long long thin = 20;
  double proposal_width = 1.0;  // radians; ~40-60% acceptance on the benchmarks
  std::uint64_t seed = 1;
  // One "sample" is a full n-rotor sweep by default; with per_move_samples it
  // is a single-rotor proposal instead (used by schedules whose counts scale
  // with n).
  bool per_move_samples = false;
  int chains = 1;
};

// Throws std::invalid_argument unless burn_in < total_samples, thin >= 1,
// chains >= 1, the proposal width is positive, and at least 2 samples are
// retained overall.
void validate(const SamplerSettings& s);

// Retained samples for a single chain running `total` ticks of which `burn`
// are discarded: floor((total - burn)/thin).
long long retained_count(long long total, long long burn, long long thin);

struct SrSettings {
  double learning_rate = 1e-2;  // eta
  double sr_shift = 1e-6;       // epsilon added to the diagonal of S
  int steps = 10000;
};

struct EnergyEstimate {
  double mean = 0.0;
  double std = 0.0;  // population std of the local energy over retained samples
  double grad_norm = 0.0;
  int step_index = 0;
};

// One Markov chain: angles, the RBM cache, and the cached log I_0(r_i) values
// the proposal evaluation needs. Single-writer; independent chains never
// share state.
struct MarkovChain {
  Eigen::VectorXd theta;
  RbmCache<double> cache;
  Eigen::VectorXd log_i0_r;
  std::mt19937_64 rng;
  int next_vertex = 0;
  long long proposed = 0;
  long long accepted = 0;
  long long updates_since_rebuild = 0;

  // proposal scratch, filled by metropolis_move
  Eigen::VectorXd log_i0_scratch;
};

// Chain with uniform random initial angles drawn from its own seeded stream.
MarkovChain make_chain(const RotorGraph& g, const RbmParams<double>& p,
                       std::uint64_t seed);

// Recompute cache and log I_0 values from scratch (drift guard).
void rebuild_chain(const RbmParams<double>& p, MarkovChain& ch);

// E_loc = -1/2 sum_j h_j (second_j + first_j^2) + potential; the potential is
// evaluated from the cached embeddings via cos(theta_i - theta_j) = <x_i, x_j>.
double local_energy(const RotorGraph& g, const RbmParams<double>& p,
                    const RbmCache<double>& cache);

// One single-rotor Metropolis proposal at vertex j: theta'_j = theta_j + delta
// with delta ~ Uniform(-width, width), wrapped to [-pi, pi), accepted with
// probability min(1, exp(2 [log psi' - log psi])). Returns acceptance.
bool metropolis_move(const RotorGraph& g, const RbmParams<double>& p,
                     MarkovChain& ch, int j, double width);

// n proposals in index order 0..n-1; returns this sweep's acceptance rate.
double metropolis_sweep(const RotorGraph& g, const RbmParams<double>& p,
                        MarkovChain& ch, double width);

// Sample statistics for one parameter point. With O the per-sample flat
// log-derivative vectors and E the local energies, over K retained samples:
//   F = <E O> - <E><O>        (equals 1/2 d<H>/dp for real parameters)
//   S = <O O^T> - <O><O^T>    (symmetric PSD by construction)
// o_samples holds the centered O columns when keep_samples was requested
// (matrix-free SR path); S is only formed when form_s is set.
struct SampleStats {
  EnergyEstimate energy;
  Eigen::VectorXd grad_f;
  Eigen::MatrixXd s;           // P x P, empty unless formed
  Eigen::MatrixXd o_centered;  // P x K, empty unless kept
  Eigen::VectorXd e_centered;  // K, empty unless kept
  double acceptance_rate = 0.0;
  long long retained = 0;
  bool finite = true;
};

// Fresh chains seeded seed + chain_index, each running the full burn-in and
// an equal share of the post-burn-in samples; retained samples pool in chain
// order, so the estimate is deterministic for fixed settings.
SampleStats estimate_energy_and_gradient(const RotorGraph& g,
                                         const RbmParams<double>& p,
                                         const SamplerSettings& settings,
                                         bool form_s = true,
                                         bool keep_samples = false);

// Same estimator over caller-owned chains (warm starts between SR steps).
SampleStats estimate_with_chains(const RotorGraph& g, const RbmParams<double>& p,
                                 const SamplerSettings& settings,
                                 std::vector<MarkovChain>& chains, bool form_s,
                                 bool keep_samples);

// Solve (S + eps I) delta = F by dense Cholesky and step p <- p - eta delta.
// Throws std::runtime_error if the shifted matrix is not positive definite.
RbmParams<double> sr_step(const RbmParams<double>& p, const Eigen::VectorXd& f,
                          const Eigen::MatrixXd& s, const SrSettings& sr);

// Matrix-free variant: CG on delta -> Oc (Oc^T delta)/K + eps delta, for
// parameter counts where forming S is wasteful.
RbmParams<double> sr_step_matrix_free(const RbmParams<double>& p,
                                      const Eigen::VectorXd& f,
                                      const Eigen::MatrixXd& o_centered,
                                      const SrSettings& sr);

struct VmcStepRecord {
  int step = 0;
  double energy_mean = 0.0;
  double energy_std = 0.0;
  double grad_norm = 0.0;
  double acceptance_rate = 0.0;
  double wall_ms = 0.0;  // informational; excluded from determinism contracts
};

struct VmcReport {
  std::vector<VmcStepRecord> steps;
  bool aborted = false;
  std::string abort_reason;
  // steps whose mean fell below the -4 sum|beta| bound by more than 5
  // standard errors; nonzero on a converged run signals a sampler bug
  int floor_violations = 0;
  long long retained_per_step = 0;

  std::vector<double> energy_series() const;
};

struct VmcResult {
  RbmParams<double> params;
  VmcReport report;
};

// k-point trailing average (shorter prefixes average what is available).
std::vector<double> rolling_average(const std::vector<double>& x, int window);

using StepCallback = std::function<void(const VmcStepRecord&)>;

// SR optimization loop: estimate, step, repeat. Chains persist across steps
// (warm start); each step still discards burn_in ticks before sampling.
// Aborts with a diagnostic report if any energy or parameter turns non-finite.
// P <= 5000 uses the dense SR solve, larger models the matrix-free one.
VmcResult run_vmc(const RotorGraph& g, const RbmParams<double>& init,
                  const SamplerSettings& settings, const SrSettings& sr,
                  const StepCallback& on_step = {});

}  // namespace qrotor
