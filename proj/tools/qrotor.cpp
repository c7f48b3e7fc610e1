// Command-line front end: solve-vmc, solve-fourier, solve-jastrow, compare,
// sweep-hidden, gen-graph.  A --config JSON file is applied first; explicit
// flags override individual fields.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qrotor/runner.hpp"

namespace {

using qrotor::RunConfig;

struct CommonOpts {
  std::string config;
  // graph source
  std::string graph_file;
  int chain_n = 0;
  std::vector<int> grid;
  int complete_n = 0;
  double h = 5.0;
  double beta = 1.0;
  // rbm + sampler
  int hidden = 10;
  long long samples = 24000;
  long long burn_in = 4000;
  long long thin = 20;
  double width = 1.0;
  std::uint64_t seed = 1;
  std::string sample_unit = "sweep";
  int chains = 1;
  // sr
  double learning_rate = 1e-2;
  double sr_shift = 1e-6;
  int steps = 10000;
  // fourier
  int omega_max = 5;
  double tau_cg = 1e-10;
  double tau_inv = 1e-12;
  int max_inv_iters = 1000;
  int max_cg_iters = 10000;
  std::uint64_t eig_seed = 1;
  // outputs
  std::string report;
  std::string summary;
  std::string checkpoint;
  std::string state_out;
  // on solve-fourier, --seed refers to the eigensolver start vector
  bool seed_is_eig = false;
};

void add_graph_options(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config, "JSON config applied before other flags");
  cmd->add_option("--graph", o.graph_file, "graph description JSON file");
  cmd->add_option("--chain", o.chain_n, "generate a uniform chain with N rotors");
  cmd->add_option("--grid", o.grid, "generate a uniform grid (ROWS COLS)")->expected(2);
  cmd->add_option("--complete", o.complete_n, "generate a complete graph with N rotors");
  cmd->add_option("--vertex-weight", o.h, "uniform vertex weight h for generated graphs");
  cmd->add_option("--coupling", o.beta, "uniform edge coupling beta for generated graphs");
}

void add_vmc_options(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--hidden", o.hidden, "hidden units per rotor state");
  cmd->add_option("--samples", o.samples, "Metropolis samples per optimization step");
  cmd->add_option("--burn-in", o.burn_in, "samples discarded before retention");
  cmd->add_option("--thin", o.thin, "keep every thin-th post-burn-in sample");
  cmd->add_option("--proposal-width", o.width, "uniform proposal half-width (radians)");
  cmd->add_option("--seed", o.seed, "base RNG seed");
  cmd->add_option("--sample-unit", o.sample_unit, "sweep|move: what one sample means")
      ->check(CLI::IsMember({"sweep", "move"}));
  cmd->add_option("--chains", o.chains, "independent Markov chains per step");
  cmd->add_option("--lr", o.learning_rate, "stochastic reconfiguration step size");
  cmd->add_option("--sr-shift", o.sr_shift, "diagonal shift for the SR linear solve");
  cmd->add_option("--steps", o.steps, "optimization steps");
}

void add_fourier_options(CLI::App* cmd, CommonOpts& o, bool plain_seed) {
  cmd->add_option("--omega-max", o.omega_max, "frequency cutoff per rotor");
  cmd->add_option("--tau-cg", o.tau_cg, "relative residual tolerance for CG");
  cmd->add_option("--tau-inv", o.tau_inv, "eigenvalue change tolerance");
  cmd->add_option("--max-iters", o.max_inv_iters, "inverse iteration cap");
  cmd->add_option("--max-cg-iters", o.max_cg_iters, "CG iteration cap");
  if (plain_seed) {
    cmd->add_option("--seed", o.eig_seed, "seed for the random start vector");
    o.seed_is_eig = true;
  }
}

std::size_t opt_count(const CLI::App* cmd, const std::string& name) {
  const CLI::Option* opt = cmd->get_option_no_throw(name);
  return opt ? opt->count() : 0;
}

RunConfig build_config(const CLI::App* cmd, const CommonOpts& o) {
  RunConfig cfg;
  if (opt_count(cmd, "--config")) {
    std::ifstream in(o.config);
    if (!in) throw std::runtime_error("cannot open " + o.config);
    nlohmann::json doc = nlohmann::json::parse(in);
    qrotor::apply_config_json(cfg, doc);
  }
  if (opt_count(cmd, "--graph")) {
    cfg.graph_file = o.graph_file;
    cfg.generator.reset();
  }
  auto set_generator = [&](const std::string& kind) {
    qrotor::GeneratorSpec spec;
    spec.kind = kind;
    if (kind == "grid") {
      spec.rows = o.grid[0];
      spec.cols = o.grid[1];
    } else {
      spec.n = kind == "chain" ? o.chain_n : o.complete_n;
    }
    spec.h = o.h;
    spec.beta = o.beta;
    cfg.generator = spec;
    cfg.graph_file.clear();
  };
  if (opt_count(cmd, "--chain")) set_generator("chain");
  if (opt_count(cmd, "--grid")) set_generator("grid");
  if (opt_count(cmd, "--complete")) set_generator("complete");
  if (cfg.generator) {
    if (opt_count(cmd, "--vertex-weight")) cfg.generator->h = o.h;
    if (opt_count(cmd, "--coupling")) cfg.generator->beta = o.beta;
  }
  if (opt_count(cmd, "--hidden")) cfg.hidden = o.hidden;
  if (opt_count(cmd, "--samples")) cfg.sampler.total_samples = o.samples;
  if (opt_count(cmd, "--burn-in")) cfg.sampler.burn_in = o.burn_in;
  if (opt_count(cmd, "--thin")) cfg.sampler.thin = o.thin;
  if (opt_count(cmd, "--proposal-width")) cfg.sampler.proposal_width = o.width;
  if (opt_count(cmd, "--seed")) {
    if (o.seed_is_eig)
      cfg.eig.seed = o.eig_seed;
    else
      cfg.sampler.seed = o.seed;
  }
  if (opt_count(cmd, "--sample-unit")) cfg.sampler.per_move_samples = o.sample_unit == "move";
  if (opt_count(cmd, "--chains")) cfg.sampler.chains = o.chains;
  if (opt_count(cmd, "--lr")) cfg.sr.learning_rate = o.learning_rate;
  if (opt_count(cmd, "--sr-shift")) cfg.sr.sr_shift = o.sr_shift;
  if (opt_count(cmd, "--steps")) cfg.sr.steps = o.steps;
  if (opt_count(cmd, "--omega-max")) cfg.omega_max = o.omega_max;
  if (opt_count(cmd, "--tau-cg")) cfg.eig.tau_cg = o.tau_cg;
  if (opt_count(cmd, "--tau-inv")) cfg.eig.tau_inv = o.tau_inv;
  if (opt_count(cmd, "--max-iters")) cfg.eig.max_inv_iters = o.max_inv_iters;
  if (opt_count(cmd, "--max-cg-iters")) cfg.eig.max_cg_iters = o.max_cg_iters;
  
  if (opt_count(cmd, "--report")) cfg.report_path = o.report;
  if (opt_count(cmd, "--summary")) cfg.summary_path = o.summary;
  if (opt_count(cmd, "--checkpoint")) cfg.checkpoint_path = o.checkpoint;
  if (opt_count(cmd, "--state-out")) cfg.state_out = o.state_out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ground-state solvers for quantum rotors on weighted graphs"};
  app.set_version_flag("--version", std::string(qrotor::kToolName) + " " +
                                        qrotor::kToolVersion);
  app.require_subcommand(1);

  CommonOpts vmc_opts, fourier_opts, jastrow_opts, compare_opts, sweep_opts;

  CLI::App* cmd_vmc = app.add_subcommand(
      "solve-vmc", "variational Monte Carlo with a rotor RBM trial state");
  add_graph_options(cmd_vmc, vmc_opts);
  add_vmc_options(cmd_vmc, vmc_opts);
  cmd_vmc->add_option("--report", vmc_opts.report, "per-step CSV trace");
  cmd_vmc->add_option("--summary", vmc_opts.summary, "summary JSON");
  cmd_vmc->add_option("--checkpoint", vmc_opts.checkpoint, "final parameters JSON");

  CLI::App* cmd_fourier = app.add_subcommand(
      "solve-fourier", "truncated Fourier-basis eigensolver (deterministic reference)");
  add_graph_options(cmd_fourier, fourier_opts);
  add_fourier_options(cmd_fourier, fourier_opts, true);
  cmd_fourier->add_option("--report", fourier_opts.report, "per-iteration CSV trace");
  cmd_fourier->add_option("--summary", fourier_opts.summary, "summary JSON");
  cmd_fourier->add_option("--state-out", fourier_opts.state_out,
                          "binary ground-state coefficient file");

  CLI::App* cmd_jastrow = app.add_subcommand(
      "solve-jastrow", "closed-form Jastrow baseline for uniform chains");
  add_graph_options(cmd_jastrow, jastrow_opts);
  cmd_jastrow->add_option("--summary", jastrow_opts.summary, "summary JSON");

  CLI::App* cmd_compare = app.add_subcommand(
      "compare", "run fourier + vmc (+ jastrow on chains) on one graph");
  add_graph_options(cmd_compare, compare_opts);
  add_vmc_options(cmd_compare, compare_opts);
  add_fourier_options(cmd_compare, compare_opts, false);
  std::string compare_csv, compare_json, compare_table;
  cmd_compare->add_option("--csv", compare_csv, "comparison table CSV");
  cmd_compare->add_option("--json", compare_json, "comparison JSON (includes wall times)");
  cmd_compare->add_option("--table", compare_table, "human-readable table file");

  CLI::App* cmd_sweep = app.add_subcommand(
      "sweep-hidden", "repeat the VMC run over several hidden-unit counts");
  add_graph_options(cmd_sweep, sweep_opts);
  add_vmc_options(cmd_sweep, sweep_opts);
  std::vector<int> sweep_m;
  std::vector<int> sweep_snapshots{100, 1000};
  bool sweep_parallel = false;
  std::string sweep_csv, sweep_json;
  cmd_sweep->add_option("-m,--hidden-units", sweep_m, "hidden-unit counts to try")
      ->required();
  cmd_sweep->add_option("--snapshots", sweep_snapshots,
                        "optimization steps at which std/grad are recorded");
  cmd_sweep->add_flag("--parallel", sweep_parallel, "run entries in separate threads");
  cmd_sweep->add_option("--csv", sweep_csv, "sweep results CSV");
  cmd_sweep->add_option("--json", sweep_json, "sweep results JSON");

  CLI::App* cmd_gen = app.add_subcommand("gen-graph", "write a generated graph to JSON");
  CommonOpts gen_opts;
  add_graph_options(cmd_gen, gen_opts);
  std::string gen_out;
  cmd_gen->add_option("-o,--output", gen_out, "output JSON path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    // human-readable progress goes to stderr; the summary JSON goes to stdout
    // unless the caller directed it to a file
    if (cmd_vmc->parsed()) {
      RunConfig cfg = build_config(cmd_vmc, vmc_opts);
      cfg.solver = qrotor::SolverKind::vmc;
      qrotor::SolveOutcome out = qrotor::run_vmc_driver(cfg, std::cerr);
      if (cfg.summary_path.empty()) std::cout << out.summary.dump(2) << '\n';
      return out.exit_code;
    }
    if (cmd_fourier->parsed()) {
      RunConfig cfg = build_config(cmd_fourier, fourier_opts);
      cfg.solver = qrotor::SolverKind::fourier;
      qrotor::SolveOutcome out = qrotor::run_fourier_driver(cfg, std::cerr);
      if (cfg.summary_path.empty()) std::cout << out.summary.dump(2) << '\n';
      return out.exit_code;
    }
    if (cmd_jastrow->parsed()) {
      RunConfig cfg = build_config(cmd_jastrow, jastrow_opts);
      cfg.solver = qrotor::SolverKind::jastrow;
      qrotor::SolveOutcome out = qrotor::run_jastrow_driver(cfg, std::cerr);
      if (cfg.summary_path.empty()) std::cout << out.summary.dump(2) << '\n';
      return out.exit_code;
    }
    if (cmd_compare->parsed()) {
      qrotor::CompareConfig cc;
      cc.base = build_config(cmd_compare, compare_opts);
      cc.csv_path = compare_csv;
      cc.json_path = compare_json;
      cc.table_path = compare_table;
      return qrotor::compare_solvers(cc, std::cerr);
    }
    if (cmd_sweep->parsed()) {
      qrotor::SweepConfig sc;
      sc.base = build_config(cmd_sweep, sweep_opts);
      sc.m_values = sweep_m;
      sc.snapshot_steps = sweep_snapshots;
      sc.parallel = sweep_parallel;
      sc.csv_path = sweep_csv;
      sc.json_path = sweep_json;
      return qrotor::hidden_unit_sweep(sc, std::cerr);
    }
    if (cmd_gen->parsed()) {
      RunConfig cfg = build_config(cmd_gen, gen_opts);
      const qrotor::RotorGraph g = qrotor::resolve_graph(cfg);
      qrotor::save_graph(gen_out, g);
      std::cout << "wrote " << gen_out << " (" << g.num_vertices() << " rotors, "
                << g.num_edges() << " edges)\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
