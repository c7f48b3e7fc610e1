#include "qrotor/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "qrotor/hamiltonian.hpp"
#include "qrotor/jastrow.hpp"

namespace qrotor {

namespace {

constexpr int kRollingWindow = 250;

double final_rolling_energy(const VmcReport& report) {
  if (report.steps.empty()) return 0.0;
  return rolling_average(report.energy_series(), kRollingWindow).back();
}

nlohmann::json sampler_to_json(const SamplerSettings& s) {
  return {{"total_samples", s.total_samples},
          {"burn_in", s.burn_in},
          {"thin", s.thin},
          {"proposal_width", s.proposal_width},
          {"seed", s.seed},
          {"sample_unit", s.per_move_samples ? "move" : "sweep"},
          {"chains", s.chains}};
}

nlohmann::json sr_to_json(const SrSettings& s) {
  return {{"learning_rate", s.learning_rate},
          {"sr_shift", s.sr_shift},
          {"steps", s.steps}};
}

nlohmann::json eig_to_json(const EigSettings& s) {
  return {{"tau_cg", s.tau_cg},
          {"tau_inv", s.tau_inv},
          {"max_inv_iters", s.max_inv_iters},
          {"max_cg_iters", s.max_cg_iters},
          {"seed", s.seed}};
}

nlohmann::json base_summary(const RunConfig& cfg, const RotorGraph& g) {
  nlohmann::json doc;
  doc["tool"] = kToolName;
  doc["version"] = kToolVersion;
  doc["solver"] = to_string(cfg.solver);
  doc["config"] = config_to_json(cfg);
  doc["graph"] = graph_to_json(g);
  return doc;
}

void maybe_write_summary(const std::string& path, const nlohmann::json& doc) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace

std::string to_string(SolverKind k) {
  switch (k) {
    case SolverKind::vmc: return "vmc";
    case SolverKind::fourier: return "fourier";
    case SolverKind::jastrow: return "jastrow";
  }
  return "?";
}

SolverKind solver_from_string(const std::string& s) {
  if (s == "vmc") return SolverKind::vmc;
  if (s == "fourier") return SolverKind::fourier;
  if (s == "jastrow") return SolverKind::jastrow;
  throw std::runtime_error("unknown solver \"" + s + "\" (expected vmc|fourier|jastrow)");
}

void apply_config_json(RunConfig& cfg, const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::runtime_error("config: expected a JSON object");
  if (doc.contains("solver")) cfg.solver = solver_from_string(doc.at("solver").get<std::string>());
  if (doc.contains("graph")) {
    const auto& gsrc = doc.at("graph");
    if (gsrc.contains("file")) {
      cfg.graph_file = gsrc.at("file").get<std::string>();
      cfg.generator.reset();
    } else if (gsrc.contains("generator")) {
      const auto& gen = gsrc.at("generator");
      GeneratorSpec spec;
      spec.kind = gen.at("kind").get<std::string>();
      if (gen.contains("n")) spec.n = gen.at("n").get<int>();
      if (gen.contains("rows")) spec.rows = gen.at("rows").get<int>();
      if (gen.contains("cols")) spec.cols = gen.at("cols").get<int>();
      if (gen.contains("h")) spec.h = gen.at("h").get<double>();
      if (gen.contains("beta")) spec.beta = gen.at("beta").get<double>();
      cfg.generator = spec;
      cfg.graph_file.clear();
    } else {
      throw std::runtime_error("config: \"graph\" needs \"file\" or \"generator\"");
    }
  }
  if (doc.contains("hidden")) cfg.hidden = doc.at("hidden").get<int>();
  if (doc.contains("sampler")) {
    const auto& s = doc.at("sampler");
    if (s.contains("total_samples")) cfg.sampler.total_samples = s.at("total_samples").get<long long>();
    if (s.contains("burn_in")) cfg.sampler.burn_in = s.at("burn_in").get<long long>();
    if (s.contains("thin")) cfg.sampler.thin = s.at("thin").get<long long>();
    if (s.contains("proposal_width")) cfg.sampler.proposal_width = s.at("proposal_width").get<double>();
    if (s.contains("seed")) cfg.sampler.seed = s.at("seed").get<std::uint64_t>();
    if (s.contains("sample_unit")) {
      const std::string unit = s.at("sample_unit").get<std::string>();
      if (unit != "sweep" && unit != "move")
        throw std::runtime_error("config: sample_unit must be \"sweep\" or \"move\"");
      cfg.sampler.per_move_samples = unit == "move";
    }
    if (s.contains("chains")) cfg.sampler.chains = s.at("chains").get<int>();
  }
  if (doc.contains("sr")) {
    const auto& s = doc.at("sr");
    if (s.contains("learning_rate")) cfg.sr.learning_rate = s.at("learning_rate").get<double>();
    if (s.contains("sr_shift")) cfg.sr.sr_shift = s.at("sr_shift").get<double>();
    if (s.contains("steps")) cfg.sr.steps = s.at("steps").get<int>();
  }
  if (doc.contains("omega_max")) cfg.omega_max = doc.at("omega_max").get<int>();
  if (doc.contains("eig")) {
    const auto& s = doc.at("eig");
    if (s.contains("tau_cg")) cfg.eig.tau_cg = s.at("tau_cg").get<double>();
    if (s.contains("tau_inv")) cfg.eig.tau_inv = s.at("tau_inv").get<double>();
    if (s.contains("max_inv_iters")) cfg.eig.max_inv_iters = s.at("max_inv_iters").get<int>();
    if (s.contains("max_cg_iters")) cfg.eig.max_cg_iters = s.at("max_cg_iters").get<int>();
    if (s.contains("seed")) cfg.eig.seed = s.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("report")) cfg.report_path = doc.at("report").get<std::string>();
  if (doc.contains("summary")) cfg.summary_path = doc.at("summary").get<std::string>();
  if (doc.contains("checkpoint")) cfg.checkpoint_path = doc.at("checkpoint").get<std::string>();
  if (doc.contains("state_out")) cfg.state_out = doc.at("state_out").get<std::string>();
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json doc;
  doc["solver"] = to_string(cfg.solver);
  if (!cfg.graph_file.empty()) {
    doc["graph"] = {{"file", cfg.graph_file}};
  } else if (cfg.generator) {
    nlohmann::json gen{{"kind", cfg.generator->kind},
                       {"h", cfg.generator->h},
                       {"beta", cfg.generator->beta}};
    if (cfg.generator->n > 0) gen["n"] = cfg.generator->n;
    if (cfg.generator->rows > 0) gen["rows"] = cfg.generator->rows;
    if (cfg.generator->cols > 0) gen["cols"] = cfg.generator->cols;
    doc["graph"] = {{"generator", gen}};
  }
  doc["hidden"] = cfg.hidden;
  doc["sampler"] = sampler_to_json(cfg.sampler);
  doc["sr"] = sr_to_json(cfg.sr);
  doc["omega_max"] = cfg.omega_max;
  doc["eig"] = eig_to_json(cfg.eig);
  if (!cfg.report_path.empty()) doc["report"] = cfg.report_path;
  if (!cfg.summary_path.empty()) doc["summary"] = cfg.summary_path;
  if (!cfg.checkpoint_path.empty()) doc["checkpoint"] = cfg.checkpoint_path;
  if (!cfg.state_out.empty()) doc["state_out"] = cfg.state_out;
  return doc;
}

RotorGraph build_graph(const GeneratorSpec& spec) {
  if (spec.kind == "chain") {
    if (spec.n < 1) throw std::runtime_error("generator: chain needs n >= 1");
    return make_chain(spec.n, spec.h, spec.beta);
  }
  if (spec.kind == "grid") {
    if (spec.rows < 1 || spec.cols < 1)
      throw std::runtime_error("generator: grid needs rows >= 1 and cols >= 1");
    return make_grid(spec.rows, spec.cols, spec.h, spec.beta);
  }
  if (spec.kind == "complete") {
    if (spec.n < 1) throw std::runtime_error("generator: complete needs n >= 1");
    return make_complete(spec.n, spec.h, spec.beta);
  }
  throw std::runtime_error("generator: unknown kind \"" + spec.kind +
                           "\" (expected chain|grid|complete)");
}

RotorGraph resolve_graph(const RunConfig& cfg) {
  if (!cfg.graph_file.empty()) return load_graph(cfg.graph_file);
  if (cfg.generator) return build_graph(*cfg.generator);
  throw std::runtime_error("no graph given: pass --graph or a generator");
}

bool is_uniform_chain(const RotorGraph& g, double* h, double* beta) {
  const int n = g.num_vertices();
  if (n < 2 || g.num_edges() != n - 1) return false;
  const auto& edges = g.edges();
  for (int k = 0; k < n - 1; ++k) {
    if (edges[k].i != k || edges[k].j != k + 1) return false;
    if (edges[k].beta != edges[0].beta) return false;
  }
  double hval = 0.0;
  if (!g.uniform_vertex_weight(&hval)) return false;
  if (h) *h = hval;
  if (beta) *beta = edges[0].beta;
  return true;
}

SolveOutcome run_vmc_driver(const RunConfig& cfg, std::ostream& log) {
  const RotorGraph g = resolve_graph(cfg);
  if (cfg.hidden < 1) throw std::runtime_error("vmc: hidden unit count must be >= 1");

  std::mt19937_64 init_rng(cfg.sampler.seed);
  const RbmParams<double> init =
      random_params<double>(cfg.hidden, g.num_vertices(), 0.01, init_rng);

  std::unique_ptr<CsvWriter> csv;
  if (!cfg.report_path.empty()) {
    csv = std::make_unique<CsvWriter>(cfg.report_path);
    csv->row({"step", "energy_mean", "energy_std", "grad_norm", "acceptance_rate",
              "wall_ms"});
  }
  const int progress_every = std::max(1, cfg.sr.steps / 10);
  const auto t0 = std::chrono::steady_clock::now();
  VmcResult result = run_vmc(g, init, cfg.sampler, cfg.sr,
                             [&](const VmcStepRecord& rec) {
                               if (csv)
                                 csv->row({std::to_string(rec.step),
                                           format_double(rec.energy_mean),
                                           format_double(rec.energy_std),
                                           format_double(rec.grad_norm),
                                           format_double(rec.acceptance_rate),
                                           format_double(rec.wall_ms)});
                               if ((rec.step + 1) % progress_every == 0)
                                 log << "step " << rec.step + 1 << "/" << cfg.sr.steps
                                     << "  energy " << rec.energy_mean << "  std "
                                     << rec.energy_std << "  acc "
                                     << rec.acceptance_rate << '\n';
                             });
  const double wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();

  SolveOutcome out;
  out.wall_ms = wall_ms;
  out.energy = final_rolling_energy(result.report);
  if (!result.report.steps.empty()) out.energy_std = result.report.steps.back().energy_std;
  out.retained = result.report.retained_per_step;

  if (!cfg.checkpoint_path.empty() && !result.report.aborted)
    save_params(cfg.checkpoint_path, result.params);

  nlohmann::json doc = base_summary(cfg, g);
  doc["result"] = {
      {"final_energy", out.energy},
      {"final_energy_is", "250-step rolling average of per-step means"},
      {"last_step_energy", result.report.steps.empty()
                               ? 0.0
                               : result.report.steps.back().energy_mean},
      {"last_step_std", out.energy_std},
      {"retained_per_step", result.report.retained_per_step},
      {"steps_completed", result.report.steps.size()},
      {"aborted", result.report.aborted},
      {"abort_reason", result.report.abort_reason},
      {"floor_violations", result.report.floor_violations},
      {"wall_ms", wall_ms}};
  maybe_write_summary(cfg.summary_path, doc);
  out.summary = std::move(doc);

  if (result.report.aborted) {
    log << "vmc aborted: " << result.report.abort_reason << '\n';
    out.exit_code = 2;
  } else {
    log << "vmc energy (rolling mean) " << out.energy << "  last std "
        << out.energy_std << '\n';
  }
  return out;
}

SolveOutcome run_fourier_driver(const RunConfig& cfg, std::ostream& log) {
  const RotorGraph g = resolve_graph(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const EigResult<double> eig = inverse_power_iteration<double>(g, cfg.omega_max, cfg.eig);
  const double wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();

  if (!cfg.report_path.empty()) {
    CsvWriter csv(cfg.report_path);
    csv.row({"inv_iter", "lambda", "cg_iters", "residual", "wall_ms"});
    for (int k = 0; k < eig.inv_iters; ++k)
      csv.row({std::to_string(k + 1), format_double(eig.lambda_history[k + 1]),
               std::to_string(eig.cg_iters_per_inv[k]),
               format_double(eig.cg_residuals[k]),
               format_double(eig.iter_wall_ms[k])});
  }
  if (!cfg.state_out.empty()) save_fourier_state(cfg.state_out, eig.ground_state);

  if (eig.degenerate)
    log << "warning: disconnected graph; the ground state is degenerate and the "
           "returned eigenvector is an arbitrary member of the eigenspace\n";
  if (!eig.preconditioned)
    log << "warning: preconditioner diagonal not positive (mixed-sign couplings); "
           "ran unpreconditioned CG\n";

  SolveOutcome out;
  out.energy = eig.lambda_min;
  out.wall_ms = wall_ms;

  nlohmann::json doc = base_summary(cfg, g);
  doc["result"] = {{"lambda_min", eig.lambda_min},
                   {"mu", eigenvalue_lower_bound(g)},
                   {"inv_iters", eig.inv_iters},
                   {"cg_iters_per_inv", eig.cg_iters_per_inv},
                   {"converged", eig.converged},
                   {"preconditioned", eig.preconditioned},
                   {"degenerate", eig.degenerate},
                   {"wall_ms", wall_ms}};
  maybe_write_summary(cfg.summary_path, doc);
  out.summary = std::move(doc);

  if (!eig.converged) {
    log << "fourier: not converged within " << cfg.eig.max_inv_iters
        << " inverse iterations\n";
    out.exit_code = 2;
  } else {
    log << "fourier lambda_min " << format_double(eig.lambda_min) << " after "
        << eig.inv_iters << " inverse iterations\n";
  }
  return out;
}

SolveOutcome run_jastrow_driver(const RunConfig& cfg, std::ostream& log) {
  const RotorGraph g = resolve_graph(cfg);
  double h = 0.0, beta = 0.0;
  if (!is_uniform_chain(g, &h, &beta))
    throw std::runtime_error(
        "jastrow: closed form requires a chain graph with uniform h and beta");
  if (!(beta > 0.0))
    throw std::runtime_error("jastrow: optimizer requires beta > 0");

  const JastrowOptimum opt = optimize_uniform_weight(h, beta);
  JastrowChain jc;
  jc.n = g.num_vertices();
  jc.h = h;
  jc.beta = Eigen::VectorXd::Constant(jc.n - 1, beta);
  jc.w = Eigen::VectorXd::Constant(jc.n - 1, opt.w_star);
  const double total = jastrow_energy(jc);

  SolveOutcome out;
  out.energy = total;
  nlohmann::json doc = base_summary(cfg, g);
  doc["result"] = {{"w_star", opt.w_star},
                   {"energy_per_edge", opt.energy_per_edge},
                   {"total_energy", total}};
  maybe_write_summary(cfg.summary_path, doc);
  out.summary = std::move(doc);
  log << "jastrow w* " << format_double(opt.w_star) << "  energy/edge "
      << format_double(opt.energy_per_edge) << "  total " << format_double(total)
      << '\n';
  return out;
}

int compare_solvers(const CompareConfig& cfg, std::ostream& log) {
  RunConfig base = cfg.base;
  const RotorGraph g = resolve_graph(base);  // one shared graph for every solver

  log << "compare: fourier reference...\n";
  RunConfig fcfg = base;
  fcfg.solver = SolverKind::fourier;
  fcfg.report_path.clear();
  fcfg.summary_path.clear();
  fcfg.state_out.clear();
  const SolveOutcome fourier = run_fourier_driver(fcfg, log);

  log << "compare: vmc...\n";
  RunConfig vcfg = base;
  vcfg.solver = SolverKind::vmc;
  vcfg.report_path.clear();
  vcfg.summary_path.clear();
  vcfg.checkpoint_path.clear();
  const SolveOutcome vmc = run_vmc_driver(vcfg, log);

  double h = 0.0, beta = 0.0;
  const bool chain = is_uniform_chain(g, &h, &beta) && beta > 0.0;
  SolveOutcome jastrow;
  if (chain) {
    RunConfig jcfg = base;
    jcfg.solver = SolverKind::jastrow;
    jcfg.report_path.clear();
    jcfg.summary_path.clear();
    jastrow = run_jastrow_driver(jcfg, log);
  }

  const double se = vmc.retained > 0
                        ? vmc.energy_std / std::sqrt(static_cast<double>(vmc.retained))
                        : 0.0;
  const bool alarm = vmc.energy < fourier.energy - 3.0 * se;

  if (!cfg.csv_path.empty()) {
    CsvWriter csv(cfg.csv_path);
    csv.row({"solver", "energy", "std", "stderr", "diff_vs_fourier", "alarm"});
    csv.row({"fourier", format_double(fourier.energy), "", "", format_double(0.0), "0"});
    csv.row({"vmc", format_double(vmc.energy), format_double(vmc.energy_std),
             format_double(se), format_double(vmc.energy - fourier.energy),
             alarm ? "1" : "0"});
    if (chain)
      csv.row({"jastrow", format_double(jastrow.energy), "", "",
               format_double(jastrow.energy - fourier.energy), "0"});
  }

  nlohmann::json doc;
  doc["tool"] = kToolName;
  doc["version"] = kToolVersion;
  doc["config"] = config_to_json(base);
  doc["graph"] = graph_to_json(g);
  doc["fourier"] = {{"energy", fourier.energy}, {"wall_ms", fourier.wall_ms}};
  doc["vmc"] = {{"energy", vmc.energy},
                {"std", vmc.energy_std},
                {"stderr", se},
                {"retained_per_step", vmc.retained},
                {"diff_vs_fourier", vmc.energy - fourier.energy},
                {"wall_ms", vmc.wall_ms}};
  if (chain)
    doc["jastrow"] = {{"energy", jastrow.energy},
                      {"diff_vs_fourier", jastrow.energy - fourier.energy},
                      {"wall_ms", jastrow.wall_ms}};
  doc["alarm"] = alarm;
  if (!cfg.json_path.empty())
    maybe_write_summary(cfg.json_path, doc);
  else
    std::cout << doc.dump(2) << '\n';

  std::ostringstream table;
  table << std::setprecision(10);
  table << std::left << std::setw(10) << "solver" << std::right << std::setw(18)
        << "energy" << std::setw(16) << "std" << std::setw(18) << "diff" << '\n';
  table << std::left << std::setw(10) << "fourier" << std::right << std::setw(18)
        << fourier.energy << std::setw(16) << "-" << std::setw(18) << 0.0 << '\n';
  table << std::left << std::setw(10) << "vmc" << std::right << std::setw(18)
        << vmc.energy << std::setw(16) << vmc.energy_std << std::setw(18)
        << vmc.energy - fourier.energy << '\n';
  if (chain)
    table << std::left << std::setw(10) << "jastrow" << std::right << std::setw(18)
          << jastrow.energy << std::setw(16) << "-" << std::setw(18)
          << jastrow.energy - fourier.energy << '\n';
  if (alarm)
    table << "ALARM: vmc energy is more than 3 standard errors below the "
             "fourier reference\n";
  log << table.str();
  if (!cfg.table_path.empty()) {
    std::ofstream out(cfg.table_path);
    if (!out) throw std::runtime_error("cannot write " + cfg.table_path);
    out << table.str();
  }
  if (alarm)
    log << "ALARM: vmc below the variational floor; investigate the sampler\n";

  if (fourier.exit_code != 0 || vmc.exit_code != 0 || jastrow.exit_code != 0)
    return 2;
  return 0;
}

int hidden_unit_sweep(const SweepConfig& cfg, std::ostream& log) {
  if (cfg.m_values.empty())
    throw std::runtime_error("sweep: need at least one hidden-unit count");
  for (int m : cfg.m_values)
    if (m < 1) throw std::runtime_error("sweep: hidden-unit counts must be positive");

  const RotorGraph g = resolve_graph(cfg.base);
  const std::size_t count = cfg.m_values.size();
  std::vector<VmcResult> results(count);

  auto run_entry = [&](std::size_t idx) {
    SamplerSettings sampler = cfg.base.sampler;
    sampler.seed += static_cast<std::uint64_t>(idx);  // independent entries
    std::mt19937_64 init_rng(sampler.seed);
    const RbmParams<double> init = random_params<double>(
        cfg.m_values[idx], g.num_vertices(), 0.01, init_rng);
    results[idx] = run_vmc(g, init, sampler, cfg.base.sr);
  };

  if (cfg.parallel && count > 1) {
    std::vector<std::thread> workers;
    workers.reserve(count);
    for (std::size_t idx = 0; idx < count; ++idx) workers.emplace_back(run_entry, idx);
    for (std::thread& w : workers) w.join();
  } else {
    for (std::size_t idx = 0; idx < count; ++idx) {
      log << "sweep: m = " << cfg.m_values[idx] << "...\n";
      run_entry(idx);
    }
  }

  // snapshot records at the configured steps (clamped to the last step)
  auto record_at = [](const VmcReport& rep, int step) -> const VmcStepRecord& {
    for (const VmcStepRecord& rec : rep.steps)
      if (rec.step == step) return rec;
    return rep.steps.back();
  };

  std::vector<std::string> header{"m", "energy"};
  for (int s : cfg.snapshot_steps) {
    header.push_back("std_step" + std::to_string(s));
    header.push_back("grad_step" + std::to_string(s));
  }
  header.push_back("std_final");
  header.push_back("grad_final");

  nlohmann::json entries = nlohmann::json::array();
  std::unique_ptr<CsvWriter> csv;
  if (!cfg.csv_path.empty()) {
    csv = std::make_unique<CsvWriter>(cfg.csv_path);
    csv->row(header);
  }
  int exit_code = 0;
  for (std::size_t idx = 0; idx < count; ++idx) {
    const VmcReport& rep = results[idx].report;
    if (rep.aborted || rep.steps.empty()) {
      log << "sweep: m = " << cfg.m_values[idx] << " aborted: " << rep.abort_reason
          << '\n';
      exit_code = 2;
      continue;
    }
    const double energy = final_rolling_energy(rep);
    std::vector<std::string> cells{std::to_string(cfg.m_values[idx]),
                                   format_double(energy)};
    nlohmann::json entry{{"m", cfg.m_values[idx]}, {"energy", energy}};
    for (int s : cfg.snapshot_steps) {
      const VmcStepRecord& rec = record_at(rep, s);
      cells.push_back(format_double(rec.energy_std));
      cells.push_back(format_double(rec.grad_norm));
      entry["snapshots"][std::to_string(s)] = {{"std", rec.energy_std},
                                               {"grad_norm", rec.grad_norm}};
    }
    const VmcStepRecord& last = rep.steps.back();
    cells.push_back(format_double(last.energy_std));
    cells.push_back(format_double(last.grad_norm));
    entry["final"] = {{"std", last.energy_std}, {"grad_norm", last.grad_norm}};
    if (csv) csv->row(cells);
    entries.push_back(entry);
    log << "sweep: m = " << cfg.m_values[idx] << "  energy " << energy << "  std "
        << last.energy_std << '\n';
  }

  nlohmann::json doc;
  doc["tool"] = kToolName;
  doc["version"] = kToolVersion;
  doc["config"] = config_to_json(cfg.base);
  doc["m_values"] = cfg.m_values;
  doc["snapshot_steps"] = cfg.snapshot_steps;
  doc["graph"] = graph_to_json(g);
  doc["entries"] = entries;
  if (!cfg.json_path.empty())
    maybe_write_summary(cfg.json_path, doc);
  else
    std::cout << doc.dump(2) << '\n';
  return exit_code;
}

}  // namespace qrotor
