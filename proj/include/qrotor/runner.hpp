#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qrotor/fourier.hpp"
#include "qrotor/io.hpp"
#include "qrotor/vmc.hpp"

// Run orchestration shared by the CLI: config resolution, solver drivers,
// the solver-comparison workflow, and the hidden-unit sweep. Every run
// emits a JSON summary echoing its full configuration and seed, so a report
// suffices to reproduce the run. CSV time series carry wall-clock columns
// only where reruns are not expected to be byte-identical; the comparison
// table keeps wall times out of the CSV (they live in the JSON summary).

namespace qrotor {

inline constexpr const char* kToolName = "qrotor";
inline constexpr const char* kToolVersion = "0.1.0";

enum class SolverKind { vmc, fourier, jastrow };

std::string to_string(SolverKind k);
SolverKind solver_from_string(const std::string& s);

// Graph source: an explicit file or a generator spec.
struct GeneratorSpec {
  std::string kind;  // chain | grid | complete
  int n = 0;
  int rows = 0, cols = 0;
  double h = 5.0;
  double beta = 1.0;
};

struct RunConfig {
  SolverKind solver = SolverKind::vmc;
  std::string graph_file;
  std::optional<GeneratorSpec> generator;

  int hidden = 10;
  SamplerSettings sampler;
  SrSettings sr;

  int omega_max = 5;
  EigSettings eig;

  std::string report_path;
  std::string summary_path;
  std::string checkpoint_path;
  std::string state_out;
};

// Overlay the keys present in `doc` onto `cfg` (missing keys keep their
// current values). Throws std::runtime_error on malformed entries.
void apply_config_json(RunConfig& cfg, const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& cfg);

RotorGraph resolve_graph(const RunConfig& cfg);
RotorGraph build_graph(const GeneratorSpec& spec);

// True when the graph is a path 0-1-2-...-(n-1) with one common beta and one
// common h (the family the Jastrow closed form covers).
bool is_uniform_chain(const RotorGraph& g, double* h = nullptr, double* beta = nullptr);

struct SolveOutcome {
  double energy = 0.0;
  double energy_std = 0.0;   // VMC only
  long long retained = 0;    // VMC only
  double wall_ms = 0.0;
  nlohmann::json summary;
  int exit_code = 0;
};

// Drivers: run one solver per the config, write the configured reports, and
// log progress to `log`.
SolveOutcome run_vmc_driver(const RunConfig& cfg, std::ostream& log);
SolveOutcome run_fourier_driver(const RunConfig& cfg, std::ostream& log);
SolveOutcome run_jastrow_driver(const RunConfig& cfg, std::ostream& log);

struct CompareConfig {
  RunConfig base;  // graph source + per-solver settings
  std::string csv_path;
  std::string json_path;
  std::string table_path;  // human-readable text table
};

// Run the Fourier reference, the VMC optimizer, and (on uniform chains) the
// Jastrow baseline on one shared graph; emit CSV + JSON + text table. A VMC
// energy more than 3 standard errors below the Fourier lambda_min raises the
// alarm flag in every output. Returns a process exit code.
int compare_solvers(const CompareConfig& cfg, std::ostream& log);

struct SweepConfig {
  RunConfig base;
  std::vector<int> m_values;
  std::vector<int> snapshot_steps{100, 1000};
  bool parallel = false;
  std::string csv_path;
  std::string json_path;
};

// VMC runs over a list of hidden-unit counts; records std-dev and gradient
// norms at the snapshot steps plus the final 250-step rolling energy for
// each m. Entry k runs with seed base_seed + k so entries are independent.
int hidden_unit_sweep(const SweepConfig& cfg, std::ostream& log);

}  // namespace qrotor
