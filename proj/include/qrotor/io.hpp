#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qrotor/fourier.hpp"
#include "qrotor/graph.hpp"
#include "qrotor/rbm.hpp"

namespace qrotor {

// Graph file format: {"n": int, "edges": [[i, j, beta], ...], "h": [...]},
// 0-based vertex indices. "h" may be a single number (applied uniformly) or
// one entry per vertex.
RotorGraph graph_from_json(const nlohmann::json& doc);
nlohmann::json graph_to_json(const RotorGraph& g);
RotorGraph load_graph(const std::string& path);
void save_graph(const std::string& path, const RotorGraph& g);

// Parameter checkpoints: {"m": int, "n": int, "params": [P doubles]} in flat
// order (a row-major, b row-major, c row-major). Doubles survive the JSON
// round trip bit-exactly.
void save_params(const std::string& path, const RbmParams<double>& p);
RbmParams<double> load_params(const std::string& path);

// Fourier states: 8-byte magic, int64 header {n, omega_max}, then the raw
// coefficient doubles; round-trips bit-exactly.
void save_fourier_state(const std::string& path, const FourierState<double>& s);
FourierState<double> load_fourier_state(const std::string& path);

// Shortest text form that parses back to exactly the same double.
std::string format_double(double x);

// Line-oriented CSV with '\n' endings and no quoting; cells are preformatted.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
};

}  // namespace qrotor
