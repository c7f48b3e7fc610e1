#include "qrotor/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace qrotor {

namespace {

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return doc;
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump(2) << '\n';
}

constexpr char kStateMagic[8] = {'Q', 'R', 'F', 'S', 'T', 'A', 'T', 'E'};

}  // namespace

RotorGraph graph_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("n") || !doc.contains("edges"))
    throw std::runtime_error("graph json: need an object with \"n\" and \"edges\"");
  const int n = doc.at("n").get<int>();
  std::vector<Edge> edges;
  for (const auto& e : doc.at("edges")) {
    if (!e.is_array() || e.size() != 3)
      throw std::runtime_error("graph json: each edge must be [i, j, beta]");
    edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
  }
  Eigen::VectorXd h;
  if (!doc.contains("h")) {
    throw std::runtime_error("graph json: missing \"h\"");
  } else if (doc.at("h").is_number()) {
    h = Eigen::VectorXd::Constant(n, doc.at("h").get<double>());
  } else {
    const auto& arr = doc.at("h");
    h.resize(static_cast<Eigen::Index>(arr.size()));
    for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = arr.at(i).get<double>();
  }
  return RotorGraph(n, std::move(edges), std::move(h));
}

nlohmann::json graph_to_json(const RotorGraph& g) {
  nlohmann::json doc;
  doc["n"] = g.num_vertices();
  doc["edges"] = nlohmann::json::array();
  for (const Edge& e : g.edges()) doc["edges"].push_back({e.i, e.j, e.beta});
  doc["h"] = std::vector<double>(g.vertex_weights().begin(), g.vertex_weights().end());
  return doc;
}

RotorGraph load_graph(const std::string& path) {
  try {
    return graph_from_json(load_json_file(path));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void save_graph(const std::string& path, const RotorGraph& g) {
  write_json_file(path, graph_to_json(g));
}

void save_params(const std::string& path, const RbmParams<double>& p) {
  nlohmann::json doc;
  doc["m"] = p.hidden_count();
  doc["n"] = p.visible_count();
  const Eigen::VectorXd flat = flatten(p);
  doc["params"] = std::vector<double>(flat.begin(), flat.end());
  write_json_file(path, doc);
}

RbmParams<double> load_params(const std::string& path) {
  const nlohmann::json doc = load_json_file(path);
  if (!doc.contains("m") || !doc.contains("n") || !doc.contains("params"))
    throw std::runtime_error(path + ": checkpoint needs \"m\", \"n\", \"params\"");
  const Eigen::Index m = doc.at("m").get<Eigen::Index>();
  const Eigen::Index n = doc.at("n").get<Eigen::Index>();
  const auto& arr = doc.at("params");
  Eigen::VectorXd flat(static_cast<Eigen::Index>(arr.size()));
  for (Eigen::Index k = 0; k < flat.size(); ++k) flat(k) = arr.at(k).get<double>();
  try {
    return unflatten<double>(flat, m, n);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void save_fourier_state(const std::string& path, const FourierState<double>& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kStateMagic, sizeof(kStateMagic));
  const std::int64_t header[2] = {s.n, s.omega_max};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(s.coeffs.data()),
            static_cast<std::streamsize>(sizeof(double) * s.coeffs.size()));
  if (!out) throw std::runtime_error("short write to " + path);
}

FourierState<double> load_fourier_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kStateMagic, sizeof(magic)) != 0)
    throw std::runtime_error(path + ": not a fourier state file");
  std::int64_t header[2];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw std::runtime_error(path + ": truncated header");
  FourierState<double> s;
  s.n = static_cast<int>(header[0]);
  s.omega_max = static_cast<int>(header[1]);
  if (s.n < 1 || s.omega_max < 1)
    throw std::runtime_error(path + ": invalid state header");
  s.coeffs.resize(fourier_size(s.n, s.omega_max));
  in.read(reinterpret_cast<char*>(s.coeffs.data()),
          static_cast<std::streamsize>(sizeof(double) * s.coeffs.size()));
  if (!in) throw std::runtime_error(path + ": truncated coefficients");
  return s;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path) {
  if (!out_) throw std::runtime_error("cannot write " + path);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

}  // namespace qrotor
