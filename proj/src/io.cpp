#include "structgp/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace structgp {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view field, std::size_t line_no, const char* what) {
  T value{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("dataset CSV line " + std::to_string(line_no) + ": bad " + what +
                                " '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Dataset read_dataset_csv(std::istream& in, int k) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("dataset CSV: empty input");
  const auto header = split(trim(line), ',');
  if (header.size() != 4 || header[0] != "patient" || header[1] != "task" || header[2] != "time" ||
      header[3] != "value") {
    throw std::invalid_argument("dataset CSV: header must be 'patient,task,time,value'");
  }
  std::vector<Observation> obs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != 4) {
      throw std::invalid_argument("dataset CSV line " + std::to_string(line_no) + ": expected 4 fields");
    }
    Observation o;
    o.patient = parse_number<int>(f[0], line_no, "patient") - 1;
    o.task = parse_number<int>(f[1], line_no, "task") - 1;
    o.time = parse_number<double>(f[2], line_no, "time");
    o.value = parse_number<double>(f[3], line_no, "value");
    if (o.patient < 0 || o.task < 0) {
      throw std::invalid_argument("dataset CSV line " + std::to_string(line_no) + ": ids are 1-based");
    }
    obs.push_back(o);
  }
  return Dataset(std::move(obs), k);
}

Dataset read_dataset_csv_file(const std::string& path, int k) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open dataset file '" + path + "'");
  return read_dataset_csv(in, k);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "patient,task,time,value\n";
  for (const auto& o : data.observations()) {
    out << (o.patient + 1) << ',' << (o.task + 1) << ',' << format_real(o.time) << ','
        << format_real(o.value) << '\n';
  }
}

void write_dataset_csv_file(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_dataset_csv(out, data);
}

nlohmann::json theta_to_json(const Theta& theta) {
  nlohmann::json S = nlohmann::json::array();
  for (int v = 0; v < theta.k(); ++v) {
    nlohmann::json row = nlohmann::json::array();
    for (int u = 0; u < theta.k(); ++u) row.push_back(theta.S(v, u));
    S.push_back(std::move(row));
  }
  nlohmann::json ell = nlohmann::json::array();
  for (int v = 0; v < theta.k(); ++v) ell.push_back(theta.ell[v]);
  return {{"k", theta.k()}, {"S", std::move(S)}, {"ell", std::move(ell)}, {"sigma", theta.sigma}};
}

Theta theta_from_json(const nlohmann::json& j) {
  const int k = j.at("k").get<int>();
  if (k <= 0) throw std::invalid_argument("theta JSON: k must be positive");
  const auto& S_rows = j.at("S");
  const auto& ell_vals = j.at("ell");
  if (!S_rows.is_array() || static_cast<int>(S_rows.size()) != k || !ell_vals.is_array() ||
      static_cast<int>(ell_vals.size()) != k) {
    throw std::invalid_argument("theta JSON: S must be k x k and ell length k");
  }
  Matrix S(k, k);
  Vector ell(k);
  for (int v = 0; v < k; ++v) {
    if (!S_rows[v].is_array() || static_cast<int>(S_rows[v].size()) != k) {
      throw std::invalid_argument("theta JSON: row " + std::to_string(v + 1) + " of S has wrong length");
    }
    for (int u = 0; u < k; ++u) S(v, u) = S_rows[v][u].get<double>();
    ell[v] = ell_vals[v].get<double>();
  }
  return Theta(std::move(S), std::move(ell), j.at("sigma").get<double>());
}

nlohmann::json dag_to_json(const Dag& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [from, to] : g.edges()) edges.push_back({from + 1, to + 1});
  return {{"k", g.k()}, {"edges", std::move(edges)}};
}

Dag dag_from_json(const nlohmann::json& j) {
  Dag g(j.at("k").get<int>());
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw std::invalid_argument("graph JSON: edges are [from, to] pairs");
    g.set_edge(e[0].get<int>() - 1, e[1].get<int>() - 1);
  }
  return g;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("'" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace structgp
