/*
 * Copyright 2026 The gnoc authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GNOC_IO_HPP_
#define GNOC_IO_HPP_

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gnoc/distopt.hpp"
#include "gnoc/dynamics.hpp"
#include "gnoc/errors.hpp"
#include "gnoc/gains.hpp"
#include "gnoc/linearization.hpp"
#include "gnoc/lmi.hpp"
#include "gnoc/trajectory.hpp"

// File formats.  Everything here is plain text: a flat key=value run
// configuration, a sectioned bounds file, a JSON gain certificate, and the
// CSV outputs of optimization runs.  Doubles are written in shortest
// round-trip form, so write->read->write is the identity.
namespace gnoc {

namespace detail_io {

inline std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace detail_io

// ---------------------------------------------------------------------------
// Flat key=value configuration: one `key = value` pair per line, `#` starts
// a comment, blank lines ignored, duplicate keys rejected.
// ---------------------------------------------------------------------------
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig from_string(const std::string& text,
                                    const std::string& origin = "<string>") {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = detail_io::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw IoError(origin + ":" + std::to_string(lineno) +
                      ": expected 'key = value', got '" + line + "'");
      }
      const std::string key = detail_io::trim(line.substr(0, eq));
      const std::string value = detail_io::trim(line.substr(eq + 1));
      if (key.empty()) {
        throw IoError(origin + ":" + std::to_string(lineno) + ": empty key");
      }
      if (cfg.items_.count(key)) {
        throw IoError(origin + ":" + std::to_string(lineno) +
                      ": duplicate key '" + key + "'");
      }
      cfg.items_[key] = value;
    }
    return cfg;
  }

  static KeyValueConfig from_file(const std::string& path) {
    std::ifstream in = detail_io::open_in(path);
    std::ostringstream text;
    text << in.rdbuf();
    return from_string(text.str(), path);
  }

  bool has(const std::string& key) const { return items_.count(key) > 0; }

  void set(const std::string& key, std::string value) {
    items_[key] = std::move(value);
  }

  std::string get_string(const std::string& key) const {
    const auto it = items_.find(key);
    if (it == items_.end()) {
      throw ConfigError("config: missing required key '" + key + "'");
    }
    return it->second;
  }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const {
    const auto it = items_.find(key);
    return it == items_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key) const {
    return parse_double(key, get_string(key));
  }
  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  int get_int(const std::string& key) const {
    const std::string v = get_string(key);
    try {
      size_t pos = 0;
      const int out = std::stoi(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + key + "' is not an integer: '" + v +
                        "'");
    }
  }
  int get_int(const std::string& key, int fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get_string(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: key '" + key + "' is not a boolean: '" + v +
                      "'");
  }

  const std::map<std::string, std::string>& items() const { return items_; }

 private:
  double parse_double(const std::string& key, const std::string& v) const {
    try {
      size_t pos = 0;
      const double out = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + key + "' is not a number: '" + v +
                        "'");
    }
  }

  std::map<std::string, std::string> items_;
};

// ---------------------------------------------------------------------------
// Bounds file: `[varying]` rows `i j row col lo hi`, `[constant]` rows
// `i j row col value`.
// ---------------------------------------------------------------------------
inline void write_bounds(std::ostream& out, const EntryBounds& bounds) {
  out << "# per-entry interval bounds of the state-coupling blocks\n";
  out << "[varying]\n";
  out << "# i j row col lo hi\n";
  for (const VaryingEntry& e : bounds.varying) {
    out << e.pos.i << ' ' << e.pos.j << ' ' << e.pos.row << ' ' << e.pos.col
        << ' ' << detail_io::format_double(e.lo) << ' '
        << detail_io::format_double(e.hi) << '\n';
  }
  out << "[constant]\n";
  out << "# i j row col value\n";
  for (const ConstantEntry& e : bounds.constant) {
    out << e.pos.i << ' ' << e.pos.j << ' ' << e.pos.row << ' ' << e.pos.col
        << ' ' << detail_io::format_double(e.value) << '\n';
  }
}

inline void write_bounds(const std::string& path, const EntryBounds& bounds) {
  auto out = detail_io::open_out(path);
  write_bounds(out, bounds);
}

inline EntryBounds read_bounds(std::istream& in,
                               const std::string& origin = "<stream>") {
  EntryBounds bounds;
  std::string line;
  int lineno = 0;
  enum class Section { None, Varying, Constant } section = Section::None;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail_io::trim(line);
    if (line.empty()) continue;
    if (line == "[varying]") {
      section = Section::Varying;
      continue;
    }
    if (line == "[constant]") {
      section = Section::Constant;
      continue;
    }
    if (line.front() == '[') {
      throw IoError(origin + ":" + std::to_string(lineno) +
                    ": unknown section '" + line + "'");
    }
    std::istringstream row(line);
    EntryPosition pos;
    if (!(row >> pos.i >> pos.j >> pos.row >> pos.col)) {
      throw IoError(origin + ":" + std::to_string(lineno) +
                    ": expected 'i j row col ...'");
    }
    if (section == Section::Varying) {
      double lo = 0.0, hi = 0.0;
      std::string tail;
      if (!(row >> lo >> hi) || (row >> tail)) {
        throw IoError(origin + ":" + std::to_string(lineno) +
                      ": varying rows need exactly 'i j row col lo hi'");
      }
      bounds.varying.push_back({pos, lo, hi});
    } else if (section == Section::Constant) {
      double value = 0.0;
      std::string tail;
      if (!(row >> value) || (row >> tail)) {
        throw IoError(origin + ":" + std::to_string(lineno) +
                      ": constant rows need exactly 'i j row col value'");
      }
      bounds.constant.push_back({pos, value});
    } else {
      throw IoError(origin + ":" + std::to_string(lineno) +
                    ": row before any [varying]/[constant] section");
    }
  }
  return bounds;
}

inline EntryBounds read_bounds(const std::string& path) {
  auto in = detail_io::open_in(path);
  return read_bounds(in, path);
}

// ---------------------------------------------------------------------------
// Certificate JSON.
// ---------------------------------------------------------------------------
namespace detail_io {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  auto& data = j["data"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return j;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j,
                                        const std::string& what) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
      !j.contains("data")) {
    throw IoError("certificate: field '" + what +
                  "' is not a matrix object");
  }
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 ||
      static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw IoError("certificate: matrix '" + what + "' has " +
                  std::to_string(data.size()) + " entries for " +
                  std::to_string(rows) + "x" + std::to_string(cols));
  }
  Eigen::MatrixXd m(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
  }
  return m;
}

}  // namespace detail_io

inline nlohmann::json certificate_to_json(const SynthesisCertificate& cert) {
  using detail_io::matrix_to_json;
  nlohmann::json j;
  j["kind"] = "gain-certificate";
  j["version"] = 1;
  j["success"] = cert.success;
  j["failure_reason"] = cert.failure_reason;
  j["rounds"] = cert.rounds;
  j["sdp_iterations"] = cert.sdp_iterations;
  j["nu"] = cert.nu;
  j["delta_abs"] = cert.delta_abs;
  j["sparsity_tol"] = cert.sparsity_tol;
  j["state_dims"] = cert.state_dims;
  j["input_dims"] = cert.input_dims;
  j["base"] = matrix_to_json(cert.base);
  auto& entries = j["entries"] = nlohmann::json::array();
  for (const CertificateEntry& e : cert.entries) {
    entries.push_back({{"agent_row", e.agent_row},
                       {"agent_col", e.agent_col},
                       {"row", e.row},
                       {"col", e.col},
                       {"lo", e.lo},
                       {"hi", e.hi}});
  }
  j["input_matrix"] = matrix_to_json(cert.input_matrix);
  j["perf_state"] = matrix_to_json(cert.perf_state);
  j["perf_input"] = matrix_to_json(cert.perf_input);
  auto& masks = j["masks"] = nlohmann::json::array();
  for (const auto& mask : cert.masks) {
    nlohmann::json m = nlohmann::json::array();
    for (const auto& [a, b] : mask) m.push_back({a, b});
    masks.push_back(std::move(m));
  }
  auto dump = [](const std::vector<Eigen::MatrixXd>& ms) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : ms) arr.push_back(detail_io::matrix_to_json(m));
    return arr;
  };
  j["witness_g"] = dump(cert.witness_g);
  j["witness_s"] = dump(cert.witness_s);
  j["raw_gains"] = dump(cert.raw_gains);
  j["gains"] = dump(cert.gains);
  j["residual_history"] = cert.residual_history;
  j["max_sparsity_violation"] = cert.max_sparsity_violation;
  j["witness_delta"] = cert.witness_delta;
  j["lmi_blocks"] = cert.lmi_blocks;
  j["equality_rows"] = cert.equality_rows;
  return j;
}

inline SynthesisCertificate certificate_from_json(const nlohmann::json& j) {
  using detail_io::matrix_from_json;
  if (!j.is_object() || j.value("kind", "") != "gain-certificate") {
    throw IoError("certificate: not a gain-certificate document");
  }
  if (j.value("version", 0) != 1) {
    throw IoError("certificate: unsupported version");
  }
  SynthesisCertificate cert;
  try {
    cert.success = j.at("success").get<bool>();
    cert.failure_reason = j.at("failure_reason").get<std::string>();
    cert.rounds = j.at("rounds").get<int>();
    cert.sdp_iterations = j.at("sdp_iterations").get<int>();
    cert.nu = j.at("nu").get<double>();
    cert.delta_abs = j.at("delta_abs").get<double>();
    cert.sparsity_tol = j.at("sparsity_tol").get<double>();
    cert.state_dims = j.at("state_dims").get<std::vector<int>>();
    cert.input_dims = j.at("input_dims").get<std::vector<int>>();
    cert.base = matrix_from_json(j.at("base"), "base");
    for (const auto& e : j.at("entries")) {
      cert.entries.push_back({e.at("agent_row").get<int>(),
                              e.at("agent_col").get<int>(),
                              e.at("row").get<int>(), e.at("col").get<int>(),
                              e.at("lo").get<double>(),
                              e.at("hi").get<double>()});
    }
    cert.input_matrix = matrix_from_json(j.at("input_matrix"), "input_matrix");
    cert.perf_state = matrix_from_json(j.at("perf_state"), "perf_state");
    cert.perf_input = matrix_from_json(j.at("perf_input"), "perf_input");
    for (const auto& mask : j.at("masks")) {
      std::vector<std::pair<int, int>> m;
      for (const auto& b : mask) {
        if (!b.is_array() || b.size() != 2) {
          throw IoError("certificate: mask blocks must be [row, col] pairs");
        }
        m.emplace_back(b[0].get<int>(), b[1].get<int>());
      }
      cert.masks.push_back(std::move(m));
    }
    auto load = [](const nlohmann::json& arr, const std::string& what) {
      std::vector<Eigen::MatrixXd> ms;
      for (const auto& m : arr) {
        ms.push_back(detail_io::matrix_from_json(m, what));
      }
      return ms;
    };
    cert.witness_g = load(j.at("witness_g"), "witness_g");
    cert.witness_s = load(j.at("witness_s"), "witness_s");
    cert.raw_gains = load(j.at("raw_gains"), "raw_gains");
    cert.gains = load(j.at("gains"), "gains");
    cert.residual_history =
        j.at("residual_history").get<std::vector<double>>();
    cert.max_sparsity_violation = j.at("max_sparsity_violation").get<double>();
    cert.witness_delta = j.at("witness_delta").get<double>();
    cert.lmi_blocks = j.at("lmi_blocks").get<int>();
    cert.equality_rows = j.at("equality_rows").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("certificate: malformed document: ") +
                  e.what());
  }
  const int P = cert.num_vertices();
  if (static_cast<int>(cert.masks.size()) != P ||
      static_cast<int>(cert.gains.size()) != P) {
    throw IoError("certificate: vertex-indexed arrays disagree with the "
                  "entry count");
  }
  return cert;
}

inline void write_certificate(const std::string& path,
                              const SynthesisCertificate& cert) {
  auto out = detail_io::open_out(path);
  out << certificate_to_json(cert).dump(2) << '\n';
}

inline SynthesisCertificate read_certificate(const std::string& path) {
  auto in = detail_io::open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": invalid JSON: " + e.what());
  }
  return certificate_from_json(j);
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = detail_io::open_out(path);
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// CSV outputs.  Columns follow the run-output contract: trajectories as
// (iter, agent, t, component, x, u) with the input cell empty where no
// input exists (t = T, or components past the input width).
// ---------------------------------------------------------------------------
inline void write_iterates_csv(std::ostream& out,
                               const std::vector<Trajectory>& iterates,
                               const CoupledSystem& sys) {
  out << "iter,agent,t,component,x,u\n";
  for (size_t k = 0; k < iterates.size(); ++k) {
    const Trajectory& tr = iterates[k];
    for (int i = 0; i < tr.num_agents(); ++i) {
      for (int t = 0; t <= tr.horizon(); ++t) {
        for (int c = 0; c < sys.state_dim(i); ++c) {
          out << k << ',' << i << ',' << t << ',' << c << ','
              << detail_io::format_double(tr.x(i, t)[c]) << ',';
          if (t < tr.horizon() && c < sys.input_dim(i)) {
            out << detail_io::format_double(tr.u(i, t)[c]);
          }
          out << '\n';
        }
      }
    }
  }
}

inline void write_iterates_csv(const std::string& path,
                               const std::vector<Trajectory>& iterates,
                               const CoupledSystem& sys) {
  auto out = detail_io::open_out(path);
  write_iterates_csv(out, iterates, sys);
}

inline void write_cost_csv(std::ostream& out,
                           const std::vector<IterationRecord>& history) {
  out << "iter,cost,direction_norm\n";
  for (const IterationRecord& r : history) {
    out << r.iteration << ',' << detail_io::format_double(r.cost) << ','
        << detail_io::format_double(r.direction_norm) << '\n';
  }
}

inline void write_cost_csv(const std::string& path,
                           const std::vector<IterationRecord>& history) {
  auto out = detail_io::open_out(path);
  write_cost_csv(out, history);
}

inline void write_trace_csv(std::ostream& out,
                            const std::vector<MessageRecord>& log) {
  out << "iter,phase,t,sender,receiver,payload_kind\n";
  for (const MessageRecord& m : log) {
    out << m.iteration << ',' << m.phase << ',' << m.t << ',' << m.sender
        << ',' << m.receiver << ','
        << (m.phase == 0 ? "state" : "adjoint") << '\n';
  }
}

inline void write_trace_csv(const std::string& path,
                            const std::vector<MessageRecord>& log) {
  auto out = detail_io::open_out(path);
  write_trace_csv(out, log);
}

inline void write_warnings_csv(
    std::ostream& out, const std::vector<std::vector<GainSaturation>>& clips) {
  out << "iter,agent,neighbor,row,col,value,excess\n";
  for (size_t k = 0; k < clips.size(); ++k) {
    for (const GainSaturation& s : clips[k]) {
      out << k << ',' << s.agent << ',' << s.neighbor << ',' << s.row << ','
          << s.col << ',' << detail_io::format_double(s.value) << ','
          << detail_io::format_double(s.excess) << '\n';
    }
  }
}

inline void write_warnings_csv(
    const std::string& path,
    const std::vector<std::vector<GainSaturation>>& clips) {
  auto out = detail_io::open_out(path);
  write_warnings_csv(out, clips);
}

// Time-varying gain tables: every block (i, j) is emitted, neighbor or not,
// so the zero pattern is visible in the data itself.  `component` flattens
// the block row-major: component = r * state_dim(j) + c.
inline void write_gains_csv(std::ostream& out,
                            const std::vector<Eigen::MatrixXd>& gains_by_time,
                            const std::vector<int>& state_dims,
                            const std::vector<int>& input_dims) {
  const int n = static_cast<int>(state_dims.size());
  std::vector<int> xoff(n + 1, 0), uoff(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    xoff[i + 1] = xoff[i] + state_dims[i];
    uoff[i + 1] = uoff[i] + input_dims[i];
  }
  out << "t,i,j,component,k_value\n";
  for (size_t t = 0; t < gains_by_time.size(); ++t) {
    const Eigen::MatrixXd& K = gains_by_time[t];
    if (K.rows() != uoff[n] || K.cols() != xoff[n]) {
      throw ShapeError("gains csv: matrix at t=" + std::to_string(t) +
                       " has wrong dimensions");
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int r = 0; r < input_dims[i]; ++r) {
          for (int c = 0; c < state_dims[j]; ++c) {
            out << t << ',' << i << ',' << j << ','
                << r * state_dims[j] + c << ','
                << detail_io::format_double(K(uoff[i] + r, xoff[j] + c))
                << '\n';
          }
        }
      }
    }
  }
}

inline void write_gains_csv(const std::string& path,
                            const std::vector<Eigen::MatrixXd>& gains_by_time,
                            const std::vector<int>& state_dims,
                            const std::vector<int>& input_dims) {
  auto out = detail_io::open_out(path);
  write_gains_csv(out, gains_by_time, state_dims, input_dims);
}

// Tracking error against a per-agent reference point.
inline void write_error_csv(std::ostream& out, const Trajectory& traj,
                            const std::vector<Eigen::VectorXd>& desired) {
  if (static_cast<int>(desired.size()) != traj.num_agents()) {
    throw ShapeError("error csv: reference has wrong agent count");
  }
  out << "t,agent,component,error\n";
  for (int t = 0; t <= traj.horizon(); ++t) {
    for (int i = 0; i < traj.num_agents(); ++i) {
      for (int c = 0; c < traj.x(i, t).size(); ++c) {
        out << t << ',' << i << ',' << c << ','
            << detail_io::format_double(traj.x(i, t)[c] - desired[i][c])
            << '\n';
      }
    }
  }
}

inline void write_error_csv(const std::string& path, const Trajectory& traj,
                            const std::vector<Eigen::VectorXd>& desired) {
  auto out = detail_io::open_out(path);
  write_error_csv(out, traj, desired);
}

// Standard output bundle of one optimizer run: iterate trajectories, cost
// history, message trace, and scheduling clips.  Returns the paths written.
// Without per-iterate details only the final trajectory and its clips are
// available, and they are written under iterate index 0.
inline std::vector<std::string> write_run_outputs(const std::string& dir,
                                                  const CoupledSystem& sys,
                                                  const DescentResult& res) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  auto emit = [&files, &dir](const std::string& name) {
    files.push_back(dir + "/" + name);
    return files.back();
  };
  if (res.iterates.empty()) {
    write_iterates_csv(emit("iterates.csv"), {res.trajectory}, sys);
    write_warnings_csv(emit("warnings.csv"), {res.saturations});
  } else {
    write_iterates_csv(emit("iterates.csv"), res.iterates, sys);
    write_warnings_csv(emit("warnings.csv"), res.clips);
  }
  write_cost_csv(emit("cost.csv"), res.history);
  write_trace_csv(emit("trace.csv"), res.messages.log);
  return files;
}

// ---------------------------------------------------------------------------
// Trajectory / curve input: the iterates.csv schema restricted to a single
// iterate.  Every (agent, t, component) state cell must be present; input
// cells may be empty exactly where the writer leaves them empty.
// ---------------------------------------------------------------------------
inline Trajectory read_trajectory_csv(std::istream& in,
                                      const CoupledSystem& sys,
                                      const std::string& origin = "<stream>") {
  std::string line;
  if (!std::getline(in, line) ||
      detail_io::trim(line) != "iter,agent,t,component,x,u") {
    throw IoError(origin + ": expected header 'iter,agent,t,component,x,u'");
  }
  struct Cell {
    int agent, t, component;
    double x;
    bool has_u;
    double u;
  };
  std::vector<Cell> cells;
  int horizon = 0;
  int lineno = 1;
  long iter_seen = -1;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail_io::trim(line);
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (row.eof() && !line.empty() && line.back() == ',') fields.push_back("");
    if (fields.size() != 6) {
      throw IoError(origin + ":" + std::to_string(lineno) +
                    ": expected 6 columns");
    }
    try {
      Cell cell{};
      const long iter = std::stol(fields[0]);
      if (iter_seen < 0) iter_seen = iter;
      if (iter != iter_seen) {
        throw IoError(origin + ":" + std::to_string(lineno) +
                      ": multiple iterates in a curve file");
      }
      cell.agent = std::stoi(fields[1]);
      cell.t = std::stoi(fields[2]);
      cell.component = std::stoi(fields[3]);
      cell.x = std::stod(fields[4]);
      cell.has_u = !detail_io::trim(fields[5]).empty();
      cell.u = cell.has_u ? std::stod(fields[5]) : 0.0;
      if (cell.agent < 0 || cell.agent >= sys.num_agents() || cell.t < 0 ||
          cell.component < 0 ||
          cell.component >= sys.state_dim(cell.agent)) {
        throw IoError(origin + ":" + std::to_string(lineno) +
                      ": cell indices out of range");
      }
      horizon = std::max(horizon, cell.t);
      cells.push_back(cell);
    } catch (const IoError&) {
      throw;
    } catch (const std::exception&) {
      throw IoError(origin + ":" + std::to_string(lineno) +
                    ": malformed numeric field");
    }
  }
  if (horizon < 1) {
    throw IoError(origin + ": curve needs at least one transition");
  }
  Trajectory tr(sys, horizon);
  std::vector<std::vector<std::vector<char>>> seen(sys.num_agents());
  for (int i = 0; i < sys.num_agents(); ++i) {
    seen[i].assign(horizon + 1,
                   std::vector<char>(sys.state_dim(i), 0));
  }
  for (const Cell& cell : cells) {
    if (seen[cell.agent][cell.t][cell.component]) {
      throw IoError(origin + ": duplicate cell (agent " +
                    std::to_string(cell.agent) + ", t " +
                    std::to_string(cell.t) + ", component " +
                    std::to_string(cell.component) + ")");
    }
    seen[cell.agent][cell.t][cell.component] = 1;
    tr.x(cell.agent, cell.t)[cell.component] = cell.x;
    if (cell.has_u) {
      if (cell.t >= horizon ||
          cell.component >= sys.input_dim(cell.agent)) {
        throw IoError(origin + ": input value in a cell that has no input");
      }
      tr.u(cell.agent, cell.t)[cell.component] = cell.u;
    }
  }
  for (int i = 0; i < sys.num_agents(); ++i) {
    for (int t = 0; t <= horizon; ++t) {
      for (int c = 0; c < sys.state_dim(i); ++c) {
        if (!seen[i][t][c]) {
          throw IoError(origin + ": missing cell (agent " +
                        std::to_string(i) + ", t " + std::to_string(t) +
                        ", component " + std::to_string(c) + ")");
        }
      }
    }
  }
  return tr;
}

inline Trajectory read_trajectory_csv(const std::string& path,
                                      const CoupledSystem& sys) {
  auto in = detail_io::open_in(path);
  return read_trajectory_csv(in, sys, path);
}

}  // namespace gnoc

#endif  // GNOC_IO_HPP_
