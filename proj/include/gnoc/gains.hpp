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

#ifndef GNOC_GAINS_HPP_
#define GNOC_GAINS_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "gnoc/errors.hpp"
#include "gnoc/graph.hpp"
#include "gnoc/lmi.hpp"

// Online gain evaluation.  The certificate's vertex gains are blended with
// scheduling weights read off the current state-coupling blocks.  Under the
// single-block mask rule every vertex gain lives entirely inside the block
// of the scalar it pins, so the blend for block (i, j) needs only the
// entries of the (i, j) coupling — information agent i computes from its
// own dynamics and its neighbors' states.  Each agent therefore carries a
// small table instead of the full certificate.
namespace gnoc {

// Scheduling value observed outside its interval; the weight is computed
// from the clipped value and the excursion is reported.
struct GainSaturation {
  int agent = 0;
  int neighbor = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
  double excess = 0.0;
};

class LocalGainTable {
 public:
  // One varying scalar of the (agent, neighbor) coupling block together
  // with the gain blocks of the two vertices that pin it.
  struct Entry {
    int row = 0;
    int col = 0;
    double lo = 0.0;
    double hi = 0.0;
    Eigen::MatrixXd lower_gain;  // input_dim x neighbor_state_dim
    Eigen::MatrixXd upper_gain;
  };

  LocalGainTable(int agent, int state_dim, int input_dim,
                 int num_varying_total)
      : agent_(agent),
        state_dim_(state_dim),
        input_dim_(input_dim),
        scale_(1.0 / num_varying_total) {}

  void add_neighbor(int neighbor, int state_dim, std::vector<Entry> entries) {
    neighbors_.push_back(neighbor);
    state_dims_.push_back(state_dim);
    entries_.push_back(std::move(entries));
  }

  int agent() const { return agent_; }
  int input_dim() const { return input_dim_; }
  const std::vector<int>& neighbors() const { return neighbors_; }

  // Gain block toward `neighbor`, scheduled on the current state-coupling
  // block (the jacobian of this agent's dynamics with respect to that
  // neighbor's state).
  Eigen::MatrixXd gain_block(int neighbor, const Eigen::MatrixXd& coupling,
                             std::vector<GainSaturation>* sat = nullptr) const {
    const auto it = std::find(neighbors_.begin(), neighbors_.end(), neighbor);
    if (it == neighbors_.end()) {
      throw LocalityError("gain table of agent " + std::to_string(agent_) +
                          " has no block for agent " +
                          std::to_string(neighbor));
    }
    const size_t idx = it - neighbors_.begin();
    const int nx_j = state_dims_[idx];
    if (coupling.rows() != state_dim_ || coupling.cols() != nx_j) {
      throw ShapeError("gain table: coupling block has wrong dimensions");
    }
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(input_dim_, nx_j);
    for (const Entry& e : entries_[idx]) {
      const double value = coupling(e.row, e.col);
      double lam = (e.hi - value) / (e.hi - e.lo);
      if (lam < 0.0 || lam > 1.0) {
        if (sat) {
          const double excess = value < e.lo ? e.lo - value : value - e.hi;
          sat->push_back({agent_, neighbor, e.row, e.col, value, excess});
        }
        lam = std::clamp(lam, 0.0, 1.0);
      }
      K += scale_ * (lam * e.lower_gain + (1.0 - lam) * e.upper_gain);
    }
    return K;
  }

 private:
  int agent_ = 0;
  int state_dim_ = 0;
  int input_dim_ = 0;
  double scale_ = 0.0;
  std::vector<int> neighbors_;
  std::vector<int> state_dims_;
  std::vector<std::vector<Entry>> entries_;
};

// Splits a certificate into per-agent tables.  Requires single-block masks:
// when a vertex gain is allowed support beyond its own block, the blended
// gain depends on couplings the owning agent cannot observe, and no local
// table exists.
inline std::vector<LocalGainTable> build_gain_tables(
    const SynthesisCertificate& cert, const Graph& graph) {
  const int n = graph.num_agents();
  if (static_cast<int>(cert.state_dims.size()) != n ||
      static_cast<int>(cert.input_dims.size()) != n) {
    throw ShapeError("gain tables: certificate and graph disagree on agents");
  }
  const int S = cert.num_varying();
  for (int p = 0; p < cert.num_vertices(); ++p) {
    const auto& e = cert.entries[cert.vertex_scalar(p)];
    if (cert.masks[p].size() != 1 ||
        cert.masks[p][0] != std::make_pair(e.agent_row, e.agent_col)) {
      throw ConfigError(
          "gain tables: certificate masks extend beyond the owning blocks; "
          "only single-block certificates can be evaluated locally");
    }
  }
  for (const CertificateEntry& e : cert.entries) {
    if (!graph.adjacent(e.agent_row, e.agent_col)) {
      throw ShapeError("gain tables: certificate entry outside the graph");
    }
  }

  std::vector<LocalGainTable> tables;
  tables.reserve(n);
  for (int i = 0; i < n; ++i) {
    LocalGainTable table(i, cert.state_dims[i], cert.input_dims[i], S);
    for (int j : graph.neighbors(i)) {
      std::vector<LocalGainTable::Entry> entries;
      for (int s = 0; s < S; ++s) {
        const CertificateEntry& e = cert.entries[s];
        if (e.agent_row != i || e.agent_col != j) continue;
        LocalGainTable::Entry entry;
        entry.row = e.row;
        entry.col = e.col;
        entry.lo = e.lo;
        entry.hi = e.hi;
        entry.lower_gain = cert.gains[s].block(
            cert.input_offset(i), cert.state_offset(j), cert.input_dims[i],
            cert.state_dims[j]);
        entry.upper_gain = cert.gains[S + s].block(
            cert.input_offset(i), cert.state_offset(j), cert.input_dims[i],
            cert.state_dims[j]);
        entries.push_back(std::move(entry));
      }
      table.add_neighbor(j, cert.state_dims[j], std::move(entries));
    }
    tables.push_back(std::move(table));
  }
  return tables;
}

// Reference blend over the full state matrix: weights from every varying
// entry, summed over full vertex gains.  Used to cross-check the local
// tables and for offline analysis.
inline Eigen::MatrixXd blend_gain_dense(const SynthesisCertificate& cert,
                                        const Eigen::MatrixXd& A,
                                        std::vector<GainSaturation>* sat =
                                            nullptr) {
  const int S = cert.num_varying();
  if (A.rows() != cert.state_size() || A.cols() != cert.state_size()) {
    throw ShapeError("gain blend: state matrix has wrong dimensions");
  }
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(cert.input_size(),
                                            cert.state_size());
  for (int s = 0; s < S; ++s) {
    const CertificateEntry& e = cert.entries[s];
    const double value = A(cert.state_offset(e.agent_row) + e.row,
                           cert.state_offset(e.agent_col) + e.col);
    double lam = (e.hi - value) / (e.hi - e.lo);
    if (lam < 0.0 || lam > 1.0) {
      if (sat) {
        const double excess = value < e.lo ? e.lo - value : value - e.hi;
        sat->push_back({e.agent_row, e.agent_col, e.row, e.col, value, excess});
      }
      lam = std::clamp(lam, 0.0, 1.0);
    }
    K += (lam / S) * cert.gains[s] + ((1.0 - lam) / S) * cert.gains[S + s];
  }
  return K;
}

}  // namespace gnoc

#endif  // GNOC_GAINS_HPP_
