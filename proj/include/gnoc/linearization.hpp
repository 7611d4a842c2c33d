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

#ifndef GNOC_LINEARIZATION_HPP_
#define GNOC_LINEARIZATION_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gnoc/dynamics.hpp"
#include "gnoc/errors.hpp"
#include "gnoc/graph.hpp"
#include "gnoc/trajectory.hpp"

namespace gnoc {

// Time-varying linearization of the coupled dynamics along a trajectory:
// per-edge state blocks a_t(i,j) = df_i/dx_j for j in N_i and the constant
// per-agent input blocks b_i = df_i/du_i.
class LinearizationSequence {
 public:
  LinearizationSequence() = default;

  LinearizationSequence(const CoupledSystem& sys, int horizon)
      : graph_(&sys.graph()), horizon_(horizon) {
    const int n = sys.num_agents();
    state_dims_.resize(n);
    input_dims_.resize(n);
    x_offset_.assign(n + 1, 0);
    u_offset_.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) {
      state_dims_[i] = sys.state_dim(i);
      input_dims_[i] = sys.input_dim(i);
      x_offset_[i + 1] = x_offset_[i] + state_dims_[i];
      u_offset_[i + 1] = u_offset_[i] + input_dims_[i];
    }
    blocks_.assign(horizon, {});
    for (int t = 0; t < horizon; ++t) {
      blocks_[t].resize(n);
      for (int i = 0; i < n; ++i) {
        blocks_[t][i].resize(graph_->neighbors(i).size());
      }
    }
    input_blocks_.resize(n);
  }

  int horizon() const { return horizon_; }
  const Graph& graph() const { return *graph_; }
  int state_dim(int i) const { return state_dims_.at(i); }
  int input_dim(int i) const { return input_dims_.at(i); }
  int state_offset(int i) const { return x_offset_.at(i); }
  int input_offset(int i) const { return u_offset_.at(i); }
  int total_state_dim() const { return x_offset_.back(); }
  int total_input_dim() const { return u_offset_.back(); }

  // df_i/dx_j at time t (j must be a neighbor of i).
  const Eigen::MatrixXd& state_block(int t, int i, int j) const {
    return blocks_.at(t).at(i).at(graph_->neighbor_index(i, j));
  }
  Eigen::MatrixXd& state_block(int t, int i, int j) {
    return blocks_.at(t).at(i).at(graph_->neighbor_index(i, j));
  }

  // df_i/du_i (time invariant).
  const Eigen::MatrixXd& input_block(int i) const { return input_blocks_.at(i); }
  Eigen::MatrixXd& input_block(int i) { return input_blocks_.at(i); }

  // Stacked state matrix A_t with zero blocks off the neighbor pattern.
  Eigen::MatrixXd assemble_state_matrix(int t) const {
    const int n = static_cast<int>(state_dims_.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(total_state_dim(), total_state_dim());
    for (int i = 0; i < n; ++i) {
      for (int j : graph_->neighbors(i)) {
        A.block(x_offset_[i], x_offset_[j], state_dims_[i], state_dims_[j]) =
            state_block(t, i, j);
      }
    }
    return A;
  }

  // Stacked block-diagonal input matrix B.
  Eigen::MatrixXd assemble_input_matrix() const {
    const int n = static_cast<int>(state_dims_.size());
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(total_state_dim(), total_input_dim());
    for (int i = 0; i < n; ++i) {
      B.block(x_offset_[i], u_offset_[i], state_dims_[i], input_dims_[i]) =
          input_blocks_[i];
    }
    return B;
  }

 private:
  const Graph* graph_ = nullptr;
  int horizon_ = 0;
  std::vector<int> state_dims_, input_dims_;
  std::vector<int> x_offset_, u_offset_;
  // blocks_[t][i][a] = df_i/dx_{neighbors(i)[a]} at time t.
  std::vector<std::vector<std::vector<Eigen::MatrixXd>>> blocks_;
  std::vector<Eigen::MatrixXd> input_blocks_;
};

// Exact partials along a trajectory.  Also validates the standing
// assumption that the input block is constant (same at every point of the
// trajectory).
inline LinearizationSequence linearize_along(const CoupledSystem& sys,
                                             const Trajectory& traj) {
  const Graph& g = sys.graph();
  const int n = sys.num_agents();
  const int T = traj.horizon();
  LinearizationSequence seq(sys, T);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i) {
      NeighborStates xs = traj.neighbor_states(g, i, t);
      const auto& nb = g.neighbors(i);
      for (size_t a = 0; a < nb.size(); ++a) {
        Eigen::MatrixXd J = sys.state_jacobian(i, t, xs, traj.u(i, t),
                                               static_cast<int>(a));
        if (!J.allFinite()) {
          throw NumericalError("linearize: non-finite df/dx block (i=" +
                               std::to_string(i) + ", j=" + std::to_string(nb[a]) +
                               ", t=" + std::to_string(t) + ")");
        }
        seq.state_block(t, i, nb[a]) = J;
      }
      Eigen::MatrixXd Bi = sys.input_jacobian(i, t, xs, traj.u(i, t));
      if (!Bi.allFinite()) {
        throw NumericalError("linearize: non-finite df/du block (i=" +
                             std::to_string(i) + ", t=" + std::to_string(t) + ")");
      }
      if (t == 0) {
        seq.input_block(i) = Bi;
      } else {
        double scale = std::max(1.0, seq.input_block(i).norm());
        if ((Bi - seq.input_block(i)).norm() > 1e-9 * scale) {
          throw ConfigError(
              "linearize: input block of agent " + std::to_string(i) +
              " varies along the trajectory; a constant df/du is required");
        }
      }
    }
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Interval bounds on the linearization entries.
// ---------------------------------------------------------------------------

// One scalar position inside the block sparsity pattern.
struct EntryPosition {
  int i = 0;    // owning agent (block row)
  int j = 0;    // neighbor (block column), j in N_i
  int row = 0;  // within-block row, < n_i
  int col = 0;  // within-block column, < n_j

  bool operator==(const EntryPosition& o) const {
    return i == o.i && j == o.j && row == o.row && col == o.col;
  }
};

struct VaryingEntry {
  EntryPosition pos;
  double lo = 0.0;
  double hi = 0.0;
};

struct ConstantEntry {
  EntryPosition pos;
  double value = 0.0;
};

struct BoundsOptions {
  double margin = 0.10;        // symmetric inflation as a fraction of the width
  bool force_varying = false;  // inflate flat entries by margin*max(1,|v|)
};

// Per-entry intervals covering every linearization entry seen in the sample
// trajectories.  Varying entries are indexed s = 0..num_varying()-1 in a
// fixed catalogue order (agent, neighbor, row, column); flat entries live in
// the constant set and are folded into every polytope vertex downstream.
class EntryBounds {
 public:
  std::vector<VaryingEntry> varying;
  std::vector<ConstantEntry> constant;

  int num_varying() const { return static_cast<int>(varying.size()); }

  // Index of a varying entry by position, or -1.
  int find_varying(const EntryPosition& pos) const {
    for (size_t s = 0; s < varying.size(); ++s)
      if (varying[s].pos == pos) return static_cast<int>(s);
    return -1;
  }

  int find_constant(const EntryPosition& pos) const {
    for (size_t c = 0; c < constant.size(); ++c)
      if (constant[c].pos == pos) return static_cast<int>(c);
    return -1;
  }

  // Grows intervals (and converts constants to varying entries) so that
  // `value` at `pos` is covered.  Returns true if anything changed.
  bool widen_to_include(const EntryPosition& pos, double value) {
    int s = find_varying(pos);
    if (s >= 0) {
      if (value < varying[s].lo) {
        varying[s].lo = value;
        return true;
      }
      if (value > varying[s].hi) {
        varying[s].hi = value;
        return true;
      }
      return false;
    }
    int c = find_constant(pos);
    if (c < 0) throw ShapeError("bounds: unknown entry position");
    if (value == constant[c].value) return false;
    VaryingEntry v;
    v.pos = pos;
    v.lo = std::min(value, constant[c].value);
    v.hi = std::max(value, constant[c].value);
    constant.erase(constant.begin() + c);
    varying.push_back(v);
    return true;
  }
};

// One out-of-interval observation.
struct BoundsViolation {
  EntryPosition pos;
  int t = 0;
  double value = 0.0;
  double excess = 0.0;  // distance beyond the nearer interval end
};

namespace detail {

// Visits every structural entry position of one time slice in catalogue
// order, passing the current value.
template <typename F>
void for_each_entry(const LinearizationSequence& seq, int t, F&& fn) {
  const Graph& g = seq.graph();
  for (int i = 0; i < g.num_agents(); ++i) {
    for (int j : g.neighbors(i)) {
      const Eigen::MatrixXd& block = seq.state_block(t, i, j);
      for (int r = 0; r < block.rows(); ++r) {
        for (int c = 0; c < block.cols(); ++c) {
          fn(EntryPosition{i, j, r, c}, block(r, c));
        }
      }
    }
  }
}

}  // namespace detail

// Min/max of every entry over all samples and times, inflated by the margin
// policy.  Entries that never move become constants unless force_varying
// asks for an artificial interval around them.
inline EntryBounds estimate_bounds(const CoupledSystem& sys,
                                   const std::vector<Trajectory>& samples,
                                   const BoundsOptions& opt = {}) {
  if (samples.empty()) throw ConfigError("bounds: need at least one sample");
  if (opt.margin < 0) throw ConfigError("bounds: margin must be >= 0");

  std::vector<EntryPosition> order;
  std::vector<double> lo, hi;
  bool first_slice = true;
  for (const Trajectory& sample : samples) {
    LinearizationSequence seq = linearize_along(sys, sample);
    for (int t = 0; t < seq.horizon(); ++t) {
      size_t idx = 0;
      detail::for_each_entry(seq, t, [&](const EntryPosition& pos, double val) {
        if (first_slice) {
          order.push_back(pos);
          lo.push_back(val);
          hi.push_back(val);
        } else {
          lo[idx] = std::min(lo[idx], val);
          hi[idx] = std::max(hi[idx], val);
        }
        ++idx;
      });
      first_slice = false;
    }
  }

  EntryBounds out;
  for (size_t k = 0; k < order.size(); ++k) {
    const double width = hi[k] - lo[k];
    if (width > 0) {
      out.varying.push_back(
          {order[k], lo[k] - opt.margin * width, hi[k] + opt.margin * width});
    } else if (opt.force_varying && opt.margin > 0) {
      const double pad = opt.margin * std::max(1.0, std::abs(lo[k]));
      out.varying.push_back({order[k], lo[k] - pad, lo[k] + pad});
    } else {
      out.constant.push_back({order[k], lo[k]});
    }
  }
  return out;
}

// Checks a linearization against previously estimated bounds.  An empty
// result means every entry stayed inside its interval (constants must match
// up to roundoff).
inline std::vector<BoundsViolation> check_in_bounds(
    const LinearizationSequence& seq, const EntryBounds& bounds) {
  std::vector<BoundsViolation> report;
  for (int t = 0; t < seq.horizon(); ++t) {
    detail::for_each_entry(seq, t, [&](const EntryPosition& pos, double val) {
      int s = bounds.find_varying(pos);
      if (s >= 0) {
        const auto& e = bounds.varying[s];
        if (val < e.lo) report.push_back({pos, t, val, e.lo - val});
        if (val > e.hi) report.push_back({pos, t, val, val - e.hi});
        return;
      }
      int c = bounds.find_constant(pos);
      if (c < 0) {
        report.push_back({pos, t, val, std::abs(val)});
        return;
      }
      double dev = std::abs(val - bounds.constant[c].value);
      double tol = 1e-12 * std::max(1.0, std::abs(bounds.constant[c].value));
      if (dev > tol) report.push_back({pos, t, val, dev});
    });
  }
  return report;
}

}  // namespace gnoc

#endif  // GNOC_LINEARIZATION_HPP_
