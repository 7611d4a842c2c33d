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

#ifndef GNOC_TRAJECTORY_HPP_
#define GNOC_TRAJECTORY_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "gnoc/dynamics.hpp"
#include "gnoc/errors.hpp"

namespace gnoc {

// Per-agent, per-time storage for a state sequence x_i(0..T) and an input
// sequence u_i(0..T-1).  The same container holds trajectories, curves
// (alpha, mu) and search directions (z, v) — they all share this shape.
class Trajectory {
 public:
  Trajectory() : horizon_(0) {}

  Trajectory(const CoupledSystem& sys, int horizon) : horizon_(horizon) {
    if (horizon < 1) throw ConfigError("trajectory: horizon must be >= 1");
    const int n = sys.num_agents();
    x_.resize(n);
    u_.resize(n);
    for (int i = 0; i < n; ++i) {
      x_[i].assign(horizon + 1, Eigen::VectorXd::Zero(sys.state_dim(i)));
      u_[i].assign(horizon, Eigen::VectorXd::Zero(sys.input_dim(i)));
    }
  }

  int horizon() const { return horizon_; }
  int num_agents() const { return static_cast<int>(x_.size()); }

  // State of agent i at time t in 0..T.
  Eigen::VectorXd& x(int i, int t) { return x_.at(i).at(t); }
  const Eigen::VectorXd& x(int i, int t) const { return x_.at(i).at(t); }

  // Input of agent i at time t in 0..T-1.
  Eigen::VectorXd& u(int i, int t) { return u_.at(i).at(t); }
  const Eigen::VectorXd& u(int i, int t) const { return u_.at(i).at(t); }

  // States of agent i's neighbors at time t, in Graph::neighbors(i) order.
  NeighborStates neighbor_states(const Graph& g, int i, int t) const {
    NeighborStates xs;
    const auto& nb = g.neighbors(i);
    xs.reserve(nb.size());
    for (int j : nb) xs.push_back(x(j, t));
    return xs;
  }

  // Largest absolute entry over all states and inputs.
  double max_abs() const {
    double m = 0.0;
    for (const auto& xi : x_)
      for (const auto& v : xi)
        if (v.size() > 0) m = std::max(m, v.cwiseAbs().maxCoeff());
    for (const auto& ui : u_)
      for (const auto& v : ui)
        if (v.size() > 0) m = std::max(m, v.cwiseAbs().maxCoeff());
    return m;
  }

  // Sum of squared entries over all states and inputs.
  double squared_norm() const {
    double s = 0.0;
    for (const auto& xi : x_)
      for (const auto& v : xi) s += v.squaredNorm();
    for (const auto& ui : u_)
      for (const auto& v : ui) s += v.squaredNorm();
    return s;
  }

  // this + scale * other, entrywise over both sequences.
  Trajectory axpy(double scale, const Trajectory& other) const {
    check_same_shape(other);
    Trajectory out = *this;
    for (size_t i = 0; i < x_.size(); ++i) {
      for (size_t t = 0; t < x_[i].size(); ++t)
        out.x_[i][t] += scale * other.x_[i][t];
      for (size_t t = 0; t < u_[i].size(); ++t)
        out.u_[i][t] += scale * other.u_[i][t];
    }
    return out;
  }

  bool all_finite() const {
    for (const auto& xi : x_)
      for (const auto& v : xi)
        if (!v.allFinite()) return false;
    for (const auto& ui : u_)
      for (const auto& v : ui)
        if (!v.allFinite()) return false;
    return true;
  }

 private:
  void check_same_shape(const Trajectory& other) const {
    if (other.horizon_ != horizon_ || other.x_.size() != x_.size()) {
      throw ShapeError("trajectory: shape mismatch in combination");
    }
    for (size_t i = 0; i < x_.size(); ++i) {
      if (other.x_[i].size() != x_[i].size() ||
          other.u_[i].size() != u_[i].size() ||
          (x_[i][0].size() != other.x_[i][0].size()) ||
          (!u_[i].empty() && u_[i][0].size() != other.u_[i][0].size())) {
        throw ShapeError("trajectory: per-agent shape mismatch");
      }
    }
  }

  int horizon_;
  std::vector<std::vector<Eigen::VectorXd>> x_;  // [agent][t], t = 0..T
  std::vector<std::vector<Eigen::VectorXd>> u_;  // [agent][t], t = 0..T-1
};

// Rolls the open-loop inputs stored in `controls` forward from the initial
// states `x0`.  Throws DivergenceError at the first non-finite state.
inline Trajectory rollout_open_loop(const CoupledSystem& sys,
                                    const std::vector<Eigen::VectorXd>& x0,
                                    const Trajectory& controls) {
  const int n = sys.num_agents();
  const int T = controls.horizon();
  if (static_cast<int>(x0.size()) != n) {
    throw ShapeError("rollout: initial state count does not match agent count");
  }
  Trajectory traj = controls;
  for (int i = 0; i < n; ++i) {
    if (x0[i].size() != sys.state_dim(i)) {
      throw ShapeError("rollout: initial state dimension mismatch for agent " +
                       std::to_string(i));
    }
    traj.x(i, 0) = x0[i];
  }
  const Graph& g = sys.graph();
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i) {
      NeighborStates xs = traj.neighbor_states(g, i, t);
      Eigen::VectorXd next = sys.step(i, t, xs, traj.u(i, t));
      if (!next.allFinite()) {
        throw DivergenceError(i, t + 1,
                              "rollout: state of agent " + std::to_string(i) +
                                  " became non-finite at time " +
                                  std::to_string(t + 1));
      }
      traj.x(i, t + 1) = next;
    }
  }
  return traj;
}

// Result of checking how well a state-input sequence satisfies the dynamics.
struct FeasibilityReport {
  double max_defect = 0.0;              // worst ||x(t+1) - f(x_N, u)|| over all i, t
  std::vector<double> defect_per_step;  // worst defect at each transition t -> t+1
  bool feasible = false;                // max_defect below the feasibility cutoff
};

// Measures the dynamics residual of a sequence.  A trajectory produced by a
// rollout or a projection has defect at machine-precision level; a generic
// curve does not.
inline FeasibilityReport verify_trajectory(const CoupledSystem& sys,
                                           const Trajectory& traj,
                                           double cutoff = 1e-10) {
  const int n = sys.num_agents();
  const int T = traj.horizon();
  const Graph& g = sys.graph();
  FeasibilityReport report;
  report.defect_per_step.assign(T, 0.0);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i) {
      NeighborStates xs = traj.neighbor_states(g, i, t);
      Eigen::VectorXd pred = sys.step(i, t, xs, traj.u(i, t));
      if (pred.size() != traj.x(i, t + 1).size()) {
        throw ShapeError("verify: step output dimension mismatch for agent " +
                         std::to_string(i));
      }
      double defect = (traj.x(i, t + 1) - pred).norm();
      report.defect_per_step[t] = std::max(report.defect_per_step[t], defect);
    }
    report.max_defect = std::max(report.max_defect, report.defect_per_step[t]);
  }
  report.feasible = report.max_defect < cutoff;
  return report;
}

// Total cost of a trajectory: sum of all stage terms plus terminal terms.
inline double total_cost(const CoupledSystem& sys, const Trajectory& traj) {
  const int n = sys.num_agents();
  const int T = traj.horizon();
  double c = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < T; ++t) c += sys.stage_cost(i, t, traj.x(i, t), traj.u(i, t));
    c += sys.terminal_cost(i, traj.x(i, T));
  }
  return c;
}

}  // namespace gnoc

#endif  // GNOC_TRAJECTORY_HPP_
