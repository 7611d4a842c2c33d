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

#ifndef GNOC_DISTOPT_HPP_
#define GNOC_DISTOPT_HPP_

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "gnoc/dynamics.hpp"
#include "gnoc/errors.hpp"
#include "gnoc/gains.hpp"
#include "gnoc/graph.hpp"
#include "gnoc/projection.hpp"
#include "gnoc/trajectory.hpp"

// Distributed trajectory optimization.
//
// Each iteration performs two neighbor-to-neighbor sweeps over the horizon:
//
//   forward   project the curve (alpha, mu): agents exchange their current
//             states and curve mismatches, apply the scheduled feedback and
//             step their own dynamics;
//   backward  adjoint recursion for the update direction: agent j sends to
//             each neighbor i the two terms of the costate/direction sums
//             that only j can form,
//                 A_{ji}(t)' p_j(t+1)   and   K_{ji}(t)' v_j(t),
//             where v_j(t) = -(du_j(t) + B_j(t)' p_j(t+1)).
//
// The receiving agent accumulates
//   p_i(t) = dx_i(t) + sum_j [ A_{ji}(t)' p_j(t+1) + K_{ji}(t)' v_j(t) ]
//   z_i(t) = sum_j K_{ji}(t)' v_j(t)            (z at t = 0 and t = T is 0)
// and the curve update is alpha = x + beta z, mu = u + beta v: minus the
// gradient of the projected cost in the curve variables, with the gain
// schedule frozen (its state sensitivity vanishes wherever the curve is
// already feasible).  The first state is problem data, so z_i(0) = 0, and
// the projection never reads alpha(T), so z_i(T) = 0 as well.
//
// Every cross-agent read goes through an Exchange that rejects non-neighbor
// traffic and counts transmissions: one message is one directed transmission
// between two distinct neighbors at one time step (its payload may bundle
// several blocks).  Each phase therefore sends exactly
// T * sum_i (|N_i| - 1) messages.
namespace gnoc {

// One directed transmission, as recorded by the audit when tracing is on.
struct MessageRecord {
  int iteration = 0;
  int phase = 0;  // 0 = forward, 1 = backward
  int t = 0;
  int sender = 0;
  int receiver = 0;
};

struct MessageAudit {
  long forward = 0;
  long backward = 0;
  bool record = false;              // keep per-message rows below
  std::vector<MessageRecord> log;  // filled only when record is set
  long total() const { return forward + backward; }
};

namespace detail_distopt {

// Directed neighbor-to-neighbor exchange for one sweep phase.  Sending to a
// non-neighbor — or to oneself; self terms never cross the network — is a
// locality violation.  Inboxes keep sender order, so reductions over them
// are deterministic.
template <typename Payload>
class Exchange {
 public:
  explicit Exchange(const Graph& g, MessageAudit* audit = nullptr,
                    int iteration = 0, int phase = 0)
      : g_(&g),
        audit_(audit),
        iteration_(iteration),
        phase_(phase),
        inbox_(g.num_agents()) {}

  void begin_round(int t) { t_ = t; }

  void send(int from, int to, Payload payload) {
    if (from == to) {
      throw LocalityError("exchange: agent " + std::to_string(from) +
                          " attempted to message itself");
    }
    if (!g_->adjacent(from, to)) {
      throw LocalityError("exchange: agents " + std::to_string(from) +
                          " and " + std::to_string(to) +
                          " are not neighbors");
    }
    inbox_[to].emplace_back(from, std::move(payload));
    ++count_;
    if (audit_ && audit_->record) {
      audit_->log.push_back({iteration_, phase_, t_, from, to});
    }
  }

  const Payload& receive(int to, int from) const {
    for (const auto& item : inbox_[to]) {
      if (item.first == from) return item.second;
    }
    throw LocalityError("exchange: no message from agent " +
                        std::to_string(from) + " in the inbox of agent " +
                        std::to_string(to));
  }

  void next_round() {
    for (auto& box : inbox_) box.clear();
  }

  long count() const { return count_; }

 private:
  const Graph* g_;
  MessageAudit* audit_ = nullptr;
  int iteration_ = 0;
  int phase_ = 0;
  int t_ = 0;
  std::vector<std::vector<std::pair<int, Payload>>> inbox_;
  long count_ = 0;
};

struct ForwardPayload {
  Eigen::VectorXd state;     // x_j(t)
  Eigen::VectorXd mismatch;  // alpha_j(t) - x_j(t)
};

struct BackwardPayload {
  Eigen::VectorXd costate_term;    // A_{ji}(t)' p_j(t+1)
  Eigen::VectorXd direction_term;  // K_{ji}(t)' v_j(t)
};

}  // namespace detail_distopt

// One sweep: the projection of the curve together with the descent
// direction (state component in the x slots, input component in the u
// slots) and its sup norm.
struct SweepResult {
  Trajectory trajectory;
  Trajectory direction;
  double direction_norm = 0.0;
  std::vector<GainSaturation> saturations;
};

inline SweepResult distributed_sweep(const CoupledSystem& sys,
                                     const std::vector<LocalGainTable>& tables,
                                     const Trajectory& curve,
                                     MessageAudit* audit = nullptr,
                                     int iteration = 0) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const int n = sys.num_agents();
  const int T = curve.horizon();
  if (curve.num_agents() != n) {
    throw ShapeError("sweep: curve agent count does not match system");
  }
  if (static_cast<int>(tables.size()) != n) {
    throw ShapeError("sweep: one gain table per agent required");
  }
  const Graph& g = sys.graph();

  SweepResult out;
  out.trajectory = Trajectory(sys, T);
  out.direction = Trajectory(sys, T);
  Trajectory& traj = out.trajectory;

  // Per-agent private memory, indexed [agent][t] (and [a] for per-neighbor
  // blocks in the order of Graph::neighbors(agent)).
  std::vector<std::vector<std::vector<MatrixXd>>> jac(n), gain(n);
  std::vector<std::vector<MatrixXd>> bjac(n);
  std::vector<std::vector<VectorXd>> dx(n), du(n), p(n), v(n);
  for (int i = 0; i < n; ++i) {
    const int deg = static_cast<int>(g.neighbors(i).size());
    jac[i].assign(T, std::vector<MatrixXd>(deg));
    gain[i].assign(T, std::vector<MatrixXd>(deg));
    bjac[i].assign(T, MatrixXd());
    dx[i].assign(T, VectorXd());
    du[i].assign(T, VectorXd());
    p[i].assign(T + 1, VectorXd());
    v[i].assign(T, VectorXd());
  }

  // Forward phase: one exchange round per step, then every agent applies
  // its feedback and steps its own dynamics.
  detail_distopt::Exchange<detail_distopt::ForwardPayload> fwd(g, audit,
                                                               iteration, 0);
  for (int i = 0; i < n; ++i) traj.x(i, 0) = curve.x(i, 0);
  for (int t = 0; t < T; ++t) {
    fwd.begin_round(t);
    for (int j = 0; j < n; ++j) {
      for (int i : g.neighbors(j)) {
        if (i == j) continue;
        fwd.send(j, i, {traj.x(j, t), curve.x(j, t) - traj.x(j, t)});
      }
    }
    for (int i = 0; i < n; ++i) {
      const auto& nb = g.neighbors(i);
      NeighborStates xs(nb.size());
      std::vector<VectorXd> mismatch(nb.size());
      for (size_t a = 0; a < nb.size(); ++a) {
        if (nb[a] == i) {
          xs[a] = traj.x(i, t);
          mismatch[a] = curve.x(i, t) - traj.x(i, t);
        } else {
          const auto& msg = fwd.receive(i, nb[a]);
          xs[a] = msg.state;
          mismatch[a] = msg.mismatch;
        }
      }
      const VectorXd& mu = curve.u(i, t);
      VectorXd u = mu;
      for (size_t a = 0; a < nb.size(); ++a) {
        MatrixXd sched = sys.state_jacobian(i, t, xs, mu,
                                            static_cast<int>(a));
        gain[i][t][a] =
            tables[i].gain_block(nb[a], sched, &out.saturations);
        u += gain[i][t][a] * mismatch[a];
      }
      if (!u.allFinite()) {
        throw DivergenceError(i, t,
                              "sweep: input of agent " + std::to_string(i) +
                                  " became non-finite at time " +
                                  std::to_string(t));
      }
      traj.u(i, t) = u;
      VectorXd next = sys.step(i, t, xs, u);
      if (!next.allFinite()) {
        throw DivergenceError(i, t + 1,
                              "sweep: state of agent " + std::to_string(i) +
                                  " became non-finite at time " +
                                  std::to_string(t + 1));
      }
      traj.x(i, t + 1) = next;
      // Linearization along the achieved trajectory, for the adjoint.
      for (size_t a = 0; a < nb.size(); ++a) {
        jac[i][t][a] = sys.state_jacobian(i, t, xs, u, static_cast<int>(a));
      }
      bjac[i][t] = sys.input_jacobian(i, t, xs, u);
      dx[i][t] = sys.stage_cost_dx(i, t, traj.x(i, t), u);
      du[i][t] = sys.stage_cost_du(i, t, traj.x(i, t), u);
    }
    fwd.next_round();
  }
  if (audit) audit->forward += fwd.count();

  // Backward phase: adjoint recursion with one exchange round per step.
  detail_distopt::Exchange<detail_distopt::BackwardPayload> bwd(g, audit,
                                                                iteration, 1);
  for (int i = 0; i < n; ++i) {
    p[i][T] = sys.terminal_cost_dx(i, traj.x(i, T));
  }
  for (int t = T - 1; t >= 0; --t) {
    bwd.begin_round(t);
    for (int j = 0; j < n; ++j) {
      v[j][t] = -(du[j][t] + bjac[j][t].transpose() * p[j][t + 1]);
      const auto& nb = g.neighbors(j);
      for (size_t a = 0; a < nb.size(); ++a) {
        if (nb[a] == j) continue;
        bwd.send(j, nb[a],
                 {jac[j][t][a].transpose() * p[j][t + 1],
                  gain[j][t][a].transpose() * v[j][t]});
      }
    }
    for (int i = 0; i < n; ++i) {
      VectorXd costate = dx[i][t];
      VectorXd direction = VectorXd::Zero(sys.state_dim(i));
      const auto& nb = g.neighbors(i);
      for (size_t a = 0; a < nb.size(); ++a) {
        const int j = nb[a];
        if (j == i) {
          const int self = g.neighbor_index(i, i);
          costate += jac[i][t][self].transpose() * p[i][t + 1];
          direction += gain[i][t][self].transpose() * v[i][t];
        } else {
          const auto& msg = bwd.receive(i, j);
          costate += msg.costate_term;
          direction += msg.direction_term;
        }
      }
      costate += direction;  // the K'v terms enter the costate sum too
      p[i][t] = costate;
      if (t > 0) out.direction.x(i, t) = direction;
    }
    bwd.next_round();
  }
  if (audit) audit->backward += bwd.count();

  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < T; ++t) out.direction.u(i, t) = v[i][t];
  }
  out.direction_norm = out.direction.max_abs();
  return out;
}

// Options for the descent loop.  The constant step is the distributed
// protocol; backtracking re-projects candidate curves centrally to pick a
// step and is meant for benchmarking on a single machine (its extra
// projections bypass the message audit).
struct DescentOptions {
  double step = 0.1;
  double tolerance = 1e-6;  // sup norm of the direction
  int max_iterations = 500;
  bool backtracking = false;
  double backtrack_shrink = 0.5;
  int backtrack_limit = 30;
  double sufficient_decrease = 1e-4;
  // Keep every iterate's projected trajectory and scheduling clips (for
  // file output); off by default to bound memory.
  bool record_details = false;
  // Log every transmission into the audit (iteration, phase, t, sender,
  // receiver); off by default to bound memory.
  bool trace_messages = false;
};

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;            // cost of the projected trajectory
  double direction_norm = 0.0;  // sup norm of (z, v)
  double step = 0.0;            // step taken from this iterate (0 at exit)
  long saturations = 0;         // scheduling clips seen in the sweep
};

struct DescentResult {
  bool converged = false;
  int iterations = 0;  // sweeps performed
  double cost = 0.0;
  double direction_norm = 0.0;
  Trajectory trajectory;  // projection of the final curve
  Trajectory curve;       // final curve (alpha, mu)
  std::vector<IterationRecord> history;
  std::vector<GainSaturation> saturations;  // from the final sweep
  MessageAudit messages;
  // Filled only with DescentOptions::record_details.
  std::vector<Trajectory> iterates;
  std::vector<std::vector<GainSaturation>> clips;  // per iterate
};

inline DescentResult descend(const CoupledSystem& sys,
                             const std::vector<LocalGainTable>& tables,
                             const Trajectory& initial_curve,
                             const DescentOptions& opt = {}) {
  if (opt.step <= 0.0) throw ConfigError("descent: step must be positive");
  if (opt.max_iterations < 1) {
    throw ConfigError("descent: need at least one iteration");
  }
  DescentResult res;
  res.curve = initial_curve;
  res.messages.record = opt.trace_messages;
  for (int k = 0; k < opt.max_iterations; ++k) {
    SweepResult sweep = distributed_sweep(sys, tables, res.curve,
                                          &res.messages, k);
    ++res.iterations;
    res.trajectory = sweep.trajectory;
    res.cost = total_cost(sys, sweep.trajectory);
    res.direction_norm = sweep.direction_norm;
    res.saturations = sweep.saturations;
    res.history.push_back({k, res.cost, sweep.direction_norm, 0.0,
                           static_cast<long>(sweep.saturations.size())});
    if (opt.record_details) {
      res.iterates.push_back(sweep.trajectory);
      res.clips.push_back(sweep.saturations);
    }
    if (sweep.direction_norm < opt.tolerance) {
      res.converged = true;
      break;
    }
    double beta = opt.step;
    if (opt.backtracking) {
      const double decrease_rate = sweep.direction.squared_norm();
      bool accepted = false;
      for (int trial = 0; trial < opt.backtrack_limit; ++trial) {
        const Trajectory candidate =
            sweep.trajectory.axpy(beta, sweep.direction);
        bool finite = true;
        double cand_cost = 0.0;
        try {
          cand_cost =
              total_cost(sys, project_curve(sys, tables, candidate).trajectory);
        } catch (const DivergenceError&) {
          finite = false;
        }
        if (finite &&
            cand_cost <=
                res.cost - opt.sufficient_decrease * beta * decrease_rate) {
          accepted = true;
          break;
        }
        beta *= opt.backtrack_shrink;
      }
      if (!accepted) break;  // no acceptable step: stop at this iterate
    }
    res.history.back().step = beta;
    res.curve = sweep.trajectory.axpy(beta, sweep.direction);
  }
  return res;
}

}  // namespace gnoc

#endif  // GNOC_DISTOPT_HPP_
