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

#ifndef GNOC_DYNAMICS_HPP_
#define GNOC_DYNAMICS_HPP_

#include <Eigen/Dense>
#include <vector>

#include "gnoc/errors.hpp"
#include "gnoc/graph.hpp"

namespace gnoc {

// States of the neighbors of one agent, ordered like Graph::neighbors(i)
// (sorted indices, self included).
using NeighborStates = std::vector<Eigen::VectorXd>;

// A network of coupled discrete-time systems with separable cost.
//
// Agent i evolves as  x_i(t+1) = f_i(t, {x_j(t) : j in N_i}, u_i(t)),
// i.e. its next state depends only on its own input and the current states
// of its graph neighbors.  The cost is a sum of agent-local stage terms
// plus agent-local terminal terms.  Everything an implementation exposes
// here is information the corresponding agent can hold locally.
class CoupledSystem {
 public:
  virtual ~CoupledSystem() = default;

  virtual const Graph& graph() const = 0;
  virtual int state_dim(int agent) const = 0;
  virtual int input_dim(int agent) const = 0;

  // Next state of `agent` at time t.  `xs[a]` is the state of
  // graph().neighbors(agent)[a].
  virtual Eigen::VectorXd step(int agent, int t, const NeighborStates& xs,
                               const Eigen::VectorXd& u) const = 0;

  // Jacobian of step() w.r.t. the state of the a-th neighbor
  // (state_dim(agent) x state_dim(neighbors[a])).
  virtual Eigen::MatrixXd state_jacobian(int agent, int t,
                                         const NeighborStates& xs,
                                         const Eigen::VectorXd& u,
                                         int a) const = 0;

  // Jacobian of step() w.r.t. the agent's own input
  // (state_dim(agent) x input_dim(agent)).
  virtual Eigen::MatrixXd input_jacobian(int agent, int t,
                                         const NeighborStates& xs,
                                         const Eigen::VectorXd& u) const = 0;

  virtual double stage_cost(int agent, int t, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u) const = 0;
  virtual Eigen::VectorXd stage_cost_dx(int agent, int t,
                                        const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& u) const = 0;
  virtual Eigen::VectorXd stage_cost_du(int agent, int t,
                                        const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& u) const = 0;

  virtual double terminal_cost(int agent, const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd terminal_cost_dx(int agent,
                                           const Eigen::VectorXd& x) const = 0;

  int num_agents() const { return graph().num_agents(); }

  int total_state_dim() const {
    int n = 0;
    for (int i = 0; i < num_agents(); ++i) n += state_dim(i);
    return n;
  }

  int total_input_dim() const {
    int m = 0;
    for (int i = 0; i < num_agents(); ++i) m += input_dim(i);
    return m;
  }
};

}  // namespace gnoc

#endif  // GNOC_DYNAMICS_HPP_
