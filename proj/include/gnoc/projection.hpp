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

#ifndef GNOC_PROJECTION_HPP_
#define GNOC_PROJECTION_HPP_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gnoc/dynamics.hpp"
#include "gnoc/errors.hpp"
#include "gnoc/gains.hpp"
#include "gnoc/graph.hpp"
#include "gnoc/trajectory.hpp"

// Feedback projection of a curve onto the trajectory manifold.
//
// A curve (alpha, mu) is an arbitrary state/input sequence; the projection
// rolls the system forward under
//
//   x_i(0)   = alpha_i(0)
//   u_i(t)   = mu_i(t) + sum_{j in N_i} K_{ij}(t) (alpha_j(t) - x_j(t))
//   x_i(t+1) = f_i(t, {x_j(t)}, u_i(t))
//
// so the result satisfies the dynamics exactly no matter how infeasible the
// curve is.  The gain blocks K_{ij}(t) come from the agents' local tables,
// scheduled on the state-coupling jacobians at the current states and the
// feedforward input mu_i(t) (the applied input is not known until the gain
// is; for input-affine systems the choice is immaterial).  Every quantity
// agent i touches belongs to itself or a graph neighbor.
namespace gnoc {

struct ProjectionResult {
  Trajectory trajectory;
  // Scheduling values seen outside their intervals, in evaluation order.
  std::vector<GainSaturation> saturations;
};

inline ProjectionResult project_curve(const CoupledSystem& sys,
                                      const std::vector<LocalGainTable>& tables,
                                      const Trajectory& curve) {
  const int n = sys.num_agents();
  const int T = curve.horizon();
  if (curve.num_agents() != n) {
    throw ShapeError("projection: curve agent count does not match system");
  }
  if (static_cast<int>(tables.size()) != n) {
    throw ShapeError("projection: one gain table per agent required");
  }
  const Graph& g = sys.graph();

  ProjectionResult out;
  out.trajectory = Trajectory(sys, T);
  Trajectory& traj = out.trajectory;
  for (int i = 0; i < n; ++i) traj.x(i, 0) = curve.x(i, 0);

  for (int t = 0; t < T; ++t) {
    // Inputs first: they only read states at time t.
    for (int i = 0; i < n; ++i) {
      NeighborStates xs = traj.neighbor_states(g, i, t);
      const Eigen::VectorXd& mu = curve.u(i, t);
      Eigen::VectorXd u = mu;
      const auto& nb = g.neighbors(i);
      for (size_t a = 0; a < nb.size(); ++a) {
        const int j = nb[a];
        Eigen::MatrixXd jac = sys.state_jacobian(i, t, xs, mu,
                                                 static_cast<int>(a));
        Eigen::MatrixXd K =
            tables[i].gain_block(j, jac, &out.saturations);
        u += K * (curve.x(j, t) - traj.x(j, t));
      }
      if (!u.allFinite()) {
        throw DivergenceError(i, t,
                              "projection: input of agent " +
                                  std::to_string(i) +
                                  " became non-finite at time " +
                                  std::to_string(t));
      }
      traj.u(i, t) = u;
    }
    for (int i = 0; i < n; ++i) {
      NeighborStates xs = traj.neighbor_states(g, i, t);
      Eigen::VectorXd next = sys.step(i, t, xs, traj.u(i, t));
      if (!next.allFinite()) {
        throw DivergenceError(i, t + 1,
                              "projection: state of agent " +
                                  std::to_string(i) +
                                  " became non-finite at time " +
                                  std::to_string(t + 1));
      }
      traj.x(i, t + 1) = next;
    }
  }
  return out;
}

}  // namespace gnoc

#endif  // GNOC_PROJECTION_HPP_
