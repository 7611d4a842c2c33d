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

#ifndef GNOC_FORMATION_HPP_
#define GNOC_FORMATION_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <tuple>
#include <utility>
#include <vector>

#include "gnoc/dynamics.hpp"
#include "gnoc/errors.hpp"
#include "gnoc/graph.hpp"

namespace gnoc {

// Planar formation-keeping network on a ring.  Agent i is attracted toward
// holding distance d from each ring neighbor through a virtual potential:
//
//   x_i+ = x_i - Ts*phi(x_i - x_next) - Ts*phi(x_i - x_prev) + Ts*c*u_i,
//   phi(v) = (|v|^2 - d^2) v.
//
// The potential term vanishes exactly when |v| = d, so any configuration
// with all ring distances equal to d is an open-loop equilibrium.  The cost
// tracks a desired configuration with quadratic state/input penalties.
struct FormationConfig {
  int num_agents = 6;
  double sample_time = 1e-2;   // Ts
  double input_gain = 10.0;    // c
  double spacing = 4.0;        // d, desired ring-neighbor distance
  // Tracking-cost weights (the benchmark regulates toward x_des).
  double state_weight = 1.0;
  double input_weight = 0.1;
  double terminal_weight = 1.0;
};

class FormationSystem : public CoupledSystem {
 public:
  explicit FormationSystem(FormationConfig cfg)
      : cfg_(cfg), graph_(make_graph(cfg.num_agents)) {
    if (cfg.num_agents < 3) {
      throw ConfigError("formation: need at least 3 agents on the ring");
    }
    if (cfg.sample_time <= 0 || cfg.spacing <= 0) {
      throw ConfigError("formation: sample time and spacing must be positive");
    }
    x_des_.assign(cfg.num_agents, Eigen::Vector2d::Zero());
  }

  // Regular polygon with circumradius chosen so each side has length
  // `spacing` — an exact equilibrium of the potential terms.
  static std::vector<Eigen::VectorXd> polygon_formation(int n, double side) {
    const double pi = std::acos(-1.0);
    const double radius = side / (2.0 * std::sin(pi / n));
    std::vector<Eigen::VectorXd> pts(n);
    for (int i = 0; i < n; ++i) {
      double ang = 2.0 * pi * i / n;
      pts[i] = Eigen::Vector2d(radius * std::cos(ang), radius * std::sin(ang));
    }
    return pts;
  }

  void set_desired(std::vector<Eigen::VectorXd> x_des) {
    if (static_cast<int>(x_des.size()) != cfg_.num_agents) {
      throw ShapeError("formation: desired configuration has wrong agent count");
    }
    for (const auto& p : x_des) {
      if (p.size() != 2) throw ShapeError("formation: desired states must be planar");
    }
    x_des_ = std::move(x_des);
  }

  const std::vector<Eigen::VectorXd>& desired() const { return x_des_; }
  const FormationConfig& config() const { return cfg_; }

  const Graph& graph() const override { return graph_; }
  int state_dim(int) const override { return 2; }
  int input_dim(int) const override { return 2; }

  Eigen::VectorXd step(int agent, int /*t*/, const NeighborStates& xs,
                       const Eigen::VectorXd& u) const override {
    auto [self, next, prev] = split_neighbors(agent, xs);
    const Eigen::Vector2d vp = self - next;
    const Eigen::Vector2d vm = self - prev;
    return self - cfg_.sample_time * (potential(vp) + potential(vm)) +
           cfg_.sample_time * cfg_.input_gain * u;
  }

  Eigen::MatrixXd state_jacobian(int agent, int /*t*/, const NeighborStates& xs,
                                 const Eigen::VectorXd&, int a) const override {
    auto [self, next, prev] = split_neighbors(agent, xs);
    const Eigen::Vector2d vp = self - next;
    const Eigen::Vector2d vm = self - prev;
    const int n = cfg_.num_agents;
    const int j = graph_.neighbors(agent)[a];
    const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    if (j == agent) {
      return I - cfg_.sample_time * (potential_grad(vp) + potential_grad(vm));
    }
    Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
    if (j == (agent + 1) % n) J += cfg_.sample_time * potential_grad(vp);
    if (j == (agent + n - 1) % n) J += cfg_.sample_time * potential_grad(vm);
    return J;
  }

  Eigen::MatrixXd input_jacobian(int /*agent*/, int /*t*/, const NeighborStates&,
                                 const Eigen::VectorXd&) const override {
    return cfg_.sample_time * cfg_.input_gain * Eigen::Matrix2d::Identity();
  }

  double stage_cost(int agent, int /*t*/, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& u) const override {
    return 0.5 * cfg_.state_weight * (x - x_des_[agent]).squaredNorm() +
           0.5 * cfg_.input_weight * u.squaredNorm();
  }
  Eigen::VectorXd stage_cost_dx(int agent, int /*t*/, const Eigen::VectorXd& x,
                                const Eigen::VectorXd&) const override {
    return cfg_.state_weight * (x - x_des_[agent]);
  }
  Eigen::VectorXd stage_cost_du(int /*agent*/, int /*t*/, const Eigen::VectorXd&,
                                const Eigen::VectorXd& u) const override {
    return cfg_.input_weight * u;
  }
  double terminal_cost(int agent, const Eigen::VectorXd& x) const override {
    return 0.5 * cfg_.terminal_weight * (x - x_des_[agent]).squaredNorm();
  }
  Eigen::VectorXd terminal_cost_dx(int agent,
                                   const Eigen::VectorXd& x) const override {
    return cfg_.terminal_weight * (x - x_des_[agent]);
  }

 private:
  static Graph make_graph(int n) { return Graph::cycle(n); }

  Eigen::Vector2d potential(const Eigen::Vector2d& v) const {
    return (v.squaredNorm() - cfg_.spacing * cfg_.spacing) * v;
  }

  // d/dv [(|v|^2 - d^2) v] = 2 v v' + (|v|^2 - d^2) I  (symmetric).
  Eigen::Matrix2d potential_grad(const Eigen::Vector2d& v) const {
    return 2.0 * v * v.transpose() +
           (v.squaredNorm() - cfg_.spacing * cfg_.spacing) *
               Eigen::Matrix2d::Identity();
  }

  // Maps the sorted neighbor-state list onto (self, ring-next, ring-prev).
  std::tuple<Eigen::Vector2d, Eigen::Vector2d, Eigen::Vector2d> split_neighbors(
      int agent, const NeighborStates& xs) const {
    const int n = cfg_.num_agents;
    const auto& nb = graph_.neighbors(agent);
    if (xs.size() != nb.size()) {
      throw ShapeError("formation: neighbor state count mismatch");
    }
    const int nxt = (agent + 1) % n;
    const int prv = (agent + n - 1) % n;
    Eigen::Vector2d self, next, prev;
    for (size_t a = 0; a < nb.size(); ++a) {
      if (nb[a] == agent) self = xs[a];
      if (nb[a] == nxt) next = xs[a];
      if (nb[a] == prv) prev = xs[a];
    }
    return {self, next, prev};
  }

  FormationConfig cfg_;
  Graph graph_;
  std::vector<Eigen::VectorXd> x_des_;
};

}  // namespace gnoc

#endif  // GNOC_FORMATION_HPP_
