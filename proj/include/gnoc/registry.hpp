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

#ifndef GNOC_REGISTRY_HPP_
#define GNOC_REGISTRY_HPP_

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gnoc/dynamics.hpp"
#include "gnoc/errors.hpp"
#include "gnoc/formation.hpp"
#include "gnoc/graph.hpp"
#include "gnoc/io.hpp"

namespace gnoc {

// Scalar agents on a ring, linearly coupled to their two ring neighbors,
// with quadratic regulation cost.  A minimal plant for exercising the
// pipeline end to end: its couplings are exactly the nonzero pattern of the
// cycle graph and its optimum is the origin.
class LinearRingSystem : public CoupledSystem {
 public:
  struct Config {
    int num_agents = 3;
    double self = 0.5;       // own-state multiplier
    double cross = 0.1;      // each ring neighbor's multiplier
    double input = 1.0;      // input multiplier
    double state_weight = 1.0;
    double input_weight = 1.0;
    double terminal_weight = 1.0;
  };

  explicit LinearRingSystem(Config cfg)
      : cfg_(cfg), graph_(Graph::cycle(cfg.num_agents)) {
    if (cfg.num_agents < 3) {
      throw ConfigError("linear-ring: need at least 3 agents on the ring");
    }
    if (cfg.state_weight <= 0 || cfg.input_weight <= 0 ||
        cfg.terminal_weight <= 0) {
      throw ConfigError("linear-ring: cost weights must be positive");
    }
  }

  const Config& config() const { return cfg_; }

  const Graph& graph() const override { return graph_; }
  int state_dim(int) const override { return 1; }
  int input_dim(int) const override { return 1; }

  Eigen::VectorXd step(int agent, int /*t*/, const NeighborStates& xs,
                       const Eigen::VectorXd& u) const override {
    const auto& nbrs = graph_.neighbors(agent);
    double next = cfg_.input * u[0];
    for (size_t a = 0; a < nbrs.size(); ++a) {
      next += (nbrs[a] == agent ? cfg_.self : cfg_.cross) * xs[a][0];
    }
    return Eigen::VectorXd::Constant(1, next);
  }

  Eigen::MatrixXd state_jacobian(int agent, int /*t*/, const NeighborStates&,
                                 const Eigen::VectorXd&,
                                 int a) const override {
    const int j = graph_.neighbors(agent)[a];
    return Eigen::MatrixXd::Constant(1, 1, j == agent ? cfg_.self
                                                      : cfg_.cross);
  }

  Eigen::MatrixXd input_jacobian(int /*agent*/, int /*t*/,
                                 const NeighborStates&,
                                 const Eigen::VectorXd&) const override {
    return Eigen::MatrixXd::Constant(1, 1, cfg_.input);
  }

  double stage_cost(int /*agent*/, int /*t*/, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& u) const override {
    return 0.5 * (cfg_.state_weight * x[0] * x[0] +
                  cfg_.input_weight * u[0] * u[0]);
  }
  Eigen::VectorXd stage_cost_dx(int /*agent*/, int /*t*/,
                                const Eigen::VectorXd& x,
                                const Eigen::VectorXd&) const override {
    return cfg_.state_weight * x;
  }
  Eigen::VectorXd stage_cost_du(int /*agent*/, int /*t*/,
                                const Eigen::VectorXd&,
                                const Eigen::VectorXd& u) const override {
    return cfg_.input_weight * u;
  }

  double terminal_cost(int /*agent*/, const Eigen::VectorXd& x) const override {
    return 0.5 * cfg_.terminal_weight * x[0] * x[0];
  }
  Eigen::VectorXd terminal_cost_dx(int /*agent*/,
                                   const Eigen::VectorXd& x) const override {
    return cfg_.terminal_weight * x;
  }

 private:
  Config cfg_;
  Graph graph_;
};

inline std::vector<std::string> registered_systems() {
  return {"formation", "linear-ring"};
}

// Natural resting configuration of a plant: the formation target for the
// formation plant, the origin otherwise.  Used to seed default curves and
// to anchor linearizations.
inline std::vector<Eigen::VectorXd> reference_states(
    const CoupledSystem& sys) {
  if (const auto* formation = dynamic_cast<const FormationSystem*>(&sys)) {
    return formation->desired();
  }
  std::vector<Eigen::VectorXd> ref(sys.num_agents());
  for (int i = 0; i < sys.num_agents(); ++i) {
    ref[i] = Eigen::VectorXd::Zero(sys.state_dim(i));
  }
  return ref;
}

// Build a plant from a run configuration.  `dynamics` selects the model;
// the remaining keys are model parameters with the model's own defaults.
inline std::unique_ptr<CoupledSystem> make_system(const KeyValueConfig& cfg) {
  const std::string name = cfg.get_string("dynamics");
  if (name == "formation") {
    FormationConfig fc;
    fc.num_agents = cfg.get_int("agents", fc.num_agents);
    fc.sample_time = cfg.get_double("sample_time", fc.sample_time);
    fc.input_gain = cfg.get_double("input_gain", fc.input_gain);
    fc.spacing = cfg.get_double("spacing", fc.spacing);
    fc.state_weight = cfg.get_double("state_weight", fc.state_weight);
    fc.input_weight = cfg.get_double("input_weight", fc.input_weight);
    fc.terminal_weight = cfg.get_double("terminal_weight", fc.terminal_weight);
    auto sys = std::make_unique<FormationSystem>(fc);
    sys->set_desired(
        FormationSystem::polygon_formation(fc.num_agents, fc.spacing));
    return sys;
  }
  if (name == "linear-ring") {
    LinearRingSystem::Config rc;
    rc.num_agents = cfg.get_int("agents", rc.num_agents);
    rc.self = cfg.get_double("ring_self", rc.self);
    rc.cross = cfg.get_double("ring_cross", rc.cross);
    rc.input = cfg.get_double("ring_input", rc.input);
    rc.state_weight = cfg.get_double("state_weight", rc.state_weight);
    rc.input_weight = cfg.get_double("input_weight", rc.input_weight);
    rc.terminal_weight = cfg.get_double("terminal_weight", rc.terminal_weight);
    return std::make_unique<LinearRingSystem>(rc);
  }
  std::string known;
  for (const std::string& s : registered_systems()) {
    known += (known.empty() ? "" : ", ") + s;
  }
  throw ConfigError("unknown dynamics '" + name + "' (registered: " + known +
                    ")");
}

}  // namespace gnoc

#endif  // GNOC_REGISTRY_HPP_
