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

#ifndef GNOC_POLYTOPE_HPP_
#define GNOC_POLYTOPE_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gnoc/errors.hpp"
#include "gnoc/graph.hpp"
#include "gnoc/linearization.hpp"

namespace gnoc {

// A time slice of the linearization family written as a convex combination
// of fixed vertex matrices:  A_t = sum_p theta_p(t) V_p,  theta in the
// simplex.  Each varying scalar entry s contributes two vertices — one with
// the entry pinned at S*lo (vertex s) and one at S*hi (vertex S+s), where S
// is the varying-entry count.  Entries that never vary are folded into a
// base matrix shared by every vertex, which keeps the combination exact
// because the coefficients sum to one.
class PolytopeModel {
 public:
  PolytopeModel() = default;

  PolytopeModel(EntryBounds bounds, const Graph& graph,
                std::vector<int> state_dims)
      : bounds_(std::move(bounds)),
        graph_(&graph),
        state_dims_(std::move(state_dims)) {
    if (bounds_.num_varying() < 1) {
      throw ConfigError("polytope: need at least one varying entry");
    }
    for (const auto& e : bounds_.varying) {
      if (!(e.lo < e.hi)) {
        throw ConfigError(
            "polytope: degenerate interval in the varying set (entry should "
            "have been folded into the constant base)");
      }
    }
    const int n = graph_->num_agents();
    x_offset_.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) x_offset_[i + 1] = x_offset_[i] + state_dims_[i];
    base_ = Eigen::MatrixXd::Zero(x_offset_[n], x_offset_[n]);
    for (const auto& c : bounds_.constant) {
      base_(x_offset_[c.pos.i] + c.pos.row, x_offset_[c.pos.j] + c.pos.col) =
          c.value;
    }
  }

  int num_varying() const { return bounds_.num_varying(); }  // S
  int num_vertices() const { return 2 * num_varying(); }     // P = 2S
  int state_size() const { return x_offset_.back(); }
  const Graph& graph() const { return *graph_; }
  const EntryBounds& bounds() const { return bounds_; }
  const Eigen::MatrixXd& base_matrix() const { return base_; }
  const std::vector<int>& state_dims() const { return state_dims_; }
  int state_offset(int i) const { return x_offset_.at(i); }

  // The scalar entry a vertex pins: vertices 0..S-1 pin entry p at its lower
  // bound, vertices S..2S-1 pin entry p-S at its upper bound.
  int vertex_scalar(int p) const {
    check_vertex(p);
    return p < num_varying() ? p : p - num_varying();
  }
  bool vertex_is_upper(int p) const {
    check_vertex(p);
    return p >= num_varying();
  }

  // Block (agent pair) owning vertex p's pinned entry; under the
  // single-entry mask rule this is the only block where the matching vertex
  // gain may be nonzero.
  std::pair<int, int> vertex_block(int p) const {
    const auto& pos = bounds_.varying[vertex_scalar(p)].pos;
    return {pos.i, pos.j};
  }

  Eigen::MatrixXd vertex(int p) const {
    const int s = vertex_scalar(p);
    const auto& e = bounds_.varying[s];
    Eigen::MatrixXd V = base_;
    const double extreme = vertex_is_upper(p) ? e.hi : e.lo;
    V(x_offset_[e.pos.i] + e.pos.row, x_offset_[e.pos.j] + e.pos.col) +=
        num_varying() * extreme;
    return V;
  }

  // Reads the current values of the varying entries out of a linearization
  // time slice, in catalogue order.
  Eigen::VectorXd entry_values(const LinearizationSequence& seq, int t) const {
    Eigen::VectorXd vals(num_varying());
    for (int s = 0; s < num_varying(); ++s) {
      const auto& pos = bounds_.varying[s].pos;
      vals(s) = seq.state_block(t, pos.i, pos.j)(pos.row, pos.col);
    }
    return vals;
  }

  // Out-of-interval observation made while evaluating coefficients; the
  // coefficient itself is computed from the clipped value.
  struct Saturation {
    int s = 0;
    double value = 0.0;
    double excess = 0.0;
  };

  // Simplex coefficients for a slice with the given varying-entry values:
  //   lambda_s = (hi - a_s) / (hi - lo) clipped to [0, 1],
  //   theta_s = lambda_s / S,  theta_{S+s} = (1 - lambda_s) / S.
  Eigen::VectorXd coefficients(const Eigen::VectorXd& values,
                               std::vector<Saturation>* saturations = nullptr) const {
    const int S = num_varying();
    if (values.size() != S) {
      throw ShapeError("polytope: expected " + std::to_string(S) +
                       " entry values, got " + std::to_string(values.size()));
    }
    Eigen::VectorXd theta(2 * S);
    for (int s = 0; s < S; ++s) {
      const auto& e = bounds_.varying[s];
      double lam = (e.hi - values(s)) / (e.hi - e.lo);
      if (lam < 0.0 || lam > 1.0) {
        if (saturations) {
          double excess = values(s) < e.lo ? e.lo - values(s) : values(s) - e.hi;
          saturations->push_back({s, values(s), excess});
        }
        lam = std::clamp(lam, 0.0, 1.0);
      }
      theta(s) = lam / S;
      theta(S + s) = (1.0 - lam) / S;
    }
    return theta;
  }

  // sum_p theta_p V_p.  Requires theta in the simplex to tolerance.
  Eigen::MatrixXd reconstruct(const Eigen::VectorXd& theta,
                              double tol = 1e-12) const {
    const int S = num_varying();
    if (theta.size() != 2 * S) {
      throw ShapeError("polytope: coefficient vector has wrong size");
    }
    if (theta.minCoeff() < -tol || std::abs(theta.sum() - 1.0) > tol) {
      throw ConfigError("polytope: coefficients violate the simplex");
    }
    Eigen::MatrixXd A = base_;
    for (int s = 0; s < S; ++s) {
      const auto& e = bounds_.varying[s];
      A(x_offset_[e.pos.i] + e.pos.row, x_offset_[e.pos.j] + e.pos.col) +=
          S * (theta(s) * e.lo + theta(S + s) * e.hi);
    }
    return A;
  }

 private:
  void check_vertex(int p) const {
    if (p < 0 || p >= num_vertices()) {
      throw ShapeError("polytope: vertex index " + std::to_string(p) +
                       " out of range");
    }
  }

  EntryBounds bounds_;
  const Graph* graph_ = nullptr;
  std::vector<int> state_dims_;
  std::vector<int> x_offset_;
  Eigen::MatrixXd base_;
};

inline PolytopeModel build_polytope(const EntryBounds& bounds,
                                    const CoupledSystem& sys) {
  std::vector<int> dims(sys.num_agents());
  for (int i = 0; i < sys.num_agents(); ++i) dims[i] = sys.state_dim(i);
  return PolytopeModel(bounds, sys.graph(), std::move(dims));
}

}  // namespace gnoc

#endif  // GNOC_POLYTOPE_HPP_
