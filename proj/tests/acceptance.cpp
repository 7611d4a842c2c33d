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

// Release gate.  Nine numbered end-to-end checks, one line of output each,
// with every tolerance pinned in this file.  The process exits with the
// number of failed criteria, so an exit code of zero means the build is
// acceptable.  Unlike the unit suites, which isolate single modules, each
// criterion here drives a whole pipeline and judges it against independent
// oracles, closed forms, or exact structural identities.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gnoc/benchmark.hpp"
#include "gnoc/derivative_check.hpp"
#include "gnoc/distopt.hpp"
#include "gnoc/errors.hpp"
#include "gnoc/gains.hpp"
#include "gnoc/graph.hpp"
#include "gnoc/linearization.hpp"
#include "gnoc/lmi.hpp"
#include "gnoc/polytope.hpp"
#include "gnoc/projection.hpp"
#include "gnoc/registry.hpp"
#include "gnoc/trajectory.hpp"
#include "oracles.hpp"

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace gnoc;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

std::vector<int> offsets_of(const std::vector<int>& dims) {
  std::vector<int> off(dims.size() + 1, 0);
  for (size_t i = 0; i < dims.size(); ++i) off[i + 1] = off[i] + dims[i];
  return off;
}

// Stacked state matrix with the catalogued constants and the given values
// in the varying slots; positions outside the catalogue are zero.
MatrixXd assemble_matrix(const EntryBounds& bounds,
                         const std::vector<int>& dims, const VectorXd& vals) {
  const std::vector<int> off = offsets_of(dims);
  MatrixXd A = MatrixXd::Zero(off.back(), off.back());
  for (const ConstantEntry& c : bounds.constant) {
    A(off[c.pos.i] + c.pos.row, off[c.pos.j] + c.pos.col) = c.value;
  }
  for (int s = 0; s < bounds.num_varying(); ++s) {
    const EntryPosition& p = bounds.varying[s].pos;
    A(off[p.i] + p.row, off[p.j] + p.col) = vals(s);
  }
  return A;
}

VectorXd random_in_bounds(const EntryBounds& bounds, std::mt19937& rng) {
  VectorXd vals(bounds.num_varying());
  for (int s = 0; s < bounds.num_varying(); ++s) {
    std::uniform_real_distribution<double> d(bounds.varying[s].lo,
                                             bounds.varying[s].hi);
    vals(s) = d(rng);
  }
  return vals;
}

VectorXd random_simplex(int size, std::mt19937& rng) {
  std::exponential_distribution<double> exp1(1.0);
  VectorXd theta(size);
  for (int p = 0; p < size; ++p) theta(p) = exp1(rng);
  return theta / theta.sum();
}

// Scalar-block interval catalogue over a graph's edges: the diagonal varies
// around `diag`, every cross edge around `off`, both by +-ratio.
EntryBounds cycle_bounds(const Graph& g, double diag, double off,
                         double ratio) {
  EntryBounds b;
  for (int i = 0; i < g.num_agents(); ++i) {
    for (int j : g.neighbors(i)) {
      const double nominal = (i == j) ? diag : off;
      b.varying.push_back(
          {{i, j, 0, 0}, nominal * (1.0 - ratio), nominal * (1.0 + ratio)});
    }
  }
  return b;
}

// Dense gain assembled from the per-agent tables; blocks the tables do not
// own stay zero, which is the locality claim itself.
MatrixXd assemble_local_gain(const std::vector<LocalGainTable>& tables,
                             const Graph& g, const MatrixXd& A,
                             const std::vector<int>& xdims,
                             const std::vector<int>& udims) {
  const std::vector<int> xoff = offsets_of(xdims);
  const std::vector<int> uoff = offsets_of(udims);
  MatrixXd K = MatrixXd::Zero(uoff.back(), xoff.back());
  for (int i = 0; i < g.num_agents(); ++i) {
    for (int j : g.neighbors(i)) {
      const MatrixXd coupling =
          A.block(xoff[i], xoff[j], xdims[i], xdims[j]);
      K.block(uoff[i], xoff[j], udims[i], xdims[j]) =
          tables[i].gain_block(j, coupling);
    }
  }
  return K;
}

// Certified instances produced by criterion 2 and reused downstream, plus
// the full benchmark run shared between criteria 8 and 9.
struct SharedState {
  std::optional<Graph> single_graph, ring_graph;
  EntryBounds single_bounds, ring_bounds;
  std::optional<PolytopeModel> single_model, ring_model;
  std::optional<SynthesisCertificate> single_cert, ring_cert;
  std::optional<BenchmarkResult> bench;
  int bench_agents = 0;
  int bench_horizon = 0;
};

// ---------------------------------------------------------------------------
// 1. Coefficient round-trip over random graphs: any in-bounds matrix maps to
//    simplex coefficients that reconstruct it to machine accuracy.
// ---------------------------------------------------------------------------
bool criterion1(SharedState&, std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(2026);
  double worst_matrix = 0.0;
  double worst_simplex = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 4u);  // 3..6 agents
    std::vector<std::vector<int>> nb(n);
    std::bernoulli_distribution edge(0.5);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (edge(rng)) {
          nb[i].push_back(j);
          nb[j].push_back(i);
        }
      }
    }
    const Graph graph(nb);
    std::vector<int> dims(n);
    for (int i = 0; i < n; ++i) dims[i] = 1 + static_cast<int>(rng() % 2u);

    std::uniform_real_distribution<double> center(-2.0, 2.0);
    std::uniform_real_distribution<double> width(0.1, 2.0);
    std::bernoulli_distribution varying(0.6), present(0.7);
    EntryBounds bounds;
    for (int i = 0; i < n; ++i) {
      for (int j : graph.neighbors(i)) {
        for (int r = 0; r < dims[i]; ++r) {
          for (int c = 0; c < dims[j]; ++c) {
            const bool force = bounds.num_varying() == 0 && i == n - 1 &&
                               j == i && r == dims[i] - 1 && c == dims[j] - 1;
            if (!force && !present(rng)) continue;
            if (force || varying(rng)) {
              const double lo = center(rng);
              bounds.varying.push_back({{i, j, r, c}, lo, lo + width(rng)});
            } else {
              bounds.constant.push_back({{i, j, r, c}, center(rng)});
            }
          }
        }
      }
    }

    const PolytopeModel model(bounds, graph, dims);
    const VectorXd vals = random_in_bounds(bounds, rng);
    const MatrixXd A = assemble_matrix(bounds, dims, vals);

    // Read the varying entries back off the assembled matrix so the test
    // covers the full matrix -> coefficients -> matrix loop.
    const std::vector<int> off = offsets_of(dims);
    VectorXd observed(bounds.num_varying());
    for (int s = 0; s < bounds.num_varying(); ++s) {
      const EntryPosition& p = bounds.varying[s].pos;
      observed(s) = A(off[p.i] + p.row, off[p.j] + p.col);
    }
    const VectorXd theta = model.coefficients(observed);
    worst_simplex = std::max(worst_simplex,
                             std::max(-theta.minCoeff(),
                                      std::abs(theta.sum() - 1.0)));
    const MatrixXd back = model.reconstruct(theta, 1e-12);
    worst_matrix =
        std::max(worst_matrix, (back - A).cwiseAbs().maxCoeff());
  }
  const double elapsed = seconds_since(start);

  std::ostringstream s;
  s << "1000 graphs, max |reconstruct - A| = " << worst_matrix
    << ", max simplex defect = " << worst_simplex << ", " << elapsed << " s";
  detail = s.str();
  return worst_matrix <= 1e-12 && worst_simplex <= 1e-12 && elapsed < 5.0;
}

// ---------------------------------------------------------------------------
// 2. Gain synthesis on a scalar interval plant and on the three-agent cycle
//    with +-20% boxes: terminates, and the certificate survives an
//    independent recheck.
// ---------------------------------------------------------------------------
bool criterion2(SharedState& shared, std::string& detail) {
  const auto start = std::chrono::steady_clock::now();

  shared.single_graph.emplace(Graph::cycle(1));
  shared.single_bounds.varying.push_back({{0, 0, 0, 0}, 0.3, 0.9});
  shared.single_model.emplace(shared.single_bounds, *shared.single_graph,
                              std::vector<int>{1});
  const SynthesisOptions opt;  // defaults: full witnesses, nu = 0.05
  shared.single_cert = synthesize_gains(*shared.single_model,
                                        MatrixXd::Identity(1, 1), {1}, opt);

  shared.ring_graph.emplace(Graph::cycle(3));
  shared.ring_bounds = cycle_bounds(*shared.ring_graph, 0.5, 0.1, 0.2);
  shared.ring_model.emplace(shared.ring_bounds, *shared.ring_graph,
                            std::vector<int>{1, 1, 1});
  shared.ring_cert = synthesize_gains(*shared.ring_model,
                                      MatrixXd::Identity(3, 3), {1, 1, 1},
                                      opt);

  bool ok = true;
  std::ostringstream s;
  for (const auto* cert : {&*shared.single_cert, &*shared.ring_cert}) {
    ok = ok && cert->success && cert->rounds <= 50;
    const CertificateCheck check = recheck_certificate(*cert);
    ok = ok && check.min_eigenvalue >= -1e-8 &&
         check.max_sparsity_violation < 1e-6 &&
         check.max_spectral_radius < 1.0;
    s << "[rounds " << cert->rounds << ", min eig " << check.min_eigenvalue
      << ", sparsity " << check.max_sparsity_violation << ", rho "
      << check.max_spectral_radius << "] ";
  }
  const double elapsed = seconds_since(start);
  s << elapsed << " s";
  detail = s.str();
  if (!ok) {
    shared.single_cert.reset();
    shared.ring_cert.reset();
  }
  return ok && elapsed < 300.0;
}

// ---------------------------------------------------------------------------
// 3. Closed-loop decay: along 100 random simplex scheduling sequences per
//    certified instance, the state norm contracts from 1 to below 1e-6.
// ---------------------------------------------------------------------------
bool criterion3(SharedState& shared, std::string& detail) {
  if (!shared.single_cert || !shared.ring_cert) {
    detail = "prerequisite certificates missing (criterion 2 failed)";
    return false;
  }
  std::mt19937 rng(3);
  int worst_steps = 0;
  for (const SynthesisCertificate* cert :
       {&*shared.single_cert, &*shared.ring_cert}) {
    const int P = cert->num_vertices();
    const int nx = cert->state_size();
    std::vector<MatrixXd> closed(P);
    for (int p = 0; p < P; ++p) {
      closed[p] = cert->vertex_matrix(p) - cert->input_matrix * cert->gains[p];
    }
    for (int run = 0; run < 100; ++run) {
      VectorXd x = VectorXd::Zero(nx);
      for (int k = 0; k < nx; ++k) {
        x(k) = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
      }
      x /= x.norm();
      int steps = 0;
      for (; steps < 5000 && x.norm() >= 1e-6; ++steps) {
        const VectorXd theta = random_simplex(P, rng);
        MatrixXd M = theta(0) * closed[0];
        for (int p = 1; p < P; ++p) M += theta(p) * closed[p];
        x = M * x;
      }
      if (x.norm() >= 1e-6) {
        std::ostringstream s;
        s << "no contraction within 5000 steps (instance nx = " << nx << ")";
        detail = s.str();
        return false;
      }
      worst_steps = std::max(worst_steps, steps);
    }
  }
  std::ostringstream s;
  s << "200 scheduling sequences decayed 1 -> <1e-6, worst " << worst_steps
    << " steps";
  detail = s.str();
  return true;
}

// ---------------------------------------------------------------------------
// 4. Local gain evaluation: the stacked per-agent table output equals the
//    centralized vertex blend, and the blend is exactly zero off the graph.
//    The three-agent cycle is complete, so a five-agent cycle (synthesized
//    here, structural mode) supplies genuinely absent edges.
// ---------------------------------------------------------------------------
bool criterion4(SharedState& shared, std::string& detail) {
  if (!shared.ring_cert) {
    detail = "prerequisite certificate missing (criterion 2 failed)";
    return false;
  }
  const Graph five = Graph::cycle(5);
  const EntryBounds five_bounds = cycle_bounds(five, 0.5, 0.1, 0.2);
  const PolytopeModel five_model(five_bounds, five,
                                 std::vector<int>(5, 1));
  SynthesisOptions opt;
  opt.block_diagonal_witnesses = true;
  const SynthesisCertificate five_cert = synthesize_gains(
      five_model, MatrixXd::Identity(5, 5), std::vector<int>(5, 1), opt);
  if (!five_cert.success) {
    detail = "five-agent synthesis failed: " + five_cert.failure_reason;
    return false;
  }

  std::mt19937 rng(4);
  double worst = 0.0;
  double off_graph = 0.0;
  long off_entries = 0;
  struct Instance {
    const SynthesisCertificate* cert;
    const PolytopeModel* model;
    const EntryBounds* bounds;
    const Graph* graph;
  };
  const Instance instances[] = {
      {&*shared.ring_cert, &*shared.ring_model, &shared.ring_bounds,
       &*shared.ring_graph},
      {&five_cert, &five_model, &five_bounds, &five},
  };
  for (const Instance& inst : instances) {
    const int n = inst.graph->num_agents();
    const std::vector<int> dims(n, 1);
    const auto tables = build_gain_tables(*inst.cert, *inst.graph);
    for (int trial = 0; trial < 50; ++trial) {
      const VectorXd vals = random_in_bounds(*inst.bounds, rng);
      const MatrixXd A = assemble_matrix(*inst.bounds, dims, vals);
      const VectorXd theta = inst.model->coefficients(vals);
      MatrixXd centralized =
          MatrixXd::Zero(inst.cert->input_size(), inst.cert->state_size());
      for (int p = 0; p < inst.cert->num_vertices(); ++p) {
        centralized += theta(p) * inst.cert->gains[p];
      }
      const MatrixXd local =
          assemble_local_gain(tables, *inst.graph, A, dims, dims);
      worst = std::max(worst,
                       (local - centralized).cwiseAbs().maxCoeff());
      // Exact zeros wherever the graph has no edge.
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (inst.graph->adjacent(i, j)) continue;
          off_graph = std::max(off_graph, std::abs(centralized(i, j)));
          off_graph = std::max(off_graph, std::abs(local(i, j)));
          ++off_entries;
        }
      }
    }
  }
  std::ostringstream s;
  s << "100 evaluations, max |local - centralized| = " << worst << ", "
    << off_entries << " off-graph entries, max magnitude " << off_graph;
  detail = s.str();
  return worst <= 1e-12 && off_graph == 0.0 && off_entries > 0;
}

// ---------------------------------------------------------------------------
// 5. Projection operator: projecting a projected trajectory changes nothing,
//    every output satisfies the dynamics, and zero feedback reduces the
//    projection to the open-loop rollout bit for bit.
// ---------------------------------------------------------------------------
bool criterion5(SharedState& shared, std::string& detail) {
  if (!shared.ring_cert) {
    detail = "prerequisite certificate missing (criterion 2 failed)";
    return false;
  }
  KeyValueConfig cfg;
  cfg.set("dynamics", "linear-ring");
  cfg.set("agents", "3");
  const auto sys = make_system(cfg);
  const auto tables = build_gain_tables(*shared.ring_cert, sys->graph());

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  auto random_curve = [&](int T) {
    Trajectory curve(*sys, T);
    for (int i = 0; i < 3; ++i) {
      for (int t = 0; t <= T; ++t) curve.x(i, t)[0] = dist(rng);
      for (int t = 0; t < T; ++t) curve.u(i, t)[0] = dist(rng);
    }
    return curve;
  };

  double worst_idem = 0.0, worst_defect = 0.0, worst_open = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Trajectory curve = random_curve(15);
    const ProjectionResult once = project_curve(*sys, tables, curve);
    worst_defect = std::max(
        worst_defect, verify_trajectory(*sys, once.trajectory).max_defect);
    const ProjectionResult twice =
        project_curve(*sys, tables, once.trajectory);
    for (int i = 0; i < 3; ++i) {
      for (int t = 0; t <= 15; ++t) {
        worst_idem = std::max(
            worst_idem, (twice.trajectory.x(i, t) - once.trajectory.x(i, t))
                            .cwiseAbs()
                            .maxCoeff());
      }
      for (int t = 0; t < 15; ++t) {
        worst_idem = std::max(
            worst_idem, (twice.trajectory.u(i, t) - once.trajectory.u(i, t))
                            .cwiseAbs()
                            .maxCoeff());
      }
    }

    // Zero-gain projection versus the open-loop rollout: identical bits.
    SynthesisCertificate zero = *shared.ring_cert;
    for (auto& g : zero.gains) g.setZero();
    const auto zero_tables = build_gain_tables(zero, sys->graph());
    const ProjectionResult open_proj =
        project_curve(*sys, zero_tables, curve);
    std::vector<VectorXd> x0(3);
    for (int i = 0; i < 3; ++i) x0[i] = curve.x(i, 0);
    const Trajectory rolled = rollout_open_loop(*sys, x0, curve);
    for (int i = 0; i < 3; ++i) {
      for (int t = 0; t <= 15; ++t) {
        worst_open = std::max(
            worst_open, (open_proj.trajectory.x(i, t) - rolled.x(i, t))
                            .cwiseAbs()
                            .maxCoeff());
      }
      for (int t = 0; t < 15; ++t) {
        worst_open = std::max(
            worst_open, (open_proj.trajectory.u(i, t) - rolled.u(i, t))
                            .cwiseAbs()
                            .maxCoeff());
      }
    }
  }
  std::ostringstream s;
  s << "20 curves: idempotence " << worst_idem << ", defect " << worst_defect
    << ", |zero-gain - open-loop| = " << worst_open;
  detail = s.str();
  return worst_idem <= 1e-14 && worst_defect <= 1e-12 && worst_open == 0.0;
}

// ---------------------------------------------------------------------------
// 6. Optimizer against closed forms on the linear-quadratic ring: converges,
//    matches the Riccati optimum, tracks a dense whole-network reference
//    iterate by iterate, and always points downhill.
// ---------------------------------------------------------------------------
bool criterion6(SharedState& shared, std::string& detail) {
  if (!shared.ring_cert) {
    detail = "prerequisite certificate missing (criterion 2 failed)";
    return false;
  }
  const auto start = std::chrono::steady_clock::now();
  KeyValueConfig cfg;
  cfg.set("dynamics", "linear-ring");
  cfg.set("agents", "3");
  const auto sys = make_system(cfg);
  const auto tables = build_gain_tables(*shared.ring_cert, sys->graph());

  MatrixXd A(3, 3);
  A << 0.5, 0.1, 0.1, 0.1, 0.5, 0.1, 0.1, 0.1, 0.5;
  const MatrixXd B = MatrixXd::Identity(3, 3);
  const MatrixXd Q = MatrixXd::Identity(3, 3);
  const MatrixXd K_dense = blend_gain_dense(*shared.ring_cert, A);

  auto stack_x = [](const Trajectory& tr, int t) {
    VectorXd v(3);
    for (int i = 0; i < 3; ++i) v(i) = tr.x(i, t)[0];
    return v;
  };
  auto stack_u = [](const Trajectory& tr, int t) {
    VectorXd v(3);
    for (int i = 0; i < 3; ++i) v(i) = tr.u(i, t)[0];
    return v;
  };

  const int T = 20;
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Trajectory curve(*sys, T);
  for (int i = 0; i < 3; ++i) {
    for (int t = 0; t <= T; ++t) curve.x(i, t)[0] = dist(rng);
    for (int t = 0; t < T; ++t) curve.u(i, t)[0] = dist(rng);
  }

  // (a) Converged run against the Riccati optimum.
  DescentOptions opt;
  opt.step = 0.5;
  opt.tolerance = 1e-8;
  opt.max_iterations = 500;
  const DescentResult res = descend(*sys, tables, curve, opt);
  if (!res.converged || res.direction_norm >= 1e-8) {
    detail = "descent did not reach |(z,v)| < 1e-8";
    return false;
  }
  const auto ric = gnoc_tests::riccati(A, B, Q, Q, Q, T);
  double worst_riccati = 0.0;
  VectorXd x = stack_x(res.trajectory, 0);
  for (int t = 0; t < T; ++t) {
    const VectorXd u_opt = -ric.K[t] * x;
    worst_riccati = std::max(
        worst_riccati,
        (stack_u(res.trajectory, t) - u_opt).cwiseAbs().maxCoeff());
    x = A * x + B * u_opt;
    worst_riccati = std::max(
        worst_riccati,
        (stack_x(res.trajectory, t + 1) - x).cwiseAbs().maxCoeff());
  }

  // (b) Iterate-by-iterate match with a dense whole-network reference.
  const int iters = 40;
  DescentOptions fixed;
  fixed.step = 0.5;
  fixed.tolerance = 0.0;
  fixed.max_iterations = iters;
  fixed.record_details = true;
  const DescentResult dist_res = descend(*sys, tables, curve, fixed);
  std::vector<VectorXd> alpha(T + 1), mu(T);
  for (int t = 0; t <= T; ++t) alpha[t] = stack_x(curve, t);
  for (int t = 0; t < T; ++t) mu[t] = stack_u(curve, t);
  double worst_iterate = 0.0;
  for (int k = 0; k < iters; ++k) {
    std::vector<VectorXd> xs(T + 1), us(T);
    xs[0] = alpha[0];
    for (int t = 0; t < T; ++t) {
      us[t] = mu[t] + K_dense * (alpha[t] - xs[t]);
      xs[t + 1] = A * xs[t] + B * us[t];
    }
    for (int t = 0; t <= T; ++t) {
      worst_iterate = std::max(
          worst_iterate,
          (stack_x(dist_res.iterates[k], t) - xs[t]).cwiseAbs().maxCoeff());
    }
    for (int t = 0; t < T; ++t) {
      worst_iterate = std::max(
          worst_iterate,
          (stack_u(dist_res.iterates[k], t) - us[t]).cwiseAbs().maxCoeff());
    }
    std::vector<MatrixXd> As(T, A), Bs(T, B), Ks(T, K_dense);
    std::vector<VectorXd> gx(T), gu(T);
    for (int t = 0; t < T; ++t) {
      gx[t] = Q * xs[t];
      gu[t] = Q * us[t];
    }
    const auto dd =
        gnoc_tests::dense_descent(As, Bs, Ks, gx, gu, Q * xs[T]);
    for (int t = 0; t <= T; ++t) alpha[t] = xs[t] + 0.5 * dd.z[t];
    for (int t = 0; t < T; ++t) mu[t] = us[t] + 0.5 * dd.v[t];
  }

  // (c) Finite-difference slope along (z, v) at every non-converged iterate.
  Trajectory walk = curve;
  int fd_checked = 0;
  double worst_fd = -1.0;
  for (int k = 0; k < 500; ++k) {
    const SweepResult sweep = distributed_sweep(*sys, tables, walk);
    if (sweep.direction_norm < 1e-8) break;
    const auto f_along = [&](double h) {
      const Trajectory cand = sweep.trajectory.axpy(h, sweep.direction);
      return total_cost(*sys, project_curve(*sys, tables, cand).trajectory);
    };
    const double fd = fd_directional(f_along, 1e-6);
    worst_fd = std::max(worst_fd, fd);
    ++fd_checked;
    if (fd >= 0.0) {
      std::ostringstream s;
      s << "nonnegative directional derivative " << fd << " at iterate " << k;
      detail = s.str();
      return false;
    }
    walk = sweep.trajectory.axpy(0.5, sweep.direction);
  }
  const double elapsed = seconds_since(start);

  std::ostringstream s;
  s << "Riccati gap " << worst_riccati << ", dense-reference gap "
    << worst_iterate << " over " << iters << " iterates, max fd slope "
    << worst_fd << " over " << fd_checked << " iterates, " << elapsed
    << " s";
  detail = s.str();
  return worst_riccati <= 1e-6 && worst_iterate <= 1e-10 &&
         fd_checked > 0 && elapsed < 60.0;
}

// ---------------------------------------------------------------------------
// 7. Anytime feasibility: stopping after 1, 2, or 5 sweeps still leaves a
//    dynamically feasible trajectory, and so does every recorded iterate.
// ---------------------------------------------------------------------------
bool criterion7(SharedState& shared, std::string& detail) {
  if (!shared.ring_cert) {
    detail = "prerequisite certificate missing (criterion 2 failed)";
    return false;
  }
  KeyValueConfig cfg;
  cfg.set("dynamics", "linear-ring");
  cfg.set("agents", "3");
  const auto sys = make_system(cfg);
  const auto tables = build_gain_tables(*shared.ring_cert, sys->graph());

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Trajectory curve(*sys, 18);
  for (int i = 0; i < 3; ++i) {
    for (int t = 0; t <= 18; ++t) curve.x(i, t)[0] = dist(rng);
    for (int t = 0; t < 18; ++t) curve.u(i, t)[0] = dist(rng);
  }

  double worst = 0.0;
  long iterates = 0;
  for (int stop : {1, 2, 5}) {
    DescentOptions opt;
    opt.step = 0.5;
    opt.tolerance = 0.0;
    opt.max_iterations = stop;
    opt.record_details = true;
    const DescentResult res = descend(*sys, tables, curve, opt);
    if (res.iterations != stop) {
      detail = "early-stop run performed the wrong number of sweeps";
      return false;
    }
    worst =
        std::max(worst, verify_trajectory(*sys, res.trajectory).max_defect);
    for (const Trajectory& it : res.iterates) {
      worst = std::max(worst, verify_trajectory(*sys, it).max_defect);
      ++iterates;
    }
  }
  std::ostringstream s;
  s << "forced stops at 1, 2, 5 sweeps; " << iterates
    << " iterates, max dynamics defect = " << worst;
  detail = s.str();
  return worst <= 1e-12;
}

// ---------------------------------------------------------------------------
// 8. Formation experiment at the published parameters (sampling time 1e-2,
//    input coefficient 10, spacing 4, performance level 0.05, identity state
//    weight, 1e-5 input weight), reduced to the three-agent cycle: must
//    finish inside ten minutes, publish gains that vanish off the graph,
//    and cut the formation error below 1% of its initial value.
// ---------------------------------------------------------------------------
bool criterion8(SharedState& shared, std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  BenchmarkOptions opt;
  opt.formation.num_agents = 3;
  opt.seed = 8;
  opt.output_dir = std::string(GNOC_TEST_TMPDIR) + "/acceptance_bench";

  // The published parameters are the defaults; pin them here so a drifting
  // default fails loudly.
  if (opt.formation.sample_time != 1e-2 || opt.formation.input_gain != 10.0 ||
      opt.formation.spacing != 4.0 || opt.nu != 0.05) {
    detail = "benchmark defaults drifted from the published parameters";
    return false;
  }

  shared.bench = run_formation_benchmark(opt);
  shared.bench_agents = opt.formation.num_agents;
  shared.bench_horizon = opt.horizon;
  const BenchmarkResult& res = *shared.bench;
  const double elapsed = seconds_since(start);

  // Performance weights recorded in the certificate: C = I, D = 1e-5 I.
  const MatrixXd& C = res.certificate.perf_state;
  const MatrixXd& D = res.certificate.perf_input;
  const bool weights_ok =
      C.rows() == 6 && C.isIdentity(0.0) && D.rows() == 6 &&
      (D - 1e-5 * MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() == 0.0;

  // gains.csv: every published entry between non-adjacent agents is the
  // literal "0".  The three-agent cycle is complete, so this is structural
  // here; the six-agent long-form test exercises it with real holes.
  const Graph graph = Graph::cycle(3);
  std::ifstream gains(opt.output_dir + "/gains.csv");
  bool gains_ok = gains.good();
  std::string line;
  std::getline(gains, line);
  gains_ok = gains_ok && line == "t,i,j,component,k_value";
  while (std::getline(gains, line)) {
    std::istringstream row(line);
    std::string t, i, j, comp, value;
    std::getline(row, t, ',');
    std::getline(row, i, ',');
    std::getline(row, j, ',');
    std::getline(row, comp, ',');
    std::getline(row, value);
    if (!graph.adjacent(std::stoi(i), std::stoi(j)) && value != "0") {
      gains_ok = false;
    }
  }

  // error.csv: stacked error at the final time below 1% of the initial.
  std::ifstream err(opt.output_dir + "/error.csv");
  bool err_ok = err.good();
  std::getline(err, line);
  err_ok = err_ok && line == "t,agent,component,error";
  double e0 = 0.0, eT = 0.0;
  while (std::getline(err, line)) {
    std::istringstream row(line);
    std::string t, agent, comp, value;
    std::getline(row, t, ',');
    std::getline(row, agent, ',');
    std::getline(row, comp, ',');
    std::getline(row, value);
    const double e = std::stod(value);
    if (std::stoi(t) == 0) e0 += e * e;
    if (std::stoi(t) == opt.horizon) eT += e * e;
  }
  e0 = std::sqrt(e0);
  eT = std::sqrt(eT);
  err_ok = err_ok && e0 > 0.0 && eT < 0.01 * e0;

  std::ostringstream s;
  s << "error " << e0 << " -> " << eT << ", weights "
    << (weights_ok ? "pinned" : "WRONG") << ", gains table "
    << (gains_ok ? "clean" : "VIOLATED") << ", " << elapsed << " s";
  detail = s.str();
  return weights_ok && gains_ok && err_ok && res.check.passed(-1e-8, 1e-6) &&
         elapsed < 600.0;
}

// ---------------------------------------------------------------------------
// 9. Locality audit: every logged transmission crosses a real edge, and each
//    phase of each iteration carries exactly T * sum_i (|N_i| - 1) messages.
// ---------------------------------------------------------------------------
bool criterion9(SharedState& shared, std::string& detail) {
  if (!shared.ring_cert || !shared.bench) {
    detail = "prerequisite runs missing (criterion 2 or 8 failed)";
    return false;
  }
  KeyValueConfig cfg;
  cfg.set("dynamics", "linear-ring");
  cfg.set("agents", "3");
  const auto sys = make_system(cfg);
  const auto tables = build_gain_tables(*shared.ring_cert, sys->graph());

  const int T = 12;
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Trajectory curve(*sys, T);
  for (int i = 0; i < 3; ++i) {
    for (int t = 0; t <= T; ++t) curve.x(i, t)[0] = dist(rng);
    for (int t = 0; t < T; ++t) curve.u(i, t)[0] = dist(rng);
  }
  DescentOptions opt;
  opt.step = 0.5;
  opt.tolerance = 0.0;
  opt.max_iterations = 7;
  opt.trace_messages = true;
  const DescentResult res = descend(*sys, tables, curve, opt);

  const Graph& g = sys->graph();
  long pairs = 0;
  for (int i = 0; i < 3; ++i) {
    pairs += static_cast<long>(g.neighbors(i).size()) - 1;
  }
  const long per_phase = static_cast<long>(T) * pairs;

  long violations = 0;
  std::map<std::pair<int, int>, long> phase_counts;
  for (const MessageRecord& m : res.messages.log) {
    if (m.sender == m.receiver || !g.adjacent(m.sender, m.receiver)) {
      ++violations;
    }
    ++phase_counts[{m.iteration, m.phase}];
  }
  bool counts_ok =
      static_cast<long>(phase_counts.size()) == 2L * res.iterations;
  for (const auto& [key, count] : phase_counts) {
    counts_ok = counts_ok && count == per_phase;
  }
  counts_ok = counts_ok &&
              res.messages.forward == per_phase * res.iterations &&
              res.messages.backward == per_phase * res.iterations;

  // The formation run from criterion 8 obeys the same exact count.
  const BenchmarkResult& bench = *shared.bench;
  long bench_pairs = 0;
  const Graph bench_graph = Graph::cycle(shared.bench_agents);
  for (int i = 0; i < shared.bench_agents; ++i) {
    bench_pairs +=
        static_cast<long>(bench_graph.neighbors(i).size()) - 1;
  }
  const long bench_phase =
      static_cast<long>(shared.bench_horizon) * bench_pairs;
  counts_ok = counts_ok &&
              bench.descent.messages.forward ==
                  bench_phase * bench.descent.iterations &&
              bench.descent.messages.backward ==
                  bench_phase * bench.descent.iterations;
  long bench_violations = 0;
  for (const MessageRecord& m : bench.descent.messages.log) {
    if (m.sender == m.receiver ||
        !bench_graph.adjacent(m.sender, m.receiver)) {
      ++bench_violations;
    }
  }

  std::ostringstream s;
  s << res.messages.log.size() + bench.descent.messages.log.size()
    << " logged messages, " << violations + bench_violations
    << " locality violations, per-phase count "
    << (counts_ok ? "exact" : "WRONG");
  detail = s.str();
  return violations == 0 && bench_violations == 0 && counts_ok;
}

}  // namespace

int main() {
  SharedState shared;
  struct Criterion {
    int number;
    const char* name;
    bool (*run)(SharedState&, std::string&);
  };
  const Criterion criteria[] = {
      {1, "coefficient round-trip on random graphs", criterion1},
      {2, "gain synthesis with independent recheck", criterion2},
      {3, "scheduled closed-loop decay", criterion3},
      {4, "local gain equals centralized blend", criterion4},
      {5, "projection idempotence, feasibility, open-loop limit", criterion5},
      {6, "optimizer matches Riccati and dense reference", criterion6},
      {7, "anytime feasibility under forced early stops", criterion7},
      {8, "formation experiment at published parameters", criterion8},
      {9, "message locality and exact counts", criterion9},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    bool ok = false;
    std::string detail;
    try {
      ok = c.run(shared, detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (!ok) ++failures;
    std::printf("criterion %d: %s — %s (%s)\n", c.number,
                ok ? "PASS" : "FAIL", c.name, detail.c_str());
    std::fflush(stdout);
  }
  if (failures == 0) {
    std::printf("all 9 criteria passed\n");
  } else {
    std::printf("%d criteria FAILED\n", failures);
  }
  return failures;
}
