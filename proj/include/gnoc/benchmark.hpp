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

#ifndef GNOC_BENCHMARK_HPP_
#define GNOC_BENCHMARK_HPP_

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gnoc/distopt.hpp"
#include "gnoc/formation.hpp"
#include "gnoc/gains.hpp"
#include "gnoc/io.hpp"
#include "gnoc/linearization.hpp"
#include "gnoc/lmi.hpp"
#include "gnoc/polytope.hpp"
#include "gnoc/projection.hpp"
#include "gnoc/svg_plot.hpp"
#include "gnoc/trajectory.hpp"

// The packaged formation-control experiment: estimate coupling bounds from
// perturbed rollouts, synthesize sparse scheduled gains, stabilize a
// perturbed start onto the target formation, then run the distributed
// optimizer from the stabilized trajectory.  Everything is driven by one
// options struct and every artefact lands in one output directory.
namespace gnoc {

struct BenchmarkOptions {
  FormationConfig formation;  // agents on a cycle; planar double integrators
                              // of the potential-shaping form

  // Gain synthesis.
  double nu = 0.05;                      // performance level
  bool block_diagonal_witnesses = true;  // structural sparsity (fast path)

  // Coupling-bound estimation: open-loop rollouts from starts scattered
  // around the target formation.  The sampling radius deliberately exceeds
  // the later run radius so the scheduled run stays inside the boxes.
  int sample_count = 10;
  int sample_horizon = 250;
  double sample_radius = 0.5;
  double bound_margin = 0.05;

  // The target formation is the equilibrium reached by a long unforced
  // rollout from a slightly perturbed regular polygon.
  double settle_radius = 0.1;
  int settle_horizon = 2000;

  // Stabilization experiment and the optimizer run that follows it.
  double run_radius = 0.3;
  int horizon = 400;
  double step = 0.02;
  int max_iterations = 30;
  double tolerance = 1e-6;
  bool trace_messages = true;
  bool record_iterates = true;

  unsigned seed = 1;
  std::string output_dir;  // empty: in-memory run, no files
};

struct BenchmarkResult {
  EntryBounds bounds;
  SynthesisCertificate certificate;
  CertificateCheck check;
  std::vector<Eigen::VectorXd> desired;        // x_des
  std::vector<Eigen::VectorXd> start;          // perturbed initial states
  Trajectory stabilized;                       // projection of the target curve
  std::vector<GainSaturation> stabilization_clips;
  double initial_error = 0.0;  // stacked distance to x_des at t = 0
  double final_error = 0.0;    // ... and at t = horizon
  DescentResult descent;
  std::vector<Eigen::MatrixXd> gains_by_time;  // blended K_t, stabilized run
  std::vector<std::string> files;

  BenchmarkResult(const CoupledSystem& sys, int horizon)
      : stabilized(sys, horizon) {}
};

namespace detail_bench {

inline std::vector<Eigen::VectorXd> perturb(
    const std::vector<Eigen::VectorXd>& base, double radius,
    std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-radius, radius);
  std::vector<Eigen::VectorXd> out = base;
  for (auto& p : out) {
    for (Eigen::Index k = 0; k < p.size(); ++k) p[k] += dist(rng);
  }
  return out;
}

inline Trajectory open_loop_from(const CoupledSystem& sys,
                                 const std::vector<Eigen::VectorXd>& x0,
                                 int horizon) {
  Trajectory zeros(sys, horizon);
  return rollout_open_loop(sys, x0, zeros);
}

inline double stacked_error(const Trajectory& traj, int t,
                            const std::vector<Eigen::VectorXd>& desired) {
  double sq = 0.0;
  for (int i = 0; i < traj.num_agents(); ++i) {
    sq += (traj.x(i, t) - desired[i]).squaredNorm();
  }
  return std::sqrt(sq);
}

}  // namespace detail_bench

inline BenchmarkResult run_formation_benchmark(const BenchmarkOptions& opt) {
  namespace fs = std::filesystem;
  if (opt.sample_count < 1 || opt.sample_horizon < 1) {
    throw ConfigError("benchmark: need at least one bound-estimation rollout");
  }
  if (opt.settle_horizon < 1 || opt.horizon < 1) {
    throw ConfigError("benchmark: horizons must be positive");
  }

  FormationSystem sys(opt.formation);
  const int n = sys.num_agents();
  std::mt19937 rng(opt.seed);

  // Target formation: settle an unforced rollout onto the equilibrium set
  // (all ring distances equal to preferred spacing) near the regular polygon.
  const std::vector<Eigen::VectorXd> polygon = FormationSystem::polygon_formation(
      opt.formation.num_agents, opt.formation.spacing);
  const Trajectory settle = detail_bench::open_loop_from(
      sys, detail_bench::perturb(polygon, opt.settle_radius, rng),
      opt.settle_horizon);
  std::vector<Eigen::VectorXd> x_des(n);
  for (int i = 0; i < n; ++i) x_des[i] = settle.x(i, opt.settle_horizon);
  sys.set_desired(x_des);

  // Coupling boxes from unforced rollouts scattered around the target.  One
  // extra rollout pinned at the target keeps its couplings strictly inside.
  std::vector<Trajectory> samples;
  samples.push_back(detail_bench::open_loop_from(sys, x_des, 2));
  for (int k = 0; k < opt.sample_count; ++k) {
    samples.push_back(detail_bench::open_loop_from(
        sys, detail_bench::perturb(x_des, opt.sample_radius, rng),
        opt.sample_horizon));
  }
  BoundsOptions bopt;
  bopt.margin = opt.bound_margin;
  const EntryBounds bounds = estimate_bounds(sys, samples, bopt);

  // Scheduled gain synthesis on the resulting vertex family.
  const PolytopeModel model = build_polytope(bounds, sys);
  const LinearizationSequence lin0 = linearize_along(sys, samples.front());
  const Eigen::MatrixXd B = lin0.assemble_input_matrix();
  std::vector<int> input_dims(n);
  for (int i = 0; i < n; ++i) input_dims[i] = sys.input_dim(i);
  SynthesisOptions sopt;
  sopt.nu = opt.nu;
  sopt.block_diagonal_witnesses = opt.block_diagonal_witnesses;
  const SynthesisCertificate cert =
      synthesize_gains(model, B, input_dims, sopt);
  if (!cert.success) {
    std::string residuals;
    for (double r : cert.residual_history) {
      residuals += (residuals.empty() ? "" : ", ") +
                   detail_io::format_double(r);
    }
    throw NumericalError("benchmark: gain synthesis failed (" +
                         cert.failure_reason + "); masked-entry residuals [" +
                         residuals + "]");
  }

  BenchmarkResult res(sys, opt.horizon);
  res.bounds = bounds;
  res.certificate = cert;
  res.check = recheck_certificate(cert);
  res.desired = x_des;

  // Stabilization experiment: project the curve that starts at a perturbed
  // configuration and then sits on the target formation with zero
  // feedforward.  The scheduled feedback pulls the rollout onto the target.
  const std::vector<LocalGainTable> tables =
      build_gain_tables(cert, sys.graph());
  res.start = detail_bench::perturb(x_des, opt.run_radius, rng);
  Trajectory target_curve(sys, opt.horizon);
  for (int i = 0; i < n; ++i) {
    target_curve.x(i, 0) = res.start[i];
    for (int t = 1; t <= opt.horizon; ++t) target_curve.x(i, t) = x_des[i];
  }
  ProjectionResult stab = project_curve(sys, tables, target_curve);
  res.stabilized = stab.trajectory;
  res.stabilization_clips = std::move(stab.saturations);
  res.initial_error = detail_bench::stacked_error(res.stabilized, 0, x_des);
  res.final_error =
      detail_bench::stacked_error(res.stabilized, opt.horizon, x_des);

  // Blended gain schedule along the stabilized run (the dense reference
  // blend agrees with what the per-agent tables applied).
  const LinearizationSequence lin = linearize_along(sys, res.stabilized);
  for (int t = 0; t < opt.horizon; ++t) {
    res.gains_by_time.push_back(
        blend_gain_dense(cert, lin.assemble_state_matrix(t)));
  }

  // Optimizer run starting from the stabilized trajectory.
  DescentOptions dopt;
  dopt.step = opt.step;
  dopt.tolerance = opt.tolerance;
  dopt.max_iterations = opt.max_iterations;
  dopt.record_details = opt.record_iterates;
  dopt.trace_messages = opt.trace_messages;
  res.descent = descend(sys, tables, res.stabilized, dopt);

  if (!opt.output_dir.empty()) {
    fs::create_directories(opt.output_dir);
    auto emit = [&res, &opt](const std::string& name) {
      res.files.push_back(opt.output_dir + "/" + name);
      return res.files.back();
    };

    write_bounds(emit("bounds.txt"), res.bounds);
    write_certificate(emit("certificate.json"), res.certificate);

    std::vector<int> state_dims(n), in_dims(n);
    for (int i = 0; i < n; ++i) {
      state_dims[i] = sys.state_dim(i);
      in_dims[i] = sys.input_dim(i);
    }
    write_gains_csv(emit("gains.csv"), res.gains_by_time, state_dims,
                    in_dims);
    write_error_csv(emit("error.csv"), res.stabilized, x_des);

    for (std::string& path :
         write_run_outputs(opt.output_dir, sys, res.descent)) {
      res.files.push_back(std::move(path));
    }

    // Error decay per agent, log scale.
    std::vector<PlotSeries> err(n);
    for (int i = 0; i < n; ++i) {
      err[i].label = "agent " + std::to_string(i);
      for (int t = 0; t <= opt.horizon; ++t) {
        err[i].x.push_back(t);
        err[i].y.push_back((res.stabilized.x(i, t) - x_des[i]).norm());
      }
    }
    PlotOptions perr;
    perr.title = "Distance to the target formation";
    perr.x_label = "t";
    perr.y_label = "|x_i - x_des,i|";
    perr.log_y = true;
    write_line_plot(emit("error_plot.svg"), err, perr);

    // Gain-block magnitudes over time; blocks off the neighbor pattern sit
    // exactly on zero.
    std::vector<PlotSeries> gmag;
    std::vector<int> xoff(n + 1, 0), uoff(n + 1, 0);
    for (int i = 0; i < n; ++i) {
      xoff[i + 1] = xoff[i] + state_dims[i];
      uoff[i + 1] = uoff[i] + in_dims[i];
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        PlotSeries s;
        s.label = "K(" + std::to_string(i) + "," + std::to_string(j) + ")";
        for (int t = 0; t < opt.horizon; ++t) {
          s.x.push_back(t);
          s.y.push_back(res.gains_by_time[t]
                            .block(uoff[i], xoff[j], in_dims[i],
                                   state_dims[j])
                            .norm());
        }
        gmag.push_back(std::move(s));
      }
    }
    PlotOptions pg;
    pg.title = "Scheduled gain blocks along the stabilized run";
    pg.x_label = "t";
    pg.y_label = "|K_t(i,j)|_F";
    write_line_plot(emit("gains_plot.svg"), gmag, pg);

    // Manifest: every parameter, tolerance, and free choice of this run.
    nlohmann::json man;
    man["plant"] = {{"dynamics", "formation"},
                    {"agents", opt.formation.num_agents},
                    {"sample_time", opt.formation.sample_time},
                    {"input_gain", opt.formation.input_gain},
                    {"spacing", opt.formation.spacing},
                    {"state_weight", opt.formation.state_weight},
                    {"input_weight", opt.formation.input_weight},
                    {"terminal_weight", opt.formation.terminal_weight}};
    man["synthesis"] = {{"nu", opt.nu},
                        {"block_diagonal_witnesses",
                         opt.block_diagonal_witnesses},
                        {"perf_state", "identity"},
                        {"perf_input", "1e-5 * identity"},
                        {"varying_entries", cert.num_varying()},
                        {"vertices", cert.num_vertices()},
                        {"rounds", cert.rounds},
                        {"sdp_iterations", cert.sdp_iterations},
                        {"max_sparsity_violation",
                         cert.max_sparsity_violation},
                        {"recheck_min_eigenvalue", res.check.min_eigenvalue},
                        {"recheck_max_spectral_radius",
                         res.check.max_spectral_radius}};
    man["bounds"] = {{"sample_count", opt.sample_count},
                     {"sample_horizon", opt.sample_horizon},
                     {"sample_radius", opt.sample_radius},
                     {"margin", opt.bound_margin}};
    man["target"] = {
        {"rule",
         "unforced rollout from a perturbed regular polygon settles onto "
         "the equal-spacing equilibrium; its final state is the target"},
        {"settle_radius", opt.settle_radius},
        {"settle_horizon", opt.settle_horizon}};
    man["run"] = {{"run_radius", opt.run_radius},
                  {"horizon", opt.horizon},
                  {"step", opt.step},
                  {"max_iterations", opt.max_iterations},
                  {"tolerance", opt.tolerance},
                  {"trace_messages", opt.trace_messages},
                  {"seed", opt.seed}};
    auto states_json = [](const std::vector<Eigen::VectorXd>& xs) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& x : xs) {
        nlohmann::json p = nlohmann::json::array();
        for (Eigen::Index k = 0; k < x.size(); ++k) p.push_back(x[k]);
        arr.push_back(std::move(p));
      }
      return arr;
    };
    man["target"]["states"] = states_json(res.desired);
    man["run"]["initial_states"] = states_json(res.start);
    man["results"] = {{"initial_error", res.initial_error},
                      {"final_error", res.final_error},
                      {"error_ratio", res.final_error / res.initial_error},
                      {"stabilization_clips",
                       res.stabilization_clips.size()},
                      {"descent_iterations", res.descent.iterations},
                      {"descent_cost", res.descent.cost},
                      {"descent_direction_norm", res.descent.direction_norm},
                      {"descent_converged", res.descent.converged},
                      {"messages_forward", res.descent.messages.forward},
                      {"messages_backward", res.descent.messages.backward}};
    man["files"] = res.files;
    write_json(opt.output_dir + "/manifest.json", man);
    res.files.push_back(opt.output_dir + "/manifest.json");
  }

  return res;
}

}  // namespace gnoc

#endif  // GNOC_BENCHMARK_HPP_
