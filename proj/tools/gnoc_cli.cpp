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

#include <cstdio>
#include <deque>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "gnoc/benchmark.hpp"
#include "gnoc/distopt.hpp"
#include "gnoc/gains.hpp"
#include "gnoc/io.hpp"
#include "gnoc/lmi.hpp"
#include "gnoc/polytope.hpp"
#include "gnoc/projection.hpp"
#include "gnoc/registry.hpp"
#include "gnoc/trajectory.hpp"

namespace {

using namespace gnoc;

// Every subcommand resolves its settings the same way: a key=value config
// file provides the base, command-line flags override single keys.  The
// merged view is what runs and what the manifest records.
struct ConfigBuilder {
  CLI::App* cmd = nullptr;
  std::string config_path;
  // Deques: CLI11 keeps references to the slots, so addresses must survive
  // later registrations.
  std::deque<std::pair<std::string, std::string>> strings;
  std::deque<std::pair<std::string, double>> doubles;
  std::deque<std::pair<std::string, int>> ints;
  std::deque<std::pair<std::string, bool>> bools;

  explicit ConfigBuilder(CLI::App* c) : cmd(c) {
    cmd->add_option("--config", config_path,
                    "key=value file with the run configuration");
  }

  void str(const std::string& key, const std::string& help) {
    auto& slot = strings.emplace_back(key, std::string());
    cmd->add_option("--" + key, slot.second, help);
  }
  void num(const std::string& key, const std::string& help) {
    auto& slot = doubles.emplace_back(key, 0.0);
    cmd->add_option("--" + key, slot.second, help);
  }
  void integer(const std::string& key, const std::string& help) {
    auto& slot = ints.emplace_back(key, 0);
    cmd->add_option("--" + key, slot.second, help);
  }
  void boolean(const std::string& key, const std::string& help) {
    auto& slot = bools.emplace_back(key, false);
    cmd->add_flag("--" + key + ",!--no-" + key, slot.second, help);
  }

  KeyValueConfig resolve() const {
    KeyValueConfig cfg = config_path.empty()
                             ? KeyValueConfig()
                             : KeyValueConfig::from_file(config_path);
    for (const auto& [key, slot] : strings) {
      if (cmd->count("--" + key)) cfg.set(key, slot);
    }
    for (const auto& [key, slot] : doubles) {
      if (cmd->count("--" + key)) cfg.set(key, detail_io::format_double(slot));
    }
    for (const auto& [key, slot] : ints) {
      if (cmd->count("--" + key)) cfg.set(key, std::to_string(slot));
    }
    for (const auto& [key, slot] : bools) {
      if (cmd->count("--" + key)) cfg.set(key, slot ? "true" : "false");
    }
    return cfg;
  }
};

nlohmann::json config_json(const KeyValueConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, value] : cfg.items()) j[key] = value;
  return j;
}

// Stacked constant input map of a plant, taken from a one-step
// linearization at its reference configuration.
Eigen::MatrixXd stacked_input_matrix(const CoupledSystem& sys) {
  Trajectory zeros(sys, 1);
  const Trajectory probe =
      rollout_open_loop(sys, reference_states(sys), zeros);
  return linearize_along(sys, probe).assemble_input_matrix();
}

std::vector<int> input_dims_of(const CoupledSystem& sys) {
  std::vector<int> dims(sys.num_agents());
  for (int i = 0; i < sys.num_agents(); ++i) dims[i] = sys.input_dim(i);
  return dims;
}

// Default curve when no curve file is given: start at the reference
// configuration perturbed componentwise, then sit on the reference with
// zero feedforward.  The projection turns this into the stabilization run.
Trajectory default_curve(const CoupledSystem& sys, int horizon,
                         double start_radius, unsigned seed) {
  const std::vector<Eigen::VectorXd> ref = reference_states(sys);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-start_radius, start_radius);
  Trajectory curve(sys, horizon);
  for (int i = 0; i < sys.num_agents(); ++i) {
    curve.x(i, 0) = ref[i];
    for (Eigen::Index k = 0; k < ref[i].size(); ++k) {
      curve.x(i, 0)[k] += dist(rng);
    }
    for (int t = 1; t <= horizon; ++t) curve.x(i, t) = ref[i];
  }
  return curve;
}

int cmd_synthesize(const ConfigBuilder& flags) {
  const KeyValueConfig cfg = flags.resolve();
  const std::string bounds_path = cfg.get_string("bounds");
  const std::string cert_path = cfg.get_string("certificate");

  const auto sys = make_system(cfg);
  const EntryBounds bounds = read_bounds(bounds_path);
  const PolytopeModel model = build_polytope(bounds, *sys);

  SynthesisOptions sopt;
  sopt.nu = cfg.get_double("nu", sopt.nu);
  sopt.sparsity_tol = cfg.get_double("sparsity_tol", sopt.sparsity_tol);
  sopt.max_rounds = cfg.get_int("max_rounds", sopt.max_rounds);
  sopt.block_diagonal_witnesses =
      cfg.get_bool("structural", sopt.block_diagonal_witnesses);

  std::printf("synthesizing: %d varying entries, %d vertices\n",
              model.num_varying(), model.num_vertices());
  const SynthesisCertificate cert = synthesize_gains(
      model, stacked_input_matrix(*sys), input_dims_of(*sys), sopt);
  write_certificate(cert_path, cert);

  nlohmann::json man;
  man["command"] = "synthesize";
  man["config"] = config_json(cfg);
  man["tolerances"] = {{"nu", sopt.nu},
                       {"sparsity_tol", sopt.sparsity_tol},
                       {"max_rounds", sopt.max_rounds},
                       {"structural", sopt.block_diagonal_witnesses}};
  man["results"] = {{"success", cert.success},
                    {"failure_reason", cert.failure_reason},
                    {"rounds", cert.rounds},
                    {"sdp_iterations", cert.sdp_iterations},
                    {"max_sparsity_violation", cert.max_sparsity_violation},
                    {"residual_history", cert.residual_history}};
  man["files"] = {cert_path};
  write_json(cert_path + ".manifest.json", man);

  if (!cert.success) {
    std::printf("synthesis FAILED: %s\n", cert.failure_reason.c_str());
    return 1;
  }
  const CertificateCheck check = recheck_certificate(cert);
  std::printf("certificate written to %s\n", cert_path.c_str());
  std::printf("  rounds %d, %d SDP iterations\n", cert.rounds,
              cert.sdp_iterations);
  std::printf("  recheck: min eig %.3e, sparsity %.3e, spectral radius %.6f\n",
              check.min_eigenvalue, check.max_sparsity_violation,
              check.max_spectral_radius);
  return 0;
}

int cmd_run(const ConfigBuilder& flags) {
  const KeyValueConfig cfg = flags.resolve();
  const std::string out_dir = cfg.get_string("output_dir");
  const auto sys = make_system(cfg);
  const SynthesisCertificate cert =
      read_certificate(cfg.get_string("certificate"));
  const std::vector<LocalGainTable> tables =
      build_gain_tables(cert, sys->graph());

  const int horizon = cfg.get_int("horizon", 100);
  Trajectory curve =
      cfg.has("curve")
          ? read_trajectory_csv(cfg.get_string("curve"), *sys)
          : default_curve(*sys, horizon, cfg.get_double("start_radius", 0.3),
                          static_cast<unsigned>(cfg.get_int("seed", 1)));

  DescentOptions dopt;
  dopt.step = cfg.get_double("step", 0.02);
  dopt.tolerance = cfg.get_double("tolerance", dopt.tolerance);
  dopt.max_iterations = cfg.get_int("max_iterations", dopt.max_iterations);
  dopt.record_details = cfg.get_bool("record_iterates", true);
  dopt.trace_messages = cfg.get_bool("trace", true);

  const DescentResult res = descend(*sys, tables, curve, dopt);
  std::vector<std::string> files = write_run_outputs(out_dir, *sys, res);

  nlohmann::json man;
  man["command"] = "run";
  man["config"] = config_json(cfg);
  man["tolerances"] = {{"step", dopt.step},
                       {"tolerance", dopt.tolerance},
                       {"max_iterations", dopt.max_iterations}};
  man["results"] = {{"converged", res.converged},
                    {"iterations", res.iterations},
                    {"cost", res.cost},
                    {"direction_norm", res.direction_norm},
                    {"messages_forward", res.messages.forward},
                    {"messages_backward", res.messages.backward}};
  man["files"] = files;
  write_json(out_dir + "/manifest.json", man);

  std::printf("run finished: %d iterations, cost %.8f, |(z,v)| %.3e, %s\n",
              res.iterations, res.cost, res.direction_norm,
              res.converged ? "converged" : "iteration limit");
  std::printf("outputs in %s\n", out_dir.c_str());
  return 0;
}

int cmd_project(const ConfigBuilder& flags) {
  const KeyValueConfig cfg = flags.resolve();
  const auto sys = make_system(cfg);
  const SynthesisCertificate cert =
      read_certificate(cfg.get_string("certificate"));
  const std::vector<LocalGainTable> tables =
      build_gain_tables(cert, sys->graph());
  const Trajectory curve =
      read_trajectory_csv(cfg.get_string("curve"), *sys);

  const ProjectionResult res = project_curve(*sys, tables, curve);
  const FeasibilityReport report = verify_trajectory(*sys, res.trajectory);
  std::printf("projected %d-step curve: defect %.3e, cost %.8f, %zu clips\n",
              curve.horizon(), report.max_defect,
              total_cost(*sys, res.trajectory), res.saturations.size());

  if (cfg.has("output_dir")) {
    const std::string out_dir = cfg.get_string("output_dir");
    std::filesystem::create_directories(out_dir);
    write_iterates_csv(out_dir + "/projected.csv", {res.trajectory}, *sys);
    write_warnings_csv(out_dir + "/warnings.csv", {res.saturations});
    nlohmann::json man;
    man["command"] = "project";
    man["config"] = config_json(cfg);
    man["results"] = {{"max_defect", report.max_defect},
                      {"cost", total_cost(*sys, res.trajectory)},
                      {"clips", res.saturations.size()}};
    man["files"] = {out_dir + "/projected.csv", out_dir + "/warnings.csv"};
    write_json(out_dir + "/manifest.json", man);
    std::printf("outputs in %s\n", out_dir.c_str());
  }
  return 0;
}

int cmd_bench(const ConfigBuilder& flags) {
  const KeyValueConfig cfg = flags.resolve();
  BenchmarkOptions opt;
  opt.formation.num_agents =
      cfg.get_int("agents", opt.formation.num_agents);
  opt.formation.sample_time =
      cfg.get_double("sample_time", opt.formation.sample_time);
  opt.formation.input_gain =
      cfg.get_double("input_gain", opt.formation.input_gain);
  opt.formation.spacing = cfg.get_double("spacing", opt.formation.spacing);
  opt.nu = cfg.get_double("nu", opt.nu);
  opt.block_diagonal_witnesses = cfg.get_bool("structural", true);
  opt.sample_count = cfg.get_int("sample_count", opt.sample_count);
  opt.sample_horizon = cfg.get_int("sample_horizon", opt.sample_horizon);
  opt.sample_radius = cfg.get_double("sample_radius", opt.sample_radius);
  opt.bound_margin = cfg.get_double("margin", opt.bound_margin);
  opt.settle_radius = cfg.get_double("settle_radius", opt.settle_radius);
  opt.settle_horizon = cfg.get_int("settle_horizon", opt.settle_horizon);
  opt.run_radius = cfg.get_double("run_radius", opt.run_radius);
  opt.horizon = cfg.get_int("horizon", opt.horizon);
  opt.step = cfg.get_double("step", opt.step);
  opt.max_iterations = cfg.get_int("max_iterations", opt.max_iterations);
  opt.tolerance = cfg.get_double("tolerance", opt.tolerance);
  opt.trace_messages = cfg.get_bool("trace", true);
  opt.seed = static_cast<unsigned>(cfg.get_int("seed", 1));
  opt.output_dir = cfg.get_string("output_dir");

  std::printf("formation benchmark: %d agents, horizon %d\n",
              opt.formation.num_agents, opt.horizon);
  const BenchmarkResult res = run_formation_benchmark(opt);
  std::printf("synthesis: %d entries, %d vertices, %d SDP iterations\n",
              res.certificate.num_varying(), res.certificate.num_vertices(),
              res.certificate.sdp_iterations);
  std::printf("  recheck: min eig %.3e, sparsity %.3e, spectral radius %.6f\n",
              res.check.min_eigenvalue, res.check.max_sparsity_violation,
              res.check.max_spectral_radius);
  std::printf("stabilization: error %.4f -> %.3e (ratio %.3e)\n",
              res.initial_error, res.final_error,
              res.final_error / res.initial_error);
  std::printf("descent: %d iterations, cost %.8f, |(z,v)| %.3e\n",
              res.descent.iterations, res.descent.cost,
              res.descent.direction_norm);
  std::printf("outputs in %s\n", opt.output_dir.c_str());
  return 0;
}

int cmd_verify(const ConfigBuilder& flags) {
  const KeyValueConfig cfg = flags.resolve();
  const std::string cert_path = cfg.get_string("certificate");
  const double eig_tol = cfg.get_double("eig_tol", -1e-8);
  const double sparsity_tol = cfg.get_double("sparsity_tol", 1e-6);

  const SynthesisCertificate cert = read_certificate(cert_path);
  const CertificateCheck check = recheck_certificate(cert);
  const bool ok = check.passed(eig_tol, sparsity_tol);

  std::printf("certificate %s\n", cert_path.c_str());
  std::printf("  synthesis success flag: %s\n",
              cert.success ? "true" : "false");
  std::printf("  LMI min eigenvalue:     %.6e (tolerance %.1e)\n",
              check.min_eigenvalue, eig_tol);
  std::printf("  sparsity violation:     %.6e (tolerance %.1e)\n",
              check.max_sparsity_violation, sparsity_tol);
  std::printf("  max spectral radius:    %.9f (must be < 1)\n",
              check.max_spectral_radius);
  std::printf("verdict: %s\n", ok ? "PASS" : "FAIL");

  nlohmann::json man;
  man["command"] = "verify-certificate";
  man["config"] = config_json(cfg);
  man["tolerances"] = {{"eig_tol", eig_tol}, {"sparsity_tol", sparsity_tol}};
  man["results"] = {{"min_eigenvalue", check.min_eigenvalue},
                    {"max_sparsity_violation", check.max_sparsity_violation},
                    {"max_spectral_radius", check.max_spectral_radius},
                    {"passed", ok}};
  write_json(cert_path + ".verify.json", man);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gnoc: distributed nonlinear optimal control over graphs"};
  app.require_subcommand(0, 1);

  auto* synth = app.add_subcommand(
      "synthesize", "bounds file -> sparse scheduled gain certificate");
  ConfigBuilder synth_flags(synth);
  synth_flags.str("dynamics", "plant name (see --list)");
  synth_flags.integer("agents", "number of agents");
  synth_flags.str("bounds", "coupling-bounds file (input)");
  synth_flags.str("certificate", "certificate file (output)");
  synth_flags.num("nu", "performance level");
  synth_flags.num("sparsity_tol", "allowed masked-entry magnitude");
  synth_flags.integer("max_rounds", "sparsity refinement cap");
  synth_flags.boolean("structural",
                      "block-diagonal witnesses (sparsity by construction)");

  auto* run = app.add_subcommand(
      "run", "distributed projection descent from a configuration");
  ConfigBuilder run_flags(run);
  run_flags.str("dynamics", "plant name");
  run_flags.integer("agents", "number of agents");
  run_flags.integer("horizon", "trajectory length T");
  run_flags.num("step", "descent step size");
  run_flags.integer("max_iterations", "iteration cap");
  run_flags.num("tolerance", "stop when |(z,v)| drops below this");
  run_flags.str("certificate", "gain certificate file");
  run_flags.str("bounds", "coupling-bounds file (recorded)");
  run_flags.str("curve", "initial curve file (iterates.csv schema)");
  run_flags.num("start_radius", "default-curve perturbation radius");
  run_flags.integer("seed", "default-curve random seed");
  run_flags.boolean("trace", "log every message into trace.csv");
  run_flags.boolean("record_iterates", "write every iterate");
  run_flags.str("output_dir", "output directory");

  auto* project = app.add_subcommand(
      "project", "one feedback projection of a curve file");
  ConfigBuilder project_flags(project);
  project_flags.str("dynamics", "plant name");
  project_flags.integer("agents", "number of agents");
  project_flags.str("certificate", "gain certificate file");
  project_flags.str("curve", "curve file (iterates.csv schema)");
  project_flags.str("output_dir", "output directory (optional)");

  auto* bench = app.add_subcommand(
      "bench-formation", "full formation experiment: bounds, synthesis, "
                         "stabilization, descent");
  ConfigBuilder bench_flags(bench);
  bench_flags.integer("agents", "agents on the cycle");
  bench_flags.num("sample_time", "sampling time");
  bench_flags.num("input_gain", "input coefficient");
  bench_flags.num("spacing", "preferred neighbor distance");
  bench_flags.num("nu", "performance level");
  bench_flags.boolean("structural", "block-diagonal witnesses");
  bench_flags.integer("sample_count", "bound-estimation rollouts");
  bench_flags.integer("sample_horizon", "bound-estimation rollout length");
  bench_flags.num("sample_radius", "bound-estimation start perturbation");
  bench_flags.num("margin", "interval inflation fraction");
  bench_flags.num("settle_radius", "target-selection start perturbation");
  bench_flags.integer("settle_horizon", "target-selection rollout length");
  bench_flags.num("run_radius", "stabilized-run start perturbation");
  bench_flags.integer("horizon", "trajectory length T");
  bench_flags.num("step", "descent step size");
  bench_flags.integer("max_iterations", "descent iteration cap");
  bench_flags.num("tolerance", "descent stopping tolerance");
  bench_flags.boolean("trace", "log every message into trace.csv");
  bench_flags.integer("seed", "random seed");
  bench_flags.str("output_dir", "output directory");

  auto* verify = app.add_subcommand(
      "verify-certificate", "recheck a certificate file independently");
  ConfigBuilder verify_flags(verify);
  verify_flags.str("certificate", "certificate file to verify");
  verify_flags.num("eig_tol", "LMI eigenvalue tolerance");
  verify_flags.num("sparsity_tol", "masked-entry tolerance");

  bool list_plants = false;
  app.add_flag("--list", list_plants, "list registered plants");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_plants) {
      for (const std::string& name : registered_systems()) {
        std::printf("%s\n", name.c_str());
      }
      return 0;
    }
    if (synth->parsed()) return cmd_synthesize(synth_flags);
    if (run->parsed()) return cmd_run(run_flags);
    if (project->parsed()) return cmd_project(project_flags);
    if (bench->parsed()) return cmd_bench(bench_flags);
    if (verify->parsed()) return cmd_verify(verify_flags);
    std::printf("%s\n", app.help().c_str());
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
