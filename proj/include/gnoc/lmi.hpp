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

#ifndef GNOC_LMI_HPP_
#define GNOC_LMI_HPP_

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gnoc/errors.hpp"
#include "gnoc/polytope.hpp"
#include "gnoc/sdp.hpp"

// Offline gain synthesis.  For every vertex matrix of the polytopic model a
// gain is computed so that each blended closed loop contracts toward the
// reference trajectory, while the gain respects the interconnection
// structure: agent i may only feed back states of its graph neighbors.
//
// The contraction conditions are a family of linear matrix inequalities
// over witnesses (G_p, S_p) and gain parametrizations R_p, with the gain
// recovered as K_p = R_p G_p^{-1}.  Sparsity of K_p is obtained either
// structurally (block-diagonal witnesses, single-block R_p — the fast path
// used for benchmark-scale problems) or by alternating rounds that pin
// (R_p Ghat_p^{-1}) to zero on masked entries and re-anchor Ghat_p at the
// latest witness until the actual gain is sparse.
namespace gnoc {

struct SynthesisOptions {
  double nu = 0.05;            // performance level on the weighted output
  double delta = 1e-6;         // strictness shift, relative to vertex norms
  double sparsity_tol = 1e-6;  // max allowed magnitude on masked gain entries
  double witness_tol = 1e-4;   // Frobenius change in G between rounds
  int max_rounds = 50;         // sparsity refinement cap
  // Restrict witnesses to per-agent diagonal blocks and give R_p support
  // only on allowed blocks.  Sparsity then holds by construction and a
  // single solve suffices; the price is a smaller feasible set.
  bool block_diagonal_witnesses = false;
  // Also allow gain support wherever the constant part of the state matrix
  // is nonzero.  This enlarges the masks but makes the blended gain depend
  // on every agent's scheduling signal, so it is off by default.
  bool base_support_in_masks = false;
  Eigen::MatrixXd perf_state;  // C; empty selects the identity
  Eigen::MatrixXd perf_input;  // D; empty selects 1e-5 on the main diagonal
  sdp::Options sdp;
};

// One varying scalar of the state matrix: block (agent_row, agent_col),
// position within the block, and its interval.
struct CertificateEntry {
  int agent_row = 0;
  int agent_col = 0;
  int row = 0;
  int col = 0;
  double lo = 0.0;
  double hi = 0.0;
};

// Self-contained result of a synthesis run: everything needed to evaluate
// gains online, re-verify the inequalities offline, and serialize.
struct SynthesisCertificate {
  bool success = false;
  std::string failure_reason;
  int rounds = 0;
  int sdp_iterations = 0;
  double nu = 0.0;
  double delta_abs = 0.0;
  double sparsity_tol = 0.0;

  std::vector<int> state_dims;   // per agent
  std::vector<int> input_dims;   // per agent
  Eigen::MatrixXd base;          // constant part of the state matrix
  std::vector<CertificateEntry> entries;  // varying scalars, catalogue order
  Eigen::MatrixXd input_matrix;  // stacked input map (constant in time)
  Eigen::MatrixXd perf_state;    // C
  Eigen::MatrixXd perf_input;    // D
  // Allowed gain blocks per vertex, sorted (agent_row, agent_col) pairs.
  std::vector<std::vector<std::pair<int, int>>> masks;

  std::vector<Eigen::MatrixXd> witness_g;   // G_p
  std::vector<Eigen::MatrixXd> witness_s;   // S_p
  std::vector<Eigen::MatrixXd> raw_gains;   // R_p G_p^{-1} as solved
  std::vector<Eigen::MatrixXd> gains;       // masked entries zeroed exactly

  std::vector<double> residual_history;  // max masked magnitude per round
  double max_sparsity_violation = 0.0;
  double witness_delta = 0.0;
  int lmi_blocks = 0;
  int equality_rows = 0;

  int num_varying() const { return static_cast<int>(entries.size()); }
  int num_vertices() const { return 2 * num_varying(); }
  int state_size() const {
    int n = 0;
    for (int d : state_dims) n += d;
    return n;
  }
  int input_size() const {
    int n = 0;
    for (int d : input_dims) n += d;
    return n;
  }
  int state_offset(int agent) const {
    int n = 0;
    for (int i = 0; i < agent; ++i) n += state_dims.at(i);
    return n;
  }
  int input_offset(int agent) const {
    int n = 0;
    for (int i = 0; i < agent; ++i) n += input_dims.at(i);
    return n;
  }
  int vertex_scalar(int p) const { return p % num_varying(); }
  bool vertex_is_upper(int p) const { return p >= num_varying(); }

  // Vertex matrix: the varying scalar it owns sits at S times its extreme
  // value, every other varying position is zero, constants stay.
  Eigen::MatrixXd vertex_matrix(int p) const {
    if (p < 0 || p >= num_vertices()) {
      throw ShapeError("certificate: vertex index out of range");
    }
    const int s = vertex_scalar(p);
    const CertificateEntry& e = entries.at(s);
    Eigen::MatrixXd V = base;
    const double extreme = vertex_is_upper(p) ? e.hi : e.lo;
    V(state_offset(e.agent_row) + e.row, state_offset(e.agent_col) + e.col) +=
        num_varying() * extreme;
    return V;
  }

  bool mask_allows(int p, int agent_row, int agent_col) const {
    const auto& m = masks.at(p);
    return std::binary_search(m.begin(), m.end(),
                              std::make_pair(agent_row, agent_col));
  }
};

namespace detail_lmi {

// Variable bookkeeping for one synthesis problem.  Indices are -1 where the
// chosen structure pins the entry to zero.
class WitnessLayout {
 public:
  WitnessLayout(int num_vertices, int nx, int nu,
                const std::vector<int>& state_agent,
                const std::vector<int>& input_agent,
                const std::vector<std::vector<std::pair<int, int>>>& masks,
                bool block_diagonal)
      : nx_(nx), nu_(nu) {
    g_.assign(num_vertices, std::vector<int>(nx * nx, -1));
    s_.assign(num_vertices, std::vector<int>(nx * nx, -1));
    r_.assign(num_vertices, std::vector<int>(nu * nx, -1));
    int next = 0;
    for (int p = 0; p < num_vertices; ++p) {
      for (int row = 0; row < nx; ++row) {
        for (int col = 0; col < nx; ++col) {
          if (!block_diagonal || state_agent[row] == state_agent[col]) {
            g_[p][row * nx + col] = next++;
          }
        }
      }
      for (int row = 0; row < nx; ++row) {
        for (int col = row; col < nx; ++col) {
          if (!block_diagonal || state_agent[row] == state_agent[col]) {
            s_[p][row * nx + col] = next++;
          }
        }
      }
      for (int m = 0; m < nu; ++m) {
        for (int b = 0; b < nx; ++b) {
          bool keep = true;
          if (block_diagonal) {
            keep = std::binary_search(
                masks[p].begin(), masks[p].end(),
                std::make_pair(input_agent[m], state_agent[b]));
          }
          if (keep) r_[p][m * nx + b] = next++;
        }
      }
    }
    total_ = next;
  }

  int g(int p, int row, int col) const { return g_[p][row * nx_ + col]; }
  int s(int p, int row, int col) const {
    if (row > col) std::swap(row, col);
    return s_[p][row * nx_ + col];
  }
  int r(int p, int m, int b) const { return r_[p][m * nx_ + b]; }
  int total() const { return total_; }

 private:
  int nx_, nu_;
  int total_ = 0;
  std::vector<std::vector<int>> g_, s_, r_;
};

}  // namespace detail_lmi

// Synthesizes one gain per polytope vertex.  `input_matrix` is the stacked
// (constant-in-time) input map and `input_dims` its per-agent column split.
// Infeasibility and non-convergence come back as a failed certificate with
// a reason and the residual history — not as an exception.
inline SynthesisCertificate synthesize_gains(
    const PolytopeModel& model, const Eigen::MatrixXd& input_matrix,
    const std::vector<int>& input_dims, const SynthesisOptions& opt = {}) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;

  const int nx = model.state_size();
  const int nu = static_cast<int>(input_matrix.cols());
  const int num_agents = model.graph().num_agents();
  const int P = model.num_vertices();
  const int S = model.num_varying();

  if (input_matrix.rows() != nx) {
    throw ShapeError("synthesis: input map must have one row per state");
  }
  if (static_cast<int>(input_dims.size()) != num_agents) {
    throw ShapeError("synthesis: need one input dimension per agent");
  }
  int usum = 0;
  for (int d : input_dims) {
    if (d < 0) throw ShapeError("synthesis: negative input dimension");
    usum += d;
  }
  if (usum != nu) {
    throw ShapeError("synthesis: input dimensions do not sum to input count");
  }

  MatrixXd C = opt.perf_state;
  MatrixXd D = opt.perf_input;
  if (C.size() == 0 && D.size() == 0) {
    C = MatrixXd::Identity(nx, nx);
    D = MatrixXd::Zero(nx, nu);
    for (int i = 0; i < std::min(nx, nu); ++i) D(i, i) = 1e-5;
  } else if (C.size() == 0 || D.size() == 0) {
    throw ConfigError("synthesis: provide both performance weights or neither");
  }
  if (C.cols() != nx || D.cols() != nu || C.rows() != D.rows()) {
    throw ShapeError("synthesis: performance weight dimensions are invalid");
  }
  const int nz = static_cast<int>(C.rows());

  if (opt.nu <= 0.0 || opt.delta <= 0.0) {
    throw ConfigError("synthesis: nu and delta must be positive");
  }

  // Agent lookup tables.
  std::vector<int> state_agent(nx), input_agent(std::max(nu, 1));
  for (int i = 0, k = 0; i < num_agents; ++i) {
    for (int d = 0; d < model.state_dims()[i]; ++d) state_agent[k++] = i;
  }
  for (int i = 0, k = 0; i < num_agents; ++i) {
    for (int d = 0; d < input_dims[i]; ++d) input_agent[k++] = i;
  }

  // Vertex matrices and the strictness shift.
  std::vector<MatrixXd> vertices(P);
  double max_norm = 1.0;
  for (int p = 0; p < P; ++p) {
    vertices[p] = model.vertex(p);
    max_norm = std::max(max_norm, vertices[p].norm());
  }
  const double delta_abs = opt.delta * max_norm;
  if (opt.nu <= delta_abs) {
    throw ConfigError(
        "synthesis: performance level nu must exceed the strictness shift");
  }

  // Allowed gain blocks per vertex.
  std::vector<std::vector<std::pair<int, int>>> masks(P);
  for (int p = 0; p < P; ++p) {
    masks[p].push_back(model.vertex_block(p));
    if (opt.base_support_in_masks) {
      const MatrixXd& base = model.base_matrix();
      for (int i = 0; i < num_agents; ++i) {
        for (int j = 0; j < num_agents; ++j) {
          bool nonzero = false;
          for (int r = 0; r < model.state_dims()[i] && !nonzero; ++r) {
            for (int c = 0; c < model.state_dims()[j] && !nonzero; ++c) {
              if (base(model.state_offset(i) + r, model.state_offset(j) + c) !=
                  0.0) {
                nonzero = true;
              }
            }
          }
          if (nonzero) masks[p].emplace_back(i, j);
        }
      }
    }
    std::sort(masks[p].begin(), masks[p].end());
    masks[p].erase(std::unique(masks[p].begin(), masks[p].end()),
                   masks[p].end());
  }

  detail_lmi::WitnessLayout layout(P, nx, nu, state_agent, input_agent, masks,
                                   opt.block_diagonal_witnesses);

  // --- Base problem: blocks and objective are round-independent. ----------
  sdp::Problem problem;
  problem.num_vars = layout.total();
  problem.objective = VectorXd::Zero(layout.total());
  for (int p = 0; p < P; ++p) {
    for (int r = 0; r < nx; ++r) problem.objective(layout.s(p, r, r)) = 1.0;
  }

  const int dim = 2 * nx + nx + nz;  // witness, slack row, coupling, output
  const int o_slack = nx;            // decoupled nu block
  const int o_couple = 2 * nx;       // rows carrying S_q
  const int o_out = 3 * nx;          // weighted-output rows

  for (int p = 0; p < P; ++p) {
    for (int q = 0; q < P; ++q) {
      sdp::ConstraintBlock blk;
      blk.dim = dim;
      blk.constant = MatrixXd::Zero(dim, dim);
      for (int r = 0; r < nx; ++r) {
        blk.constant(r, r) = -delta_abs;
        blk.constant(o_slack + r, o_slack + r) = opt.nu - delta_abs;
        blk.constant(o_couple + r, o_couple + r) = -delta_abs;
      }
      for (int r = 0; r < nz; ++r) {
        blk.constant(o_out + r, o_out + r) = opt.nu - delta_abs;
      }

      // (1,1): G_p + G_p' - S_p.
      for (int r = 0; r < nx; ++r) {
        for (int c = 0; c < nx; ++c) {
          const int gv = layout.g(p, r, c);
          if (gv < 0) continue;
          if (r == c) {
            blk.terms.push_back({gv, r, r, 2.0});
          } else if (r < c) {
            blk.terms.push_back({gv, r, c, 1.0});
            const int gv2 = layout.g(p, c, r);
            if (gv2 >= 0) blk.terms.push_back({gv2, r, c, 1.0});
          }
        }
      }
      for (int r = 0; r < nx; ++r) {
        for (int c = r; c < nx; ++c) {
          const int sv = layout.s(p, r, c);
          if (sv >= 0) blk.terms.push_back({sv, r, c, -1.0});
        }
      }
      // (3,1): A_p G_p - B R_p, mirrored into (1,3) by the term convention.
      for (int k = 0; k < nx; ++k) {
        for (int b = 0; b < nx; ++b) {
          const int gv = layout.g(p, k, b);
          if (gv < 0) continue;
          for (int a = 0; a < nx; ++a) {
            const double coeff = vertices[p](a, k);
            if (coeff != 0.0) {
              blk.terms.push_back({gv, o_couple + a, b, coeff});
            }
          }
        }
      }
      for (int m = 0; m < nu; ++m) {
        for (int b = 0; b < nx; ++b) {
          const int rv = layout.r(p, m, b);
          if (rv < 0) continue;
          for (int a = 0; a < nx; ++a) {
            const double coeff = input_matrix(a, m);
            if (coeff != 0.0) {
              blk.terms.push_back({rv, o_couple + a, b, -coeff});
            }
          }
        }
      }
      // (3,3): S_q.
      for (int r = 0; r < nx; ++r) {
        for (int c = r; c < nx; ++c) {
          const int sv = layout.s(q, r, c);
          if (sv >= 0) {
            blk.terms.push_back({sv, o_couple + r, o_couple + c, 1.0});
          }
        }
      }
      // (4,1): C G_p - D R_p.
      for (int k = 0; k < nx; ++k) {
        for (int b = 0; b < nx; ++b) {
          const int gv = layout.g(p, k, b);
          if (gv < 0) continue;
          for (int a = 0; a < nz; ++a) {
            const double coeff = C(a, k);
            if (coeff != 0.0) {
              blk.terms.push_back({gv, o_out + a, b, coeff});
            }
          }
        }
      }
      for (int m = 0; m < nu; ++m) {
        for (int b = 0; b < nx; ++b) {
          const int rv = layout.r(p, m, b);
          if (rv < 0) continue;
          for (int a = 0; a < nz; ++a) {
            const double coeff = D(a, m);
            if (coeff != 0.0) {
              blk.terms.push_back({rv, o_out + a, b, -coeff});
            }
          }
        }
      }
      problem.blocks.push_back(std::move(blk));
    }
  }
  // S_p alone must clear the shift as well.
  for (int p = 0; p < P; ++p) {
    sdp::ConstraintBlock blk;
    blk.dim = nx;
    blk.constant = -delta_abs * MatrixXd::Identity(nx, nx);
    for (int r = 0; r < nx; ++r) {
      for (int c = r; c < nx; ++c) {
        const int sv = layout.s(p, r, c);
        if (sv >= 0) blk.terms.push_back({sv, r, c, 1.0});
      }
    }
    problem.blocks.push_back(std::move(blk));
  }

  // --- Certificate skeleton. -----------------------------------------------
  SynthesisCertificate cert;
  cert.nu = opt.nu;
  cert.delta_abs = delta_abs;
  cert.sparsity_tol = opt.sparsity_tol;
  cert.state_dims = model.state_dims();
  cert.input_dims = input_dims;
  cert.base = model.base_matrix();
  for (int s = 0; s < S; ++s) {
    const auto& e = model.bounds().varying[s];
    cert.entries.push_back({e.pos.i, e.pos.j, e.pos.row, e.pos.col, e.lo, e.hi});
  }
  cert.input_matrix = input_matrix;
  cert.perf_state = C;
  cert.perf_input = D;
  cert.masks = masks;
  cert.lmi_blocks = static_cast<int>(problem.blocks.size());

  // --- Sparsity refinement rounds. -----------------------------------------
  std::vector<MatrixXd> ghat(P, MatrixXd::Identity(nx, nx));
  for (int round = 1; round <= opt.max_rounds; ++round) {
    cert.rounds = round;

    problem.equalities.clear();
    if (!opt.block_diagonal_witnesses) {
      for (int p = 0; p < P; ++p) {
        const MatrixXd ginv = ghat[p].inverse();
        for (int m = 0; m < nu; ++m) {
          for (int b = 0; b < nx; ++b) {
            if (cert.mask_allows(p, input_agent[m], state_agent[b])) continue;
            sdp::EqualityRow row;
            for (int k = 0; k < nx; ++k) {
              const int rv = layout.r(p, m, k);
              if (rv >= 0 && ginv(k, b) != 0.0) {
                row.coeffs.emplace_back(rv, ginv(k, b));
              }
            }
            if (!row.coeffs.empty()) problem.equalities.push_back(std::move(row));
          }
        }
      }
    }
    cert.equality_rows = static_cast<int>(problem.equalities.size());

    sdp::Solution sol = sdp::solve(problem, opt.sdp);
    cert.sdp_iterations += sol.iterations;
    if (sol.status != sdp::SolveStatus::Optimal) {
      cert.success = false;
      cert.failure_reason =
          (sol.status == sdp::SolveStatus::Infeasible
               ? "vertex inequalities are infeasible"
               : "semidefinite solve did not converge") +
          std::string(sol.message.empty() ? "" : ": " + sol.message);
      return cert;
    }

    // Extract witnesses and gains.
    cert.witness_g.assign(P, MatrixXd::Zero(nx, nx));
    cert.witness_s.assign(P, MatrixXd::Zero(nx, nx));
    cert.raw_gains.assign(P, MatrixXd::Zero(nu, nx));
    cert.gains.assign(P, MatrixXd::Zero(nu, nx));
    double violation = 0.0;
    double gdelta = 0.0;
    for (int p = 0; p < P; ++p) {
      MatrixXd G = MatrixXd::Zero(nx, nx);
      MatrixXd Sw = MatrixXd::Zero(nx, nx);
      MatrixXd R = MatrixXd::Zero(nu, nx);
      for (int r = 0; r < nx; ++r) {
        for (int c = 0; c < nx; ++c) {
          const int gv = layout.g(p, r, c);
          if (gv >= 0) G(r, c) = sol.x(gv);
          const int sv = layout.s(p, r, c);
          if (sv >= 0) {
            Sw(r, c) = sol.x(sv);
            Sw(c, r) = sol.x(sv);
          }
        }
      }
      for (int m = 0; m < nu; ++m) {
        for (int b = 0; b < nx; ++b) {
          const int rv = layout.r(p, m, b);
          if (rv >= 0) R(m, b) = sol.x(rv);
        }
      }
      // K_p = R_p G_p^{-1}, via G' X = R'.
      MatrixXd K =
          G.transpose().partialPivLu().solve(R.transpose()).transpose();
      cert.witness_g[p] = G;
      cert.witness_s[p] = Sw;
      cert.raw_gains[p] = K;
      MatrixXd cleaned = K;
      for (int m = 0; m < nu; ++m) {
        for (int b = 0; b < nx; ++b) {
          if (!cert.mask_allows(p, input_agent[m], state_agent[b])) {
            violation = std::max(violation, std::abs(K(m, b)));
            cleaned(m, b) = 0.0;
          }
        }
      }
      cert.gains[p] = cleaned;
      gdelta = std::max(gdelta, (ghat[p] - G).norm());
    }
    cert.max_sparsity_violation = violation;
    cert.witness_delta = gdelta;
    cert.residual_history.push_back(violation);

    const bool sparse_enough = violation < opt.sparsity_tol;
    if (cert.equality_rows == 0) {
      // No dependence on the anchor: the answer cannot change across rounds.
      cert.success = sparse_enough;
      if (!sparse_enough) {
        cert.failure_reason =
            "structural restriction left masked gain entries at " +
            std::to_string(violation);
      }
      return cert;
    }
    if (sparse_enough && gdelta < opt.witness_tol) {
      cert.success = true;
      return cert;
    }
    for (int p = 0; p < P; ++p) ghat[p] = cert.witness_g[p];
  }

  cert.success = false;
  cert.failure_reason = "sparsity refinement did not settle within " +
                        std::to_string(opt.max_rounds) + " rounds";
  return cert;
}

// Convenience overload building the polytope from bounds directly.
inline SynthesisCertificate synthesize_gains(
    const EntryBounds& bounds, const CoupledSystem& sys,
    const Eigen::MatrixXd& input_matrix, const SynthesisOptions& opt = {}) {
  PolytopeModel model = build_polytope(bounds, sys);
  std::vector<int> input_dims(sys.num_agents());
  for (int i = 0; i < sys.num_agents(); ++i) input_dims[i] = sys.input_dim(i);
  return synthesize_gains(model, input_matrix, input_dims, opt);
}

// Independent re-verification of a certificate using nothing but dense
// eigenvalue computations: the shifted inequalities at the stored
// witnesses, the masked-entry magnitudes, and the per-vertex closed-loop
// spectral radius with the cleaned gains.
struct CertificateCheck {
  double min_eigenvalue = 0.0;
  double max_sparsity_violation = 0.0;
  double max_spectral_radius = 0.0;
  bool passed(double eig_tol = -1e-8, double sparsity_tol = 1e-6) const {
    return min_eigenvalue >= eig_tol &&
           max_sparsity_violation < sparsity_tol && max_spectral_radius < 1.0;
  }
};

inline CertificateCheck recheck_certificate(const SynthesisCertificate& cert) {
  using Eigen::MatrixXd;

  CertificateCheck out;
  out.min_eigenvalue = std::numeric_limits<double>::infinity();

  const int nx = cert.state_size();
  const int nu = cert.input_size();
  const int P = cert.num_vertices();
  const int nz = static_cast<int>(cert.perf_state.rows());
  const MatrixXd& B = cert.input_matrix;

  std::vector<int> state_agent(nx), input_agent(std::max(nu, 1));
  for (size_t i = 0, k = 0; i < cert.state_dims.size(); ++i) {
    for (int d = 0; d < cert.state_dims[i]; ++d)
      state_agent[k++] = static_cast<int>(i);
  }
  for (size_t i = 0, k = 0; i < cert.input_dims.size(); ++i) {
    for (int d = 0; d < cert.input_dims[i]; ++d)
      input_agent[k++] = static_cast<int>(i);
  }

  std::vector<MatrixXd> vertices(P);
  for (int p = 0; p < P; ++p) vertices[p] = cert.vertex_matrix(p);

  // The decoupled slack row is diagonal (nu - delta) I; fold it in once.
  out.min_eigenvalue = cert.nu - cert.delta_abs;

  const int dim = 2 * nx + nz;
  for (int p = 0; p < P; ++p) {
    const MatrixXd& G = cert.witness_g[p];
    const MatrixXd R = cert.raw_gains[p] * G;  // undo K = R G^{-1}
    const MatrixXd M1 = vertices[p] * G - B * R;
    const MatrixXd M2 = cert.perf_state * G - cert.perf_input * R;
    for (int q = 0; q < P; ++q) {
      MatrixXd M = MatrixXd::Zero(dim, dim);
      M.block(0, 0, nx, nx) = G + G.transpose() - cert.witness_s[p] -
                              cert.delta_abs * MatrixXd::Identity(nx, nx);
      M.block(nx, nx, nx, nx) = cert.witness_s[q] -
                                cert.delta_abs * MatrixXd::Identity(nx, nx);
      M.block(2 * nx, 2 * nx, nz, nz) =
          (cert.nu - cert.delta_abs) * MatrixXd::Identity(nz, nz);
      M.block(nx, 0, nx, nx) = M1;
      M.block(0, nx, nx, nx) = M1.transpose();
      M.block(2 * nx, 0, nz, nx) = M2;
      M.block(0, 2 * nx, nx, nz) = M2.transpose();
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
      out.min_eigenvalue =
          std::min(out.min_eigenvalue, es.eigenvalues().minCoeff());
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(
        cert.witness_s[p] - cert.delta_abs * MatrixXd::Identity(nx, nx),
        Eigen::EigenvaluesOnly);
    out.min_eigenvalue =
        std::min(out.min_eigenvalue, es.eigenvalues().minCoeff());

    for (int m = 0; m < nu; ++m) {
      for (int b = 0; b < nx; ++b) {
        if (!cert.mask_allows(p, input_agent[m], state_agent[b])) {
          out.max_sparsity_violation = std::max(
              out.max_sparsity_violation, std::abs(cert.raw_gains[p](m, b)));
        }
      }
    }
    Eigen::EigenSolver<MatrixXd> cl(vertices[p] - B * cert.gains[p]);
    out.max_spectral_radius = std::max(
        out.max_spectral_radius, cl.eigenvalues().cwiseAbs().maxCoeff());
  }
  return out;
}

}  // namespace gnoc

#endif  // GNOC_LMI_HPP_
