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

#ifndef GNOC_SDP_HPP_
#define GNOC_SDP_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gnoc/errors.hpp"

// Semidefinite feasibility/optimization in linear-matrix-inequality form:
//
//   minimize    c' x
//   subject to  F_j(x) = F_{j,0} + sum_i x_i F_{j,i}  >= 0   (each block j)
//               (linear equality rows on x)
//
// solved by a primal-dual interior-point method with Mehrotra
// predictor-corrector steps.  Equalities are eliminated through a nullspace
// parametrization; blocks are split into independent components and constant
// components are verified and dropped before the iteration starts.  When the
// direct solve cannot settle the instance, an auxiliary margin problem
// (min t with F_j(x) + t I >= 0, t >= -1) certifies infeasibility or
// produces a strictly feasible warm start.
namespace gnoc::sdp {

// One coefficient of a constraint block: variable `var` adds `coeff` at
// (row, col) — and symmetrically at (col, row) when off-diagonal.  Each
// unordered position pair must be specified at most once per variable.
struct Term {
  int var;
  int row;
  int col;
  double coeff;
};

struct ConstraintBlock {
  int dim = 0;
  Eigen::MatrixXd constant;  // symmetric dim x dim
  std::vector<Term> terms;
};

struct EqualityRow {
  std::vector<std::pair<int, double>> coeffs;  // (variable, coefficient)
  double rhs = 0.0;
};

struct Problem {
  int num_vars = 0;
  Eigen::VectorXd objective;  // empty means pure feasibility
  std::vector<ConstraintBlock> blocks;
  std::vector<EqualityRow> equalities;
};

enum class SolveStatus { Optimal, Infeasible, MaxIterations, NumericalTrouble };

struct Options {
  int max_iterations = 100;
  double feasibility_tol = 1e-11;  // relative matrix-inequality residual
  double dual_tol = 1e-7;
  double gap_tol = 1e-7;
  bool verbose = false;
};

struct Solution {
  SolveStatus status = SolveStatus::NumericalTrouble;
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  std::string message;
};

// F_j(x) assembled from the original (unreduced) problem data.
inline Eigen::MatrixXd evaluate_block(const Problem& p, int j,
                                      const Eigen::VectorXd& x) {
  const ConstraintBlock& b = p.blocks.at(j);
  Eigen::MatrixXd F = 0.5 * (b.constant + b.constant.transpose());
  for (const Term& t : b.terms) {
    F(t.row, t.col) += t.coeff * x(t.var);
    if (t.row != t.col) F(t.col, t.row) += t.coeff * x(t.var);
  }
  return F;
}

namespace detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// A constraint block after reduction: variables renumbered to the active
// set, terms grouped by variable.
struct CBlock {
  int dim = 0;
  MatrixXd constant;
  std::vector<int> vars;                 // active-variable ids, sorted
  std::vector<std::vector<Term>> terms;  // terms[a] belongs to vars[a]; var
                                         // field inside is unused
};

inline MatrixXd cblock_eval(const CBlock& b, const VectorXd& y) {
  MatrixXd F = b.constant;
  for (size_t a = 0; a < b.vars.size(); ++a) {
    const double v = y(b.vars[a]);
    for (const Term& t : b.terms[a]) {
      F(t.row, t.col) += t.coeff * v;
      if (t.row != t.col) F(t.col, t.row) += t.coeff * v;
    }
  }
  return F;
}

// trace(F_a * M) for the sparse variable matrix F_a against a dense M.
inline double sparse_trace(const std::vector<Term>& terms, const MatrixXd& M) {
  double s = 0.0;
  for (const Term& t : terms) {
    s += t.coeff * M(t.col, t.row);
    if (t.row != t.col) s += t.coeff * M(t.row, t.col);
  }
  return s;
}

// Z^-1 F_a X for sparse F_a: every term contributes a rank-one (or two)
// update built from a column of Z^-1 and a row of X.
inline void sparse_sandwich(const std::vector<Term>& terms, const MatrixXd& Zinv,
                            const MatrixXd& X, MatrixXd& out) {
  out.setZero();
  for (const Term& t : terms) {
    out.noalias() += t.coeff * Zinv.col(t.row) * X.row(t.col);
    if (t.row != t.col)
      out.noalias() += t.coeff * Zinv.col(t.col) * X.row(t.row);
  }
}

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

struct Compiled {
  std::vector<CBlock> blocks;
  std::vector<int> active_vars;  // reduced-var id per active id
  int num_active = 0;
  bool proven_infeasible = false;
  std::string note;
  double const_scale = 1.0;  // max |constant entry| over all blocks
};

// Splits blocks into connected components, validates and drops constant
// components, and renumbers the variables that actually appear.
inline Compiled compile(const std::vector<CBlock>& raw, int num_reduced,
                        const VectorXd& c) {
  Compiled out;
  std::vector<char> used(num_reduced, 0);
  std::vector<CBlock> split;

  for (const CBlock& b : raw) {
    DisjointSet dsu(b.dim);
    for (int r = 0; r < b.dim; ++r) {
      for (int col = r + 1; col < b.dim; ++col) {
        if (b.constant(r, col) != 0.0) dsu.unite(r, col);
      }
    }
    for (const auto& tl : b.terms) {
      for (const Term& t : tl) {
        if (t.row != t.col && t.coeff != 0.0) dsu.unite(t.row, t.col);
      }
    }
    // Group rows by component root, keeping row order stable.
    std::vector<std::vector<int>> groups;
    std::vector<int> root_of(b.dim), slot(b.dim, -1);
    for (int r = 0; r < b.dim; ++r) root_of[r] = dsu.find(r);
    std::vector<int> group_of_root(b.dim, -1);
    for (int r = 0; r < b.dim; ++r) {
      int root = root_of[r];
      if (group_of_root[root] < 0) {
        group_of_root[root] = static_cast<int>(groups.size());
        groups.emplace_back();
      }
      slot[r] = static_cast<int>(groups[group_of_root[root]].size());
      groups[group_of_root[root]].push_back(r);
    }

    for (const auto& rows : groups) {
      CBlock part;
      part.dim = static_cast<int>(rows.size());
      part.constant.resize(part.dim, part.dim);
      for (int r = 0; r < part.dim; ++r)
        for (int col = 0; col < part.dim; ++col)
          part.constant(r, col) = b.constant(rows[r], rows[col]);

      for (size_t a = 0; a < b.vars.size(); ++a) {
        std::vector<Term> local;
        for (const Term& t : b.terms[a]) {
          if (t.coeff == 0.0) continue;
          if (group_of_root[root_of[t.row]] !=
              group_of_root[root_of[rows[0]]]) {
            continue;
          }
          local.push_back({b.vars[a], slot[t.row], slot[t.col], t.coeff});
        }
        if (!local.empty()) {
          part.vars.push_back(b.vars[a]);
          part.terms.push_back(std::move(local));
        }
      }

      if (part.vars.empty()) {
        // Constant component: must already be positive semidefinite.
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(part.constant);
        double scale = std::max(1.0, part.constant.cwiseAbs().maxCoeff());
        if (es.eigenvalues().minCoeff() < -1e-9 * scale) {
          out.proven_infeasible = true;
          out.note = "a constant diagonal component is negative";
          return out;
        }
        continue;  // satisfied for every x — drop
      }
      for (int v : part.vars) used[v] = 1;
      split.push_back(std::move(part));
    }
  }

  std::vector<int> remap(num_reduced, -1);
  for (int v = 0; v < num_reduced; ++v) {
    if (used[v]) {
      remap[v] = out.num_active;
      out.active_vars.push_back(v);
      ++out.num_active;
    } else if (v < c.size() && c(v) != 0.0) {
      // An unconstrained variable with a cost coefficient: objective is
      // unbounded below in exact arithmetic.  Surface it as a note; the
      // variable is pinned at zero.
      out.note = "unconstrained variable with nonzero cost pinned at zero";
    }
  }
  for (CBlock& b : split) {
    for (int& v : b.vars) v = remap[v];
    out.const_scale =
        std::max(out.const_scale, b.constant.cwiseAbs().maxCoeff());
  }
  out.blocks = std::move(split);
  return out;
}

// Largest step alpha so that M + alpha*dM stays positive semidefinite,
// given the Cholesky factor of M.
inline double step_to_boundary(const Eigen::LLT<MatrixXd>& llt,
                               const MatrixXd& dM) {
  MatrixXd W = llt.matrixL().solve(dM);
  W = llt.matrixL().solve(W.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (W + W.transpose()),
                                             Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  if (lmin >= -1e-14) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

struct IpmResult {
  SolveStatus status = SolveStatus::NumericalTrouble;
  VectorXd y;
  int iterations = 0;
  double rp = 0.0, rd = 0.0, gap = 0.0;
  std::string message;
};

// Core predictor-corrector iteration over compiled blocks.  If `watch_var`
// is set, the solve ends early (as Optimal) once the iterate is feasible to
// tolerance and y(watch_var) dropped below `watch_below` — used by the
// margin problem, where any sufficiently negative margin settles the
// question.
inline IpmResult run_ipm(const std::vector<CBlock>& blocks, int num_y,
                         const VectorXd& c, const Options& opt,
                         const VectorXd* y_start = nullptr, int watch_var = -1,
                         double watch_below = 0.0) {
  IpmResult res;
  const int J = static_cast<int>(blocks.size());
  if (num_y == 0 || J == 0) {
    res.status = SolveStatus::Optimal;
    res.y = VectorXd::Zero(num_y);
    return res;
  }

  double const_scale = 1.0;
  int total_dim = 0;
  for (const CBlock& b : blocks) {
    const_scale = std::max(const_scale, b.constant.cwiseAbs().maxCoeff());
    total_dim += b.dim;
  }
  const double c_scale = 1.0 + (c.size() ? c.cwiseAbs().maxCoeff() : 0.0);

  VectorXd y = y_start ? *y_start : VectorXd::Zero(num_y);
  std::vector<MatrixXd> Z(J), X(J), Zinv(J), F(J), P(J);
  std::vector<Eigen::LLT<MatrixXd>> Zllt(J);

  for (int j = 0; j < J; ++j) {
    F[j] = cblock_eval(blocks[j], y);
    bool interior = false;
    if (y_start) {
      Eigen::LLT<MatrixXd> test(F[j] - 1e-12 * const_scale *
                                           MatrixXd::Identity(blocks[j].dim,
                                                              blocks[j].dim));
      interior = test.info() == Eigen::Success;
    }
    if (interior) {
      Z[j] = F[j];
    } else {
      double zeta = std::max(10.0, 2.0 * F[j].cwiseAbs().maxCoeff());
      Z[j] = zeta * MatrixXd::Identity(blocks[j].dim, blocks[j].dim);
    }
    double eta = std::max(1.0, Z[j].norm() / blocks[j].dim);
    X[j] = eta * MatrixXd::Identity(blocks[j].dim, blocks[j].dim);
  }

  VectorXd best_y = y;
  double best_merit = std::numeric_limits<double>::infinity();
  std::vector<double> rp_history;
  int tiny_steps = 0;

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    for (int j = 0; j < J; ++j) {
      F[j] = cblock_eval(blocks[j], y);
      P[j] = F[j] - Z[j];
    }
    VectorXd d = c;
    for (int j = 0; j < J; ++j) {
      for (size_t a = 0; a < blocks[j].vars.size(); ++a) {
        d(blocks[j].vars[a]) -= sparse_trace(blocks[j].terms[a], X[j]);
      }
    }
    double xz = 0.0;
    for (int j = 0; j < J; ++j) xz += X[j].cwiseProduct(Z[j]).sum();
    const double mu = xz / total_dim;

    double rp = 0.0;
    for (int j = 0; j < J; ++j)
      rp = std::max(rp, P[j].cwiseAbs().maxCoeff());
    rp /= (1.0 + const_scale);
    const double rd = d.cwiseAbs().maxCoeff() / c_scale;
    const double obj = c.size() ? c.dot(y) : 0.0;
    const double gap = std::abs(xz) / (1.0 + std::abs(obj));

    res.iterations = iter;
    res.rp = rp;
    res.rd = rd;
    res.gap = gap;

    if (opt.verbose) {
      std::cerr << "ipm iter " << iter << ": rp=" << rp << " rd=" << rd
                << " gap=" << gap << " mu=" << mu << " obj=" << obj << "\n";
    }

    double merit = std::max({rp * 1e3, rd, gap});
    if (merit < best_merit) {
      best_merit = merit;
      best_y = y;
    }
    rp_history.push_back(rp);

    if (rp <= opt.feasibility_tol && rd <= opt.dual_tol && gap <= opt.gap_tol) {
      res.status = SolveStatus::Optimal;
      res.y = y;
      return res;
    }
    if (watch_var >= 0 && rp <= opt.feasibility_tol &&
        y(watch_var) < watch_below) {
      res.status = SolveStatus::Optimal;
      res.y = y;
      res.message = "early exit: watched variable cleared its threshold";
      return res;
    }
    // Stalled primal residual on a cold start usually means infeasibility;
    // hand the question to the margin problem instead of burning iterations.
    size_t h = rp_history.size();
    if (h > 25 && rp > 1e3 * opt.feasibility_tol &&
        rp_history[h - 11] < 2.0 * rp) {
      res.status = SolveStatus::MaxIterations;
      res.y = best_y;
      res.message = "primal residual stalled";
      return res;
    }

    bool factor_ok = true;
    for (int j = 0; j < J; ++j) {
      Z[j] = 0.5 * (Z[j] + Z[j].transpose()).eval();
      Zllt[j].compute(Z[j]);
      if (Zllt[j].info() != Eigen::Success) {
        Z[j] += 1e-12 * std::max(1.0, Z[j].cwiseAbs().maxCoeff()) *
                MatrixXd::Identity(blocks[j].dim, blocks[j].dim);
        Zllt[j].compute(Z[j]);
        if (Zllt[j].info() != Eigen::Success) {
          factor_ok = false;
          break;
        }
      }
      Zinv[j] = Zllt[j].solve(MatrixXd::Identity(blocks[j].dim, blocks[j].dim));
    }
    if (!factor_ok) {
      res.status = SolveStatus::NumericalTrouble;
      res.y = best_y;
      res.message = "slack block lost positive definiteness";
      return res;
    }

    // Schur complement H_ab = sum_j tr(F_a Z^-1 F_b X).
    MatrixXd H = MatrixXd::Zero(num_y, num_y);
    std::vector<MatrixXd> W;
    for (int j = 0; j < J; ++j) {
      const auto& vb = blocks[j].vars;
      W.assign(vb.size(), MatrixXd(blocks[j].dim, blocks[j].dim));
      for (size_t a = 0; a < vb.size(); ++a) {
        sparse_sandwich(blocks[j].terms[a], Zinv[j], X[j], W[a]);
      }
      for (size_t a = 0; a < vb.size(); ++a) {
        for (size_t b = 0; b <= a; ++b) {
          double v = sparse_trace(blocks[j].terms[b], W[a]);
          H(vb[a], vb[b]) += v;
          if (vb[a] != vb[b]) H(vb[b], vb[a]) += v;
        }
      }
    }

    Eigen::LLT<MatrixXd> Hllt(H);
    Eigen::LDLT<MatrixXd> Hldlt;
    const bool use_ldlt = Hllt.info() != Eigen::Success;
    if (use_ldlt) {
      H += 1e-13 * H.trace() / num_y * MatrixXd::Identity(num_y, num_y);
      Hldlt.compute(H);
      if (Hldlt.info() != Eigen::Success) {
        res.status = SolveStatus::NumericalTrouble;
        res.y = best_y;
        res.message = "Schur complement factorization failed";
        return res;
      }
    }
    auto solve_h = [&](const VectorXd& rhs) {
      VectorXd s =
          use_ldlt ? VectorXd(Hldlt.solve(rhs)) : VectorXd(Hllt.solve(rhs));
      VectorXd r = rhs - H * s;  // one refinement step
      s += use_ldlt ? VectorXd(Hldlt.solve(r)) : VectorXd(Hllt.solve(r));
      return s;
    };

    // rhs_i = -d_i + sum_j <F_i, mu Z^-1 - X - (E + X P) Z^-1>.
    auto build_rhs = [&](double mu_target, const std::vector<MatrixXd>* E) {
      VectorXd rhs = -d;
      for (int j = 0; j < J; ++j) {
        MatrixXd M = mu_target * Zinv[j] - X[j];
        MatrixXd EX = X[j] * P[j];
        if (E) EX += (*E)[j];
        M.noalias() -= EX * Zinv[j];
        for (size_t a = 0; a < blocks[j].vars.size(); ++a) {
          rhs(blocks[j].vars[a]) += sparse_trace(blocks[j].terms[a], M);
        }
      }
      return rhs;
    };
    auto directions = [&](const VectorXd& dy, double mu_target,
                          const std::vector<MatrixXd>* E,
                          std::vector<MatrixXd>& dZ,
                          std::vector<MatrixXd>& dX) {
      for (int j = 0; j < J; ++j) {
        dZ[j] = P[j];
        for (size_t a = 0; a < blocks[j].vars.size(); ++a) {
          const double v = dy(blocks[j].vars[a]);
          for (const Term& t : blocks[j].terms[a]) {
            dZ[j](t.row, t.col) += t.coeff * v;
            if (t.row != t.col) dZ[j](t.col, t.row) += t.coeff * v;
          }
        }
        MatrixXd EX = X[j] * dZ[j];
        if (E) EX += (*E)[j];
        dX[j] = mu_target * Zinv[j] - X[j] - EX * Zinv[j];
        dX[j] = 0.5 * (dX[j] + dX[j].transpose()).eval();
      }
    };

    std::vector<MatrixXd> dZ(J), dX(J);
    for (int j = 0; j < J; ++j) {
      dZ[j].resize(blocks[j].dim, blocks[j].dim);
      dX[j].resize(blocks[j].dim, blocks[j].dim);
    }

    // Predictor (affine scaling).
    VectorXd dy = solve_h(build_rhs(0.0, nullptr));
    directions(dy, 0.0, nullptr, dZ, dX);

    double ap = 1.0, ad = 1.0;
    std::vector<Eigen::LLT<MatrixXd>> Xllt(J);
    for (int j = 0; j < J; ++j) {
      X[j] = 0.5 * (X[j] + X[j].transpose()).eval();
      Xllt[j].compute(X[j]);
      ap = std::min(ap, step_to_boundary(Zllt[j], dZ[j]));
      if (Xllt[j].info() == Eigen::Success)
        ad = std::min(ad, step_to_boundary(Xllt[j], dX[j]));
    }

    double xz_aff = 0.0;
    for (int j = 0; j < J; ++j) {
      xz_aff += (X[j] + ad * dX[j]).cwiseProduct(Z[j] + ap * dZ[j]).sum();
    }
    double mu_aff = std::max(0.0, xz_aff / total_dim);
    double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    // Corrector with the affine cross term.
    std::vector<MatrixXd> E(J);
    for (int j = 0; j < J; ++j) {
      E[j] = 0.5 * (dX[j] * dZ[j] + dZ[j] * dX[j]);
    }
    dy = solve_h(build_rhs(sigma * mu, &E));
    directions(dy, sigma * mu, &E, dZ, dX);

    const double tau = iter < 2 ? 0.9 : 0.98;
    ap = ad = 1.0;
    for (int j = 0; j < J; ++j) {
      ap = std::min(ap, tau * step_to_boundary(Zllt[j], dZ[j]));
      if (Xllt[j].info() == Eigen::Success)
        ad = std::min(ad, tau * step_to_boundary(Xllt[j], dX[j]));
    }
    ap = std::min(ap, 1.0);
    ad = std::min(ad, 1.0);

    y += ap * dy;
    for (int j = 0; j < J; ++j) {
      Z[j] += ap * dZ[j];
      X[j] += ad * dX[j];
      Z[j] = 0.5 * (Z[j] + Z[j].transpose()).eval();
      X[j] = 0.5 * (X[j] + X[j].transpose()).eval();
    }

    if (ap < 1e-4 && ad < 1e-4) {
      if (++tiny_steps >= 3) {
        // Interior-point steps die at boundary-degenerate optima before the
        // gap certificate tightens fully; a clean primal residual with the
        // gap within a couple of orders of the target is still an answer —
        // downstream consumers re-verify feasibility independently.
        if (rp <= opt.feasibility_tol && rd <= 100.0 * opt.dual_tol &&
            gap <= 100.0 * opt.gap_tol) {
          res.status = SolveStatus::Optimal;
          res.y = y;
          res.message = "near-optimal: steps collapsed at the boundary";
          return res;
        }
        res.status = SolveStatus::MaxIterations;
        res.y = best_y;
        res.message = "step sizes collapsed";
        return res;
      }
    } else {
      tiny_steps = 0;
    }
  }

  res.status = SolveStatus::MaxIterations;
  res.y = best_y;
  res.message = "iteration limit reached";
  return res;
}

}  // namespace detail

inline Solution solve(const Problem& problem, const Options& opt = {}) {
  using detail::CBlock;
  using Eigen::MatrixXd;
  using Eigen::VectorXd;

  Solution sol;
  const int n = problem.num_vars;
  VectorXd c = problem.objective.size()
                   ? problem.objective
                   : VectorXd::Zero(n);
  if (c.size() != n) {
    throw ShapeError("sdp: objective length does not match variable count");
  }
  for (const auto& b : problem.blocks) {
    if (b.constant.rows() != b.dim || b.constant.cols() != b.dim) {
      throw ShapeError("sdp: block constant has wrong dimensions");
    }
    for (const Term& t : b.terms) {
      if (t.var < 0 || t.var >= n || t.row < 0 || t.row >= b.dim || t.col < 0 ||
          t.col >= b.dim) {
        throw ShapeError("sdp: term indices out of range");
      }
    }
  }

  // --- Equality elimination: x = x_part + N y. ---------------------------
  VectorXd x_part = VectorXd::Zero(n);
  MatrixXd N;  // nullspace basis
  bool has_null = true;
  if (!problem.equalities.empty()) {
    const int m = static_cast<int>(problem.equalities.size());
    MatrixXd E = MatrixXd::Zero(m, n);
    VectorXd rhs(m);
    for (int r = 0; r < m; ++r) {
      for (const auto& [v, coeff] : problem.equalities[r].coeffs) {
        if (v < 0 || v >= n) throw ShapeError("sdp: equality index out of range");
        E(r, v) += coeff;
      }
      rhs(r) = problem.equalities[r].rhs;
    }
    x_part = E.colPivHouseholderQr().solve(rhs);
    double resid = (E * x_part - rhs).cwiseAbs().maxCoeff();
    if (resid > 1e-8 * (1.0 + rhs.cwiseAbs().maxCoeff())) {
      sol.status = SolveStatus::Infeasible;
      sol.message = "equality rows are inconsistent";
      sol.x = VectorXd::Zero(n);
      return sol;
    }
    Eigen::FullPivLU<MatrixXd> lu(E);
    N = lu.kernel();
    if (lu.dimensionOfKernel() == 0) has_null = false;
  } else {
    N = MatrixXd::Identity(n, n);
  }

  const int k = has_null ? static_cast<int>(N.cols()) : 0;

  // Reduced objective and blocks in y-space.
  VectorXd cy = k ? VectorXd(N.transpose() * c) : VectorXd();

  std::vector<CBlock> reduced;
  reduced.reserve(problem.blocks.size());
  for (size_t j = 0; j < problem.blocks.size(); ++j) {
    const ConstraintBlock& b = problem.blocks[j];
    CBlock rb;
    rb.dim = b.dim;
    rb.constant = evaluate_block(problem, static_cast<int>(j), x_part);

    // Group original terms into y-space coefficient matrices.
    std::vector<std::vector<Term>> per_var(k);
    if (problem.equalities.empty()) {
      // N is the identity: terms map through unchanged.
      for (const Term& t : b.terms) {
        per_var[t.var].push_back(t);
      }
    } else {
      double max_coeff = 0.0;
      for (const Term& t : b.terms)
        max_coeff = std::max(max_coeff, std::abs(t.coeff));
      // Collapse duplicate positions first, keeping (var, coeff) lists.
      std::vector<Term> sorted = b.terms;
      std::sort(sorted.begin(), sorted.end(), [](const Term& a, const Term& c) {
        return std::tie(a.row, a.col, a.var) < std::tie(c.row, c.col, c.var);
      });
      size_t i = 0;
      while (i < sorted.size()) {
        size_t e = i;
        while (e < sorted.size() && sorted[e].row == sorted[i].row &&
               sorted[e].col == sorted[i].col) {
          ++e;
        }
        for (int yv = 0; yv < k; ++yv) {
          double coeff = 0.0;
          for (size_t q = i; q < e; ++q) {
            coeff += sorted[q].coeff * N(sorted[q].var, yv);
          }
          if (std::abs(coeff) > 1e-14 * std::max(1.0, max_coeff)) {
            per_var[yv].push_back({yv, sorted[i].row, sorted[i].col, coeff});
          }
        }
        i = e;
      }
    }
    for (int yv = 0; yv < k; ++yv) {
      if (!per_var[yv].empty()) {
        rb.vars.push_back(yv);
        rb.terms.push_back(std::move(per_var[yv]));
      }
    }
    reduced.push_back(std::move(rb));
  }

  detail::Compiled comp = detail::compile(reduced, k, cy);
  if (comp.proven_infeasible) {
    sol.status = SolveStatus::Infeasible;
    sol.message = comp.note;
    sol.x = x_part;
    return sol;
  }

  // Renumber block variables to the active set and restrict the objective.
  VectorXd ca = VectorXd::Zero(comp.num_active);
  for (int a = 0; a < comp.num_active; ++a) {
    if (cy.size()) ca(a) = cy(comp.active_vars[a]);
  }

  auto expand = [&](const VectorXd& ya) {
    VectorXd y = VectorXd::Zero(k);
    for (int a = 0; a < comp.num_active; ++a) y(comp.active_vars[a]) = ya(a);
    return has_null && k ? VectorXd(x_part + N * y) : x_part;
  };
  auto finish = [&](const detail::IpmResult& r, SolveStatus status) {
    sol.status = status;
    sol.x = expand(r.y);
    sol.objective = c.dot(sol.x);
    sol.iterations += r.iterations;
    sol.primal_residual = r.rp;
    sol.dual_residual = r.rd;
    sol.gap = r.gap;
    if (sol.message.empty()) sol.message = r.message;
    return sol;
  };

  if (comp.blocks.empty() || comp.num_active == 0) {
    // Everything constant: feasibility already verified in compile().
    detail::IpmResult r;
    r.status = SolveStatus::Optimal;
    r.y = VectorXd::Zero(comp.num_active);
    return finish(r, SolveStatus::Optimal);
  }

  // --- Direct attempt. -----------------------------------------------------
  detail::IpmResult direct = detail::run_ipm(comp.blocks, comp.num_active, ca, opt);
  sol.iterations = direct.iterations;
  if (direct.status == SolveStatus::Optimal) {
    return finish(direct, SolveStatus::Optimal);
  }

  // --- Margin problem: min t with F_j(y) + t I >= 0, t >= -1. --------------
  std::vector<CBlock> marg = comp.blocks;
  const int t_var = comp.num_active;
  for (CBlock& b : marg) {
    std::vector<Term> tid;
    for (int r = 0; r < b.dim; ++r) tid.push_back({t_var, r, r, 1.0});
    b.vars.push_back(t_var);
    b.terms.push_back(std::move(tid));
  }
  CBlock lower;
  lower.dim = 1;
  lower.constant = MatrixXd::Constant(1, 1, 1.0);
  lower.vars = {t_var};
  lower.terms = {{{t_var, 0, 0, 1.0}}};
  marg.push_back(lower);

  VectorXd cm = VectorXd::Zero(comp.num_active + 1);
  cm(t_var) = 1.0;

  // Feasible start: t big enough to clear every block at y = 0.
  VectorXd y0 = VectorXd::Zero(comp.num_active + 1);
  double t0 = 0.0;
  for (const CBlock& b : comp.blocks) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(b.constant,
                                               Eigen::EigenvaluesOnly);
    t0 = std::max(t0, -es.eigenvalues().minCoeff());
  }
  y0(t_var) = 1.5 * t0 + 1.0;

  Options mopt = opt;
  mopt.max_iterations = std::max(opt.max_iterations, 60);
  const double margin_scale = 1.0 + comp.const_scale;
  detail::IpmResult marg_res =
      detail::run_ipm(marg, comp.num_active + 1, cm, mopt, &y0, t_var,
                      -1e-4 * margin_scale);
  sol.iterations += marg_res.iterations;

  if (marg_res.status != SolveStatus::Optimal) {
    detail::IpmResult best = direct;
    best.message = "margin problem did not converge: " + marg_res.message;
    return finish(best, SolveStatus::NumericalTrouble);
  }

  const double t_star = marg_res.y(t_var);
  if (t_star > 1e-6 * margin_scale) {
    sol.status = SolveStatus::Infeasible;
    sol.x = expand(direct.y);
    sol.objective = c.dot(sol.x);
    sol.message = "margin problem is bounded away from feasibility (t* = " +
                  std::to_string(t_star) + ")";
    return sol;
  }
  if (t_star > -1e-9 * margin_scale) {
    detail::IpmResult best = direct;
    best.message = "feasible set appears to have empty interior";
    return finish(best, SolveStatus::NumericalTrouble);
  }

  // Strictly feasible point found: warm-start the objective solve from it.
  VectorXd warm = marg_res.y.head(comp.num_active);
  detail::IpmResult second =
      detail::run_ipm(comp.blocks, comp.num_active, ca, opt, &warm);
  sol.iterations += second.iterations;
  if (second.status == SolveStatus::Optimal) {
    return finish(second, SolveStatus::Optimal);
  }
  detail::IpmResult best =
      second.rp + second.rd + second.gap < direct.rp + direct.rd + direct.gap
          ? second
          : direct;
  return finish(best, best.status == SolveStatus::MaxIterations
                          ? SolveStatus::MaxIterations
                          : SolveStatus::NumericalTrouble);
}

}  // namespace gnoc::sdp

#endif  // GNOC_SDP_HPP_
