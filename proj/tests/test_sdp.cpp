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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "gnoc/sdp.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using gnoc::sdp::ConstraintBlock;
using gnoc::sdp::EqualityRow;
using gnoc::sdp::Options;
using gnoc::sdp::Problem;
using gnoc::sdp::Solution;
using gnoc::sdp::SolveStatus;

namespace {

ConstraintBlock scalar_block(double constant, int var, double coeff) {
  ConstraintBlock b;
  b.dim = 1;
  b.constant = MatrixXd::Constant(1, 1, constant);
  b.terms.push_back({var, 0, 0, coeff});
  return b;
}

TEST_CASE("scalar bound: min x subject to x >= 1", "[sdp]") {
  Problem p;
  p.num_vars = 1;
  p.objective = VectorXd::Ones(1);
  p.blocks.push_back(scalar_block(-1.0, 0, 1.0));  // x - 1 >= 0

  Solution s = gnoc::sdp::solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  REQUIRE(s.x(0) == Catch::Approx(1.0).margin(1e-6));
  REQUIRE(s.objective == Catch::Approx(1.0).margin(1e-6));
  REQUIRE(gnoc::sdp::evaluate_block(p, 0, s.x)(0, 0) >= -1e-9);
}

TEST_CASE("off-diagonal coupling: max x with unit-diagonal gram", "[sdp]") {
  // [[1, x], [x, 1]] >= 0  <=>  |x| <= 1; minimizing -x drives x to 1.
  Problem p;
  p.num_vars = 1;
  p.objective = -VectorXd::Ones(1);
  ConstraintBlock b;
  b.dim = 2;
  b.constant = MatrixXd::Identity(2, 2);
  b.terms.push_back({0, 0, 1, 1.0});  // mirrored into (1,0)
  p.blocks.push_back(b);

  Solution s = gnoc::sdp::solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  REQUIRE(s.x(0) == Catch::Approx(1.0).margin(1e-5));
}

TEST_CASE("two-variable corner solution", "[sdp]") {
  // min 2x + y subject to x >= 1, y >= 2, x + y >= 4 (diagonal SDP = LP).
  // Optimum sits at (1, 3) with value 5.
  Problem p;
  p.num_vars = 2;
  p.objective = VectorXd(2);
  p.objective << 2.0, 1.0;
  p.blocks.push_back(scalar_block(-1.0, 0, 1.0));
  p.blocks.push_back(scalar_block(-2.0, 1, 1.0));
  ConstraintBlock sum;
  sum.dim = 1;
  sum.constant = MatrixXd::Constant(1, 1, -4.0);
  sum.terms.push_back({0, 0, 0, 1.0});
  sum.terms.push_back({1, 0, 0, 1.0});
  p.blocks.push_back(sum);

  Solution s = gnoc::sdp::solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  REQUIRE(s.x(0) == Catch::Approx(1.0).margin(1e-5));
  REQUIRE(s.x(1) == Catch::Approx(3.0).margin(1e-5));
  REQUIRE(s.objective == Catch::Approx(5.0).margin(1e-5));
}

TEST_CASE("pure feasibility finds an interior point", "[sdp]") {
  // x >= 0 and 1 - x >= 0 with no objective.
  Problem p;
  p.num_vars = 1;
  p.blocks.push_back(scalar_block(0.0, 0, 1.0));
  p.blocks.push_back(scalar_block(1.0, 0, -1.0));

  Solution s = gnoc::sdp::solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  REQUIRE(s.x(0) >= -1e-9);
  REQUIRE(s.x(0) <= 1.0 + 1e-9);
}

TEST_CASE("contradictory scalar bounds are certified infeasible", "[sdp]") {
  // x >= 0 and -1 - x >= 0 (i.e. x <= -1) cannot both hold.
  Problem p;
  p.num_vars = 1;
  p.blocks.push_back(scalar_block(0.0, 0, 1.0));
  p.blocks.push_back(scalar_block(-1.0, 0, -1.0));

  Solution s = gnoc::sdp::solve(p);
  REQUIRE(s.status == SolveStatus::Infeasible);
}

TEST_CASE("equality rows restrict the search space", "[sdp]") {
  // min x0 + x1 subject to x0 = x1, x0 - 1 >= 0, x1 >= 0 -> (1, 1).
  Problem p;
  p.num_vars = 2;
  p.objective = VectorXd::Ones(2);
  p.blocks.push_back(scalar_block(-1.0, 0, 1.0));
  p.blocks.push_back(scalar_block(0.0, 1, 1.0));
  EqualityRow eq;
  eq.coeffs = {{0, 1.0}, {1, -1.0}};
  eq.rhs = 0.0;
  p.equalities.push_back(eq);

  Solution s = gnoc::sdp::solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  REQUIRE(s.x(0) == Catch::Approx(1.0).margin(1e-6));
  REQUIRE(s.x(1) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("inconsistent equalities are infeasible", "[sdp]") {
  Problem p;
  p.num_vars = 1;
  p.blocks.push_back(scalar_block(0.0, 0, 1.0));
  EqualityRow a{{{0, 1.0}}, 1.0};
  EqualityRow b{{{0, 1.0}}, 2.0};
  p.equalities = {a, b};

  Solution s = gnoc::sdp::solve(p);
  REQUIRE(s.status == SolveStatus::Infeasible);
}

TEST_CASE("decoupled diagonal entries split and solve", "[sdp]") {
  // One 2x2 block that is really two independent scalar constraints.
  Problem p;
  p.num_vars = 2;
  p.objective = VectorXd::Ones(2);
  ConstraintBlock b;
  b.dim = 2;
  b.constant = MatrixXd::Zero(2, 2);
  b.constant(0, 0) = -1.0;
  b.constant(1, 1) = -2.0;
  b.terms.push_back({0, 0, 0, 1.0});
  b.terms.push_back({1, 1, 1, 1.0});
  p.blocks.push_back(b);

  Solution s = gnoc::sdp::solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  REQUIRE(s.x(0) == Catch::Approx(1.0).margin(1e-5));
  REQUIRE(s.x(1) == Catch::Approx(2.0).margin(1e-5));
}

TEST_CASE("constant positive components are dropped", "[sdp]") {
  // The (1,1) entry is a constant 5 decoupled from the variable part.
  Problem p;
  p.num_vars = 1;
  p.objective = VectorXd::Ones(1);
  ConstraintBlock b;
  b.dim = 2;
  b.constant = MatrixXd::Zero(2, 2);
  b.constant(0, 0) = -1.0;
  b.constant(1, 1) = 5.0;
  b.terms.push_back({0, 0, 0, 1.0});
  p.blocks.push_back(b);

  Solution s = gnoc::sdp::solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  REQUIRE(s.x(0) == Catch::Approx(1.0).margin(1e-5));

  // A constant negative component certifies infeasibility up front.
  Problem q = p;
  q.blocks[0].constant(1, 1) = -5.0;
  REQUIRE(gnoc::sdp::solve(q).status == SolveStatus::Infeasible);
}

TEST_CASE("empty problems are trivially feasible", "[sdp]") {
  Problem p;
  p.num_vars = 0;
  Solution s = gnoc::sdp::solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);

  // Variables constrained by nothing stay at zero.
  Problem q;
  q.num_vars = 2;
  q.blocks.push_back(scalar_block(-1.0, 0, 1.0));
  Solution sq = gnoc::sdp::solve(q);
  REQUIRE(sq.status == SolveStatus::Optimal);
  REQUIRE(sq.x(1) == 0.0);
}

TEST_CASE("solves are deterministic", "[sdp]") {
  Problem p;
  p.num_vars = 2;
  p.objective = VectorXd(2);
  p.objective << 1.0, 0.5;
  ConstraintBlock b;
  b.dim = 2;
  b.constant = MatrixXd::Identity(2, 2) * -0.5;
  b.terms.push_back({0, 0, 0, 1.0});
  b.terms.push_back({1, 1, 1, 1.0});
  b.terms.push_back({1, 0, 1, 0.3});
  p.blocks.push_back(b);

  Solution a = gnoc::sdp::solve(p);
  Solution c = gnoc::sdp::solve(p);
  REQUIRE(a.status == SolveStatus::Optimal);
  REQUIRE(a.x(0) == c.x(0));
  REQUIRE(a.x(1) == c.x(1));
}

TEST_CASE("lyapunov-style feasibility with margin", "[sdp]") {
  // Find Q = Q' with Q - A Q A' - I >= 0 scaled down, A = 0.6 rotation;
  // encoded with the three entries of Q as variables.  Verifies a dense
  // 2x2 matrix-variable style encoding end to end.
  Eigen::Matrix2d A;
  A << 0.5, -0.3, 0.3, 0.5;
  Problem p;
  p.num_vars = 3;  // q00, q01, q11
  p.objective = VectorXd::Ones(3);  // minimize trace-ish to stay bounded
  p.objective(1) = 0.0;

  // Block 1: Q - A Q A' - 0.1 I >= 0.  Each variable contributes
  // E_k - A E_k A' where E_k is the symmetric basis element.
  auto basis = [](int k) {
    Eigen::Matrix2d E = Eigen::Matrix2d::Zero();
    if (k == 0) E(0, 0) = 1.0;
    if (k == 1) E(0, 1) = E(1, 0) = 1.0;
    if (k == 2) E(1, 1) = 1.0;
    return E;
  };
  ConstraintBlock lyap;
  lyap.dim = 2;
  lyap.constant = -0.1 * MatrixXd::Identity(2, 2);
  for (int k = 0; k < 3; ++k) {
    Eigen::Matrix2d M = basis(k) - A * basis(k) * A.transpose();
    lyap.terms.push_back({k, 0, 0, M(0, 0)});
    lyap.terms.push_back({k, 0, 1, M(0, 1)});
    lyap.terms.push_back({k, 1, 1, M(1, 1)});
  }
  p.blocks.push_back(lyap);

  // Block 2: Q >= 0.1 I.
  ConstraintBlock pos;
  pos.dim = 2;
  pos.constant = -0.1 * MatrixXd::Identity(2, 2);
  pos.terms.push_back({0, 0, 0, 1.0});
  pos.terms.push_back({1, 0, 1, 1.0});
  pos.terms.push_back({2, 1, 1, 1.0});
  p.blocks.push_back(pos);

  Solution s = gnoc::sdp::solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  Eigen::Matrix2d Q;
  Q << s.x(0), s.x(1), s.x(1), s.x(2);
  Eigen::Matrix2d resid = Q - A * Q * A.transpose() -
                          0.1 * Eigen::Matrix2d::Identity();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(resid);
  REQUIRE(es.eigenvalues().minCoeff() >= -1e-8);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eq(Q);
  REQUIRE(eq.eigenvalues().minCoeff() >= 0.1 - 1e-8);
}

// Brute-force LP oracle: minimize c'x over {a_r' x + b_r >= 0} by
// enumerating all basic points (vertices) of the feasible polytope.
double lp_by_vertex_enumeration(const MatrixXd& a, const VectorXd& b,
                                const VectorXd& c) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> idx(n);
  // Iterate over all n-subsets of rows via simple counters.
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      MatrixXd as(n, n);
      VectorXd bs(n);
      for (int r = 0; r < n; ++r) {
        as.row(r) = a.row(idx[r]);
        bs(r) = -b(idx[r]);
      }
      Eigen::FullPivLU<MatrixXd> lu(as);
      if (!lu.isInvertible()) return;
      VectorXd x = lu.solve(bs);
      if (((a * x + b).array() >= -1e-9).all()) {
        best = std::min(best, c.dot(x));
      }
      return;
    }
    for (int r = start; r < m; ++r) {
      idx[depth] = r;
      rec(r + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

TEST_CASE("random LPs as diagonal blocks match vertex enumeration", "[sdp]") {
  std::mt19937 rng(51);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 2);  // 2 or 3 variables
    const int m = 2 * n + 3;
    MatrixXd a(m, n);
    VectorXd b(m), c(n);
    // Box rows keep the polytope bounded; extra random halfspaces are
    // shifted to contain the origin so the feasible set is nonempty.
    for (int v = 0; v < n; ++v) {
      a.row(2 * v).setZero();
      a(2 * v, v) = 1.0;
      b(2 * v) = 2.0;  // x_v >= -2
      a.row(2 * v + 1).setZero();
      a(2 * v + 1, v) = -1.0;
      b(2 * v + 1) = 2.0;  // x_v <= 2
    }
    for (int r = 2 * n; r < m; ++r) {
      for (int v = 0; v < n; ++v) a(r, v) = unif(rng);
      b(r) = 1.0 + std::abs(unif(rng));
    }
    for (int v = 0; v < n; ++v) c(v) = unif(rng);

    double oracle = lp_by_vertex_enumeration(a, b, c);
    REQUIRE(std::isfinite(oracle));

    Problem p;
    p.num_vars = n;
    p.objective = c;
    for (int r = 0; r < m; ++r) {
      ConstraintBlock blk;
      blk.dim = 1;
      blk.constant = MatrixXd::Constant(1, 1, b(r));
      for (int v = 0; v < n; ++v) {
        if (a(r, v) != 0.0) blk.terms.push_back({v, 0, 0, a(r, v)});
      }
      p.blocks.push_back(blk);
    }
    Solution s = gnoc::sdp::solve(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    REQUIRE(s.objective == Catch::Approx(oracle).margin(1e-6));
    REQUIRE(((a * s.x + b).array() >= -1e-8).all());
  }
}

TEST_CASE("trace minimization recovers the Lyapunov solution", "[sdp]") {
  // min tr(Q) s.t. Q - A Q A' >= C with C > 0 has the discrete Lyapunov
  // solution as its unique optimum: any feasible Q exceeds it in the
  // semidefinite order, so also in trace.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 2);  // 2 or 3
    MatrixXd A(d, d);
    for (int r = 0; r < d; ++r)
      for (int cc = 0; cc < d; ++cc) A(r, cc) = unif(rng);
    A *= 0.7 / std::max(1.0, A.cwiseAbs().rowwise().sum().maxCoeff());
    MatrixXd G(d, d);
    for (int r = 0; r < d; ++r)
      for (int cc = 0; cc < d; ++cc) G(r, cc) = unif(rng);
    MatrixXd C = G * G.transpose() + 0.1 * MatrixXd::Identity(d, d);

    // Oracle by vectorization: (I - kron(A, A)) vec(Q) = vec(C).
    MatrixXd K = MatrixXd::Identity(d * d, d * d);
    for (int r1 = 0; r1 < d; ++r1)
      for (int c1 = 0; c1 < d; ++c1)
        for (int r2 = 0; r2 < d; ++r2)
          for (int c2 = 0; c2 < d; ++c2)
            K(r1 * d + r2, c1 * d + c2) -= A(r1, c1) * A(r2, c2);
    VectorXd vecC(d * d);
    for (int cc = 0; cc < d; ++cc)
      for (int r = 0; r < d; ++r) vecC(cc * d + r) = C(r, cc);
    // Note vec here is column-major; K was built row-of-kron consistent
    // with vec(AQA') = kron(A, A) vec(Q) in the same ordering.
    VectorXd vecQ = K.colPivHouseholderQr().solve(vecC);
    MatrixXd Qstar(d, d);
    for (int cc = 0; cc < d; ++cc)
      for (int r = 0; r < d; ++r) Qstar(r, cc) = vecQ(cc * d + r);
    Qstar = 0.5 * (Qstar + Qstar.transpose()).eval();

    // Symmetric-variable basis: one variable per upper-triangular entry.
    const int nv = d * (d + 1) / 2;
    auto var_of = [&](int r, int cc) {
      if (r > cc) std::swap(r, cc);
      return r * d + cc - r * (r + 1) / 2;
    };
    Problem p;
    p.num_vars = nv;
    p.objective = VectorXd::Zero(nv);
    for (int r = 0; r < d; ++r) p.objective(var_of(r, r)) = 1.0;

    ConstraintBlock lyap;
    lyap.dim = d;
    lyap.constant = -C;
    // Q contributes delta_rc at (r, c); -A Q A' contributes
    // -(A e_r)(A e_c)' - (A e_c)(A e_r)' per off-diagonal unit pair.
    for (int r = 0; r < d; ++r) {
      for (int cc = r; cc < d; ++cc) {
        MatrixXd Er = MatrixXd::Zero(d, d);
        Er(r, cc) = 1.0;
        if (r != cc) Er(cc, r) = 1.0;
        MatrixXd coeffs = Er - A * Er * A.transpose();
        coeffs = 0.5 * (coeffs + coeffs.transpose()).eval();
        for (int rr = 0; rr < d; ++rr) {
          for (int c2 = rr; c2 < d; ++c2) {
            if (std::abs(coeffs(rr, c2)) > 1e-15) {
              lyap.terms.push_back({var_of(r, cc), rr, c2, coeffs(rr, c2)});
            }
          }
        }
      }
    }
    p.blocks.push_back(lyap);

    Solution s = gnoc::sdp::solve(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    REQUIRE(s.objective == Catch::Approx(Qstar.trace()).epsilon(1e-6));
    MatrixXd Qsol(d, d);
    for (int r = 0; r < d; ++r)
      for (int cc = 0; cc < d; ++cc) Qsol(r, cc) = s.x(var_of(r, cc));
    REQUIRE((Qsol - Qstar).cwiseAbs().maxCoeff() < 1e-5 * Qstar.trace());
  }
}

}  // namespace
