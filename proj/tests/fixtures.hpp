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

// Hand-assembled gain certificates with known vertex gains.  They let the
// evaluation and projection layers be tested against pencil-and-paper
// arithmetic without running any synthesis.

#ifndef GNOC_TESTS_FIXTURES_HPP_
#define GNOC_TESTS_FIXTURES_HPP_

#include <Eigen/Dense>
#include <utility>

#include "gnoc/lmi.hpp"

namespace gnoc_tests {

// 3-agent scalar ring with one varying scalar per ordered coupling block
// (9 total, so every pair of agents interacts).  The vertex gains are single
// entries at the owning block: +(s+1) on the lower vertex, -(s+1) on the
// upper, which makes every blend value easy to compute by hand.
inline gnoc::SynthesisCertificate ring9_certificate() {
  gnoc::SynthesisCertificate cert;
  cert.success = true;
  cert.state_dims = {1, 1, 1};
  cert.input_dims = {1, 1, 1};
  cert.base = Eigen::MatrixXd::Zero(3, 3);
  cert.input_matrix = Eigen::MatrixXd::Identity(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      gnoc::CertificateEntry e;
      e.agent_row = i;
      e.agent_col = j;
      const double nominal = i == j ? 0.5 : 0.1;
      const double width = 0.05 + 0.01 * (3 * i + j);
      e.lo = nominal - width;
      e.hi = nominal + width;
      cert.entries.push_back(e);
    }
  }
  const int S = cert.num_varying();
  for (int p = 0; p < 2 * S; ++p) {
    const gnoc::CertificateEntry& e = cert.entries[p % S];
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(3, 3);
    K(e.agent_row, e.agent_col) = (p < S ? 1.0 : -1.0) * (p % S + 1);
    cert.gains.push_back(K);
    cert.raw_gains.push_back(K);
    cert.masks.push_back({{e.agent_row, e.agent_col}});
  }
  return cert;
}

// Certificate whose intervals bracket the couplings of the 3-agent linear
// ring oracle (0.5 on the diagonal, 0.1 on the edges) and whose lower and
// upper gains coincide, so the blended feedback is the constant matrix with
// k_self on the diagonal and k_cross on every ring edge.
inline gnoc::SynthesisCertificate lq3_feedback_certificate(double k_self,
                                                           double k_cross) {
  gnoc::SynthesisCertificate cert;
  cert.success = true;
  cert.state_dims = {1, 1, 1};
  cert.input_dims = {1, 1, 1};
  cert.base = Eigen::MatrixXd::Zero(3, 3);
  cert.input_matrix = Eigen::MatrixXd::Identity(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      gnoc::CertificateEntry e;
      e.agent_row = i;
      e.agent_col = j;
      e.lo = (i == j ? 0.5 : 0.1) - (i == j ? 0.1 : 0.05);
      e.hi = (i == j ? 0.5 : 0.1) + (i == j ? 0.1 : 0.05);
      cert.entries.push_back(e);
    }
  }
  const int S = cert.num_varying();
  for (int p = 0; p < 2 * S; ++p) {
    const gnoc::CertificateEntry& e = cert.entries[p % S];
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(3, 3);
    K(e.agent_row, e.agent_col) =
        S * (e.agent_row == e.agent_col ? k_self : k_cross);
    cert.gains.push_back(K);
    cert.raw_gains.push_back(K);
    cert.masks.push_back({{e.agent_row, e.agent_col}});
  }
  return cert;
}

}  // namespace gnoc_tests

#endif  // GNOC_TESTS_FIXTURES_HPP_
