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

#ifndef GNOC_DERIVATIVE_CHECK_HPP_
#define GNOC_DERIVATIVE_CHECK_HPP_

#include <Eigen/Dense>
#include <functional>

namespace gnoc {

// Central finite differences, used as an independent check on analytic
// gradients and Jacobians.

inline Eigen::VectorXd fd_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x, xm = x;
  for (int k = 0; k < x.size(); ++k) {
    xp(k) = x(k) + h;
    xm(k) = x(k) - h;
    g(k) = (f(xp) - f(xm)) / (2.0 * h);
    xp(k) = x(k);
    xm(k) = x(k);
  }
  return g;
}

inline Eigen::MatrixXd fd_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-6) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  Eigen::VectorXd xp = x, xm = x;
  for (int k = 0; k < x.size(); ++k) {
    xp(k) = x(k) + h;
    xm(k) = x(k) - h;
    J.col(k) = (f(xp) - f(xm)) / (2.0 * h);
    xp(k) = x(k);
    xm(k) = x(k);
  }
  return J;
}

// Directional derivative (f(x + h d) - f(x - h d)) / (2 h).
inline double fd_directional(
    const std::function<double(double)>& f_along, double h = 1e-6) {
  return (f_along(h) - f_along(-h)) / (2.0 * h);
}

}  // namespace gnoc

#endif  // GNOC_DERIVATIVE_CHECK_HPP_
