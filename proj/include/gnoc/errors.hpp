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

#ifndef GNOC_ERRORS_HPP_
#define GNOC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace gnoc {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed structure: dimension mismatches, asymmetric neighbor sets,
// missing self-loops, disconnected interaction graphs, bad indices.
struct ShapeError : Error {
  using Error::Error;
};

// A state or input became non-finite while integrating the dynamics.
// Carries the first offending (agent, time) pair.
struct DivergenceError : Error {
  int agent;
  int time;
  DivergenceError(int agent_, int time_, const std::string& what)
      : Error(what), agent(agent_), time(time_) {}
};

// An agent-local operation was asked about a non-neighbor index.
struct LocalityError : Error {
  using Error::Error;
};

// Invalid configuration values (degenerate bounds, nonpositive horizon, ...).
struct ConfigError : Error {
  using Error::Error;
};

// Numerical failure that is not a modelling error (singular matrix,
// factorization breakdown, ill-conditioned change of variables).
struct NumericalError : Error {
  using Error::Error;
};

// File format / parse problems.
struct IoError : Error {
  using Error::Error;
};

}  // namespace gnoc

#endif  // GNOC_ERRORS_HPP_
