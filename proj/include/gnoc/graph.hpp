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

#ifndef GNOC_GRAPH_HPP_
#define GNOC_GRAPH_HPP_

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "gnoc/errors.hpp"

namespace gnoc {

// Undirected interaction graph over agents 0..N-1.  Each agent's neighbor
// set always contains the agent itself; neighbor lists are kept sorted so
// iteration order (and therefore every reduction in the library) is
// deterministic.
class Graph {
 public:
  Graph() = default;

  // Builds a graph from per-agent neighbor lists.  Self-loops are added if
  // missing.  Throws ShapeError on out-of-range indices or an asymmetric
  // edge set.
  explicit Graph(std::vector<std::vector<int>> neighbors) {
    const int n = static_cast<int>(neighbors.size());
    neighbors_.resize(n);
    for (int i = 0; i < n; ++i) {
      std::set<int> s(neighbors[i].begin(), neighbors[i].end());
      s.insert(i);
      for (int j : s) {
        if (j < 0 || j >= n) {
          throw ShapeError("graph: agent " + std::to_string(i) +
                           " lists out-of-range neighbor " + std::to_string(j));
        }
      }
      neighbors_[i].assign(s.begin(), s.end());
    }
    for (int i = 0; i < n; ++i) {
      for (int j : neighbors_[i]) {
        if (!contains(neighbors_[j], i)) {
          throw ShapeError("graph: edge (" + std::to_string(i) + "," +
                           std::to_string(j) + ") is not symmetric");
        }
      }
    }
  }

  static Graph cycle(int n) {
    if (n < 1) throw ShapeError("graph: cycle needs at least one agent");
    std::vector<std::vector<int>> nb(n);
    for (int i = 0; i < n; ++i) {
      nb[i] = {i, (i + 1) % n, (i + n - 1) % n};
    }
    return Graph(std::move(nb));
  }

  static Graph complete(int n) {
    if (n < 1) throw ShapeError("graph: complete graph needs at least one agent");
    std::vector<std::vector<int>> nb(n);
    for (int i = 0; i < n; ++i) {
      nb[i].resize(n);
      std::iota(nb[i].begin(), nb[i].end(), 0);
    }
    return Graph(std::move(nb));
  }

  int num_agents() const { return static_cast<int>(neighbors_.size()); }

  // Sorted, includes i itself.
  const std::vector<int>& neighbors(int i) const {
    check_agent(i);
    return neighbors_[i];
  }

  bool adjacent(int i, int j) const {
    check_agent(i);
    check_agent(j);
    return contains(neighbors_[i], j);
  }

  // Position of j within neighbors(i); throws LocalityError if j is not a
  // neighbor of i.  Used to index per-edge storage.
  int neighbor_index(int i, int j) const {
    check_agent(i);
    check_agent(j);
    const auto& nb = neighbors_[i];
    auto it = std::lower_bound(nb.begin(), nb.end(), j);
    if (it == nb.end() || *it != j) {
      throw LocalityError("graph: agent " + std::to_string(j) +
                          " is not a neighbor of agent " + std::to_string(i));
    }
    return static_cast<int>(it - nb.begin());
  }

  // Total directed neighbor pairs excluding self-loops: sum_i (|N_i| - 1).
  // One message travels along each such pair per sweep of a distributed
  // pass, so this is the per-phase message count.
  long message_pairs() const {
    long total = 0;
    for (const auto& nb : neighbors_) total += static_cast<long>(nb.size()) - 1;
    return total;
  }

  bool connected() const {
    const int n = num_agents();
    if (n == 0) return true;
    std::vector<char> seen(n, 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int i = stack.back();
      stack.pop_back();
      for (int j : neighbors_[i]) {
        if (!seen[j]) {
          seen[j] = 1;
          ++count;
          stack.push_back(j);
        }
      }
    }
    return count == n;
  }

 private:
  static bool contains(const std::vector<int>& v, int x) {
    return std::binary_search(v.begin(), v.end(), x);
  }

  void check_agent(int i) const {
    if (i < 0 || i >= num_agents()) {
      throw ShapeError("graph: agent index " + std::to_string(i) +
                       " out of range [0," + std::to_string(num_agents()) + ")");
    }
  }

  std::vector<std::vector<int>> neighbors_;
};

}  // namespace gnoc

#endif  // GNOC_GRAPH_HPP_
