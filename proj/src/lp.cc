// Copyright 2026 The mdelab Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mdelab/lp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "mdelab/error.h"

namespace mdelab {
namespace {

constexpr int kUnset = -1;

}  // namespace

TransportSolution SolveTransport(std::span<const double> supply,
                                 std::span<const double> demand,
                                 std::span<const double> cost) {
  const int m = static_cast<int>(supply.size());
  const int n = static_cast<int>(demand.size());
  if (m == 0 || n == 0 || cost.size() != static_cast<size_t>(m) * n) {
    throw Error(ErrorCode::kInvalidArgument, "transport problem shape");
  }
  const int cells = m * n;
  TransportSolution solution;
  solution.flow.assign(cells, 0.0);
  std::vector<double>& flow = solution.flow;
  std::vector<char> is_basic(cells, 0);

  // North-west corner: exactly m + n - 1 basic cells forming a spanning tree
  // of the bipartite row/column graph (zero flows kept for degenerate steps).
  {
    std::vector<double> left_supply(supply.begin(), supply.end());
    std::vector<double> left_demand(demand.begin(), demand.end());
    int i = 0, j = 0;
    while (true) {
      const double x = std::max(0.0, std::min(left_supply[i], left_demand[j]));
      flow[i * n + j] = x;
      is_basic[i * n + j] = 1;
      left_supply[i] -= x;
      left_demand[j] -= x;
      if (i == m - 1 && j == n - 1) break;
      if (i == m - 1) {
        ++j;
      } else if (j == n - 1) {
        ++i;
      } else if (left_supply[i] <= left_demand[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  double max_cost = 1.0;
  for (double c : cost) max_cost = std::max(max_cost, std::abs(c));
  const double tolerance = 1e-12 * max_cost;

  const int nodes = m + n;
  const long max_pivots = 100000L + 50L * cells;
  std::vector<std::vector<std::pair<int, int>>> adjacency(nodes);
  std::vector<double> potential(nodes);
  std::vector<int> parent_node(nodes), parent_cell(nodes), queue;
  queue.reserve(nodes);

  // Breadth-first traversal of the basis tree from `root`, filling parents.
  auto traverse = [&](int root) {
    std::fill(parent_node.begin(), parent_node.end(), kUnset);
    parent_node[root] = root;
    parent_cell[root] = kUnset;
    queue.clear();
    queue.push_back(root);
    for (size_t q = 0; q < queue.size(); ++q) {
      const int u = queue[q];
      for (auto [v, cell] : adjacency[u]) {
        if (parent_node[v] != kUnset) continue;
        parent_node[v] = u;
        parent_cell[v] = cell;
        queue.push_back(v);
      }
    }
    if (static_cast<int>(queue.size()) != nodes) {
      throw Error(ErrorCode::kSolverFailure, "basis is not a spanning tree");
    }
  };

  for (long pivot = 0;; ++pivot) {
    if (pivot > max_pivots) {
      throw Error(ErrorCode::kSolverFailure,
                  "transport simplex exceeded " + std::to_string(max_pivots) +
                      " pivots");
    }
    for (auto& adj : adjacency) adj.clear();
    for (int c = 0; c < cells; ++c) {
      if (!is_basic[c]) continue;
      const int i = c / n, j = c % n;
      adjacency[i].push_back({m + j, c});
      adjacency[m + j].push_back({i, c});
    }

    // Potentials u_i + v_j = c_ij on the tree, u_0 = 0.
    traverse(0);
    potential[0] = 0.0;
    for (size_t q = 1; q < queue.size(); ++q) {
      const int node = queue[q];
      potential[node] = cost[parent_cell[node]] - potential[parent_node[node]];
    }

    int entering = kUnset;
    for (int c = 0; c < cells; ++c) {
      if (is_basic[c]) continue;
      const int i = c / n, j = c % n;
      if (cost[c] - potential[i] - potential[m + j] < -tolerance) {
        entering = c;
        break;
      }
    }
    if (entering == kUnset) {
      solution.pivots = static_cast<int>(pivot);
      break;
    }

    // The cycle closes the tree path from column j back to row i.
    const int ei = entering / n, ej = entering % n;
    traverse(ei);
    std::vector<int> minus_cells, plus_cells{entering};
    bool minus = true;
    for (int node = m + ej; node != ei; node = parent_node[node]) {
      (minus ? minus_cells : plus_cells).push_back(parent_cell[node]);
      minus = !minus;
    }
    double theta = std::numeric_limits<double>::infinity();
    for (int c : minus_cells) theta = std::min(theta, flow[c]);
    int leaving = kUnset;
    for (int c : minus_cells) {
      if (flow[c] == theta && (leaving == kUnset || c < leaving)) leaving = c;
    }
    for (int c : plus_cells) flow[c] += theta;
    for (int c : minus_cells) flow[c] = std::max(0.0, flow[c] - theta);
    flow[leaving] = 0.0;
    is_basic[leaving] = 0;
    is_basic[entering] = 1;
  }

  solution.cost = 0.0;
  for (int c = 0; c < cells; ++c) solution.cost += flow[c] * cost[c];
  return solution;
}

void LinearProgram::AddRow(std::vector<double> coefficients, RowSense sense,
                           double value) {
  rows.push_back(std::move(coefficients));
  senses.push_back(sense);
  rhs.push_back(value);
}

namespace {

class Tableau {
 public:
  Tableau(int rows, int cols)
      : rows_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0),
        basis_(rows, kUnset) {}

  double& at(int r, int c) { return data_[r * (cols_ + 1) + c]; }
  double& rhs(int r) { return at(r, cols_); }
  // Row `rows_` holds reduced costs; its rhs entry is -objective.
  double& cost(int c) { return at(rows_, c); }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::vector<int>& basis() { return basis_; }

  void Pivot(int pr, int pc) {
    const double inv = 1.0 / at(pr, pc);
    for (int c = 0; c <= cols_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (int r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      const double factor = at(r, pc);
      if (factor == 0.0) continue;
      for (int c = 0; c <= cols_; ++c) at(r, c) -= factor * at(pr, c);
      at(r, pc) = 0.0;
    }
    basis_[pr] = pc;
  }

  // Bland's rule over columns [0, usable). Returns false if unbounded.
  bool Optimize(int usable, double tolerance, long& pivots, long max_pivots) {
    constexpr double kPivotTolerance = 1e-11;
    while (true) {
      int entering = kUnset;
      for (int c = 0; c < usable; ++c) {
        if (cost(c) < -tolerance) {
          entering = c;
          break;
        }
      }
      if (entering == kUnset) return true;
      int leaving = kUnset;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows_; ++r) {
        const double a = at(r, entering);
        if (a <= kPivotTolerance) continue;
        const double ratio = std::max(0.0, rhs(r)) / a;
        if (ratio < best || (ratio == best && basis_[r] < basis_[leaving])) {
          best = ratio;
          leaving = r;
        }
      }
      if (leaving == kUnset) return false;
      Pivot(leaving, entering);
      if (++pivots > max_pivots) {
        throw Error(ErrorCode::kSolverFailure,
                    "simplex exceeded " + std::to_string(max_pivots) +
                        " pivots");
      }
    }
  }

 private:
  int rows_;
  int cols_;
  std::vector<double> data_;
  std::vector<int> basis_;
};

}  // namespace

LpSolution SolveLinearProgram(const LinearProgram& lp) {
  const int num_vars = static_cast<int>(lp.objective.size());
  const int num_rows = static_cast<int>(lp.rows.size());
  if (lp.senses.size() != lp.rows.size() || lp.rhs.size() != lp.rows.size()) {
    throw Error(ErrorCode::kInvalidArgument, "linear program shape");
  }
  // Normalize to nonnegative right-hand sides.
  std::vector<RowSense> senses = lp.senses;
  std::vector<double> sign(num_rows, 1.0);
  int num_slack = 0, num_artificial = 0;
  for (int r = 0; r < num_rows; ++r) {
    if (lp.rows[r].size() != static_cast<size_t>(num_vars)) {
      throw Error(ErrorCode::kInvalidArgument, "row width mismatch");
    }
    if (lp.rhs[r] < 0.0) {
      sign[r] = -1.0;
      if (senses[r] == RowSense::kLessEqual) {
        senses[r] = RowSense::kGreaterEqual;
      } else if (senses[r] == RowSense::kGreaterEqual) {
        senses[r] = RowSense::kLessEqual;
      }
    }
    if (senses[r] != RowSense::kEqual) ++num_slack;
    if (senses[r] != RowSense::kLessEqual) ++num_artificial;
  }
  const int first_artificial = num_vars + num_slack;
  const int num_cols = first_artificial + num_artificial;
  Tableau t(num_rows, num_cols);
  {
    int slack = num_vars, artificial = first_artificial;
    for (int r = 0; r < num_rows; ++r) {
      for (int c = 0; c < num_vars; ++c) t.at(r, c) = sign[r] * lp.rows[r][c];
      t.rhs(r) = sign[r] * lp.rhs[r];
      switch (senses[r]) {
        case RowSense::kLessEqual:
          t.at(r, slack) = 1.0;
          t.basis()[r] = slack++;
          break;
        case RowSense::kGreaterEqual:
          t.at(r, slack++) = -1.0;
          t.at(r, artificial) = 1.0;
          t.basis()[r] = artificial++;
          break;
        case RowSense::kEqual:
          t.at(r, artificial) = 1.0;
          t.basis()[r] = artificial++;
          break;
      }
    }
  }

  double scale = 1.0;
  for (double c : lp.objective) scale = std::max(scale, std::abs(c));
  double rhs_scale = 1.0;
  for (double b : lp.rhs) rhs_scale = std::max(rhs_scale, std::abs(b));
  long pivots = 0;
  const long max_pivots = 200000L + 20L * num_cols * (num_rows + 1);

  if (num_artificial > 0) {
    // Phase 1: minimize the sum of artificials.
    for (int r = 0; r < num_rows; ++r) {
      if (t.basis()[r] < first_artificial) continue;
      for (int c = 0; c <= num_cols; ++c) t.cost(c) -= t.at(r, c);
    }
    for (int c = first_artificial; c < num_cols; ++c) t.cost(c) = 0.0;
    if (!t.Optimize(num_cols, 1e-12 * rhs_scale, pivots, max_pivots)) {
      throw Error(ErrorCode::kSolverFailure, "phase 1 unbounded");
    }
    if (-t.rhs(num_rows) > 1e-9 * rhs_scale) {
      throw Error(ErrorCode::kSolverFailure,
                  "linear program infeasible (phase 1 residual " +
                      std::to_string(-t.rhs(num_rows)) + ")");
    }
    // Drive remaining (zero-valued) artificials out of the basis; rows where
    // that is impossible are redundant and get zeroed.
    for (int r = 0; r < num_rows; ++r) {
      if (t.basis()[r] < first_artificial) continue;
      int column = kUnset;
      for (int c = 0; c < first_artificial; ++c) {
        if (std::abs(t.at(r, c)) > 1e-9) {
          column = c;
          break;
        }
      }
      if (column != kUnset) {
        t.Pivot(r, column);
      } else {
        for (int c = 0; c <= num_cols; ++c) t.at(r, c) = 0.0;
      }
    }
  }

  // Phase 2 reduced costs.
  for (int c = 0; c <= num_cols; ++c) t.cost(c) = 0.0;
  for (int c = 0; c < num_vars; ++c) t.cost(c) = lp.objective[c];
  for (int r = 0; r < num_rows; ++r) {
    const int b = t.basis()[r];
    if (b >= num_vars || b == kUnset) continue;
    const double cb = lp.objective[b];
    if (cb == 0.0) continue;
    for (int c = 0; c <= num_cols; ++c) t.cost(c) -= cb * t.at(r, c);
  }
  if (!t.Optimize(first_artificial, 1e-12 * scale, pivots, max_pivots)) {
    throw Error(ErrorCode::kSolverFailure, "linear program unbounded");
  }

  LpSolution solution;
  solution.x.assign(num_vars, 0.0);
  for (int r = 0; r < num_rows; ++r) {
    const int b = t.basis()[r];
    if (b >= 0 && b < num_vars) solution.x[b] = std::max(0.0, t.rhs(r));
  }
  solution.objective = 0.0;
  for (int c = 0; c < num_vars; ++c) {
    solution.objective += lp.objective[c] * solution.x[c];
  }
  solution.pivots = static_cast<int>(pivots);
  return solution;
}

}  // namespace mdelab
