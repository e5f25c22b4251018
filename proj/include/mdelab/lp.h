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

#ifndef MDELAB_LP_H_
#define MDELAB_LP_H_

#include <span>
#include <vector>

namespace mdelab {

// Balanced transportation problem: minimize sum_ij cost[i*n+j] * flow[i*n+j]
// subject to row sums = supply, column sums = demand, flow >= 0.
struct TransportSolution {
  std::vector<double> flow;  // row-major, supply.size() x demand.size()
  double cost = 0.0;
  int pivots = 0;
};

// Transportation (network) simplex on the bipartite spanning-tree basis,
// started from the north-west corner rule. Entering and leaving cells follow
// Bland's rule on the row-major cell index, so runs are deterministic and
// cannot cycle. Throws SolverFailure if the pivot budget is exhausted.
TransportSolution SolveTransport(std::span<const double> supply,
                                 std::span<const double> demand,
                                 std::span<const double> cost);

enum class RowSense { kLessEqual, kEqual, kGreaterEqual };

// minimize objective . x  subject to  rows[r] . x (sense) rhs[r],  x >= 0.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<RowSense> senses;
  std::vector<double> rhs;

  void AddRow(std::vector<double> coefficients, RowSense sense, double value);
};

struct LpSolution {
  std::vector<double> x;
  double objective = 0.0;
  int pivots = 0;
};

// Dense two-phase tableau simplex with Bland's rule. Throws SolverFailure on
// infeasible or unbounded programs and when the pivot budget is exhausted.
LpSolution SolveLinearProgram(const LinearProgram& lp);

}  // namespace mdelab

#endif  // MDELAB_LP_H_
