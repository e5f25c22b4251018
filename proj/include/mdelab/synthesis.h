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

#ifndef MDELAB_SYNTHESIS_H_
#define MDELAB_SYNTHESIS_H_

#include <memory>
#include <span>
#include <vector>

#include "mdelab/control.h"
#include "mdelab/measures.h"

namespace mdelab {

// A greedy covering of a finite velocity set by balls of radius eps/2 with
// the induced Voronoi cells.
struct VelocityNet {
  std::vector<Point> velocities;  // the covered set, sorted, distinct
  std::vector<Point> centers;     // a subset of `velocities`
  std::vector<size_t> cell;       // velocities[i] belongs to centers[cell[i]]
  double epsilon = 0.0;

  std::optional<size_t> IndexOf(std::span<const double> velocity) const;
};

// Farthest-point net: the first center is the lexicographically smallest
// velocity; the farthest uncovered velocity (ties to the smallest) is added
// until every velocity lies within eps/2 of a center. Cells go to the nearest
// center, ties to the lowest center index.
VelocityNet EpsilonNet(std::vector<Point> velocities, double eps);

// Moves each velocity atom's mass onto the center of its cell.
DiscreteMeasure QuantizeFiber(const VelocityNet& net,
                              const DiscreteMeasure& fiber);

// Per-atom control fibers for V[mu]: quantize the velocity fiber on an
// eps-net of F(x) and pick, per center, the control whose velocity is closest
// (ties to the lowest control index).
std::vector<DiscreteMeasure> SynthesizeFibers(const ControlSystem& sys,
                                              const MeasureVectorField& field,
                                              double eps,
                                              const StateBox& domain,
                                              const DiscreteMeasure& mu);

// The table measure control mu -> mu (x)_x beta_x built by SynthesizeFibers.
MeasureControl SynthesizeControl(std::shared_ptr<const ControlSystem> sys,
                                 MeasureVectorField field, double eps,
                                 StateBox domain);

}  // namespace mdelab

#endif  // MDELAB_SYNTHESIS_H_
