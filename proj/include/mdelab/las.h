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

#ifndef MDELAB_LAS_H_
#define MDELAB_LAS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "mdelab/control.h"
#include "mdelab/measures.h"

namespace mdelab {

// Resolution N: time step 1/N, spatial lattice Z^n / N^2 on [-N, N]^n and
// velocity cells [0, 1/N)^n anchored at 0.
struct LasConfig {
  int n = 1;
  double horizon = 0.0;  // steps / n
  int steps = 0;
  double remainder = 0.0;  // requested horizon minus `horizon`

  // Rounds horizon * n down to an integer number of steps.
  static LasConfig Create(int n, double horizon);

  double time_step() const { return 1.0 / n; }
  double cell() const { return 1.0 / (static_cast<double>(n) * n); }
};

struct Trajectory {
  std::vector<double> times;  // l / N
  std::vector<DiscreteMeasure> states;
  LasConfig config;
  std::string provenance;
  double mass_error = 0.0;  // sum over states of |mass - 1|
  size_t max_atoms = 0;
};

// Component-wise floor(x * scale) with exact handling of points that lie on
// a cell boundary.
int64_t FloorIndex(double x, double scale);

// Moves every atom to the lattice point x_i with x in x_i + [0, 1/N^2)^n.
DiscreteMeasure LatticeQuantize(const DiscreteMeasure& mu, int n);

// One LAS step of length tau: the velocity atoms over each base atom are
// snapped to the 0-anchored grid of spacing 1/N and the mass w_base * w_fiber
// moves to x + tau v_j. For tau = 1/N the state must lie on the lattice and
// destinations are checked against [-N, N]^n.
DiscreteMeasure LasStep(const DiscreteMeasure& state, const FiberedMeasure& field,
                        int n, double tau);

// Runs the scheme driven by `field` from lattice_quantize(mu0).
Trajectory SolveLas(const MeasureVectorField& field, const DiscreteMeasure& mu0,
                    const LasConfig& config);
Trajectory SolveLas(const ControlSystem& sys, const MeasureControl& mc,
                    const DiscreteMeasure& mu0, const LasConfig& config);

// The state at an arbitrary time t in [0, horizon]: lattice states at step
// times, otherwise the displaced (not re-quantized) measure from the previous
// step time.
DiscreteMeasure StateAt(const Trajectory& trajectory,
                        const MeasureVectorField& field, double t);

// max over l < l' of W(states[l], states[l']) / ((l' - l) / N).
double TimeModulusCheck(const Trajectory& trajectory);
// C exp(C T) (R + 1) + 2 / N with C the sublinear constant and R the radius of
// the initial state.
double TimeModulusEnvelope(const Trajectory& trajectory, const ControlSystem& sys);

// Gronwall radius (1 + R) exp(C T) - 1 bounding the support of any solution
// whose speed grows at most like C (1 + |x|).
double APrioriRadius(double initial_radius, double sublinear, double horizon);

}  // namespace mdelab

#endif  // MDELAB_LAS_H_
