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

#include "mdelab/las.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "mdelab/error.h"
#include "mdelab/transport.h"

namespace mdelab {
namespace {

// Largest k with (double)k / denominator <= x: the grid cell containing x,
// measured against the represented grid points themselves.
int64_t GridIndex(double x, double denominator) {
  auto k = static_cast<int64_t>(std::floor(x * denominator));
  while (static_cast<double>(k + 1) / denominator <= x) ++k;
  while (static_cast<double>(k) / denominator > x) --k;
  return k;
}

void CheckInsideLattice(std::span<const double> x, int n, const char* what) {
  for (double c : x) {
    if (c < -n || c > n) {
      throw Error(ErrorCode::kSupportEscapesLattice,
                  std::string(what) + " coordinate " + std::to_string(c) +
                      " outside [-" + std::to_string(n) + ", " +
                      std::to_string(n) + "]");
    }
  }
}

}  // namespace

int64_t FloorIndex(double x, double scale) { return GridIndex(x, scale); }

LasConfig LasConfig::Create(int n, double horizon) {
  if (n <= 0) throw Error(ErrorCode::kInvalidArgument, "N must be >= 1");
  if (!(horizon > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "horizon must be positive");
  }
  LasConfig config;
  config.n = n;
  // Tolerate horizons such as 0.3 whose product with N is an integer up to
  // representation error.
  const double raw = horizon * n;
  config.steps = static_cast<int>(std::floor(raw + 1e-9));
  if (config.steps == 0) {
    throw Error(ErrorCode::kInvalidArgument, "horizon shorter than one step");
  }
  config.horizon = static_cast<double>(config.steps) / n;
  config.remainder = std::max(0.0, horizon - config.horizon);
  return config;
}

DiscreteMeasure LatticeQuantize(const DiscreteMeasure& mu, int n) {
  const double scale = static_cast<double>(n) * n;
  std::vector<Atom> atoms;
  atoms.reserve(mu.size());
  for (const Atom& a : mu.atoms()) {
    CheckInsideLattice(a.point, n, "atom");
    Point p(a.point.size());
    for (size_t k = 0; k < p.size(); ++k) {
      p[k] = static_cast<double>(GridIndex(a.point[k], scale)) / scale;
    }
    atoms.push_back({std::move(p), a.weight});
  }
  return DiscreteMeasure::Create(std::move(atoms));
}

DiscreteMeasure LasStep(const DiscreteMeasure& state,
                        const FiberedMeasure& field, int n, double tau) {
  if (field.kind() != FiberKind::kVelocity) {
    throw Error(ErrorCode::kFiberKindMismatch, "LAS needs velocity fibers");
  }
  if (field.base() != state) {
    throw Error(ErrorCode::kInvalidArgument,
                "vector field base differs from the state");
  }
  if (field.fiber_dim() != state.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "velocity dimension");
  }
  if (!(tau > 0.0) || tau > 1.0 / n) {
    throw Error(ErrorCode::kInvalidArgument, "tau must lie in (0, 1/N]");
  }
  const bool full_step = tau == 1.0 / n;
  const double scale = static_cast<double>(n) * n;
  const double velocity_scale = n;
  const int64_t lattice_limit = static_cast<int64_t>(n) * n * n;
  const size_t dim = state.dim();

  std::vector<Atom> moved;
  std::vector<int64_t> base_index(dim);
  for (size_t i = 0; i < state.size(); ++i) {
    const Atom& base = state.atom(i);
    if (full_step) {
      for (size_t k = 0; k < dim; ++k) {
        base_index[k] = GridIndex(base.point[k], scale);
        if (static_cast<double>(base_index[k]) / scale != base.point[k]) {
          throw Error(ErrorCode::kInvalidArgument,
                      "state atom is not on the lattice Z^n/N^2");
        }
      }
    }
    for (const Atom& v : field.fiber(i).atoms()) {
      Point destination(dim);
      for (size_t k = 0; k < dim; ++k) {
        const int64_t cell = GridIndex(v.point[k], velocity_scale);
        if (full_step) {
          // x + (1/N)(j/N) is again a lattice point: add indices exactly.
          const int64_t index = base_index[k] + cell;
          if (index < -lattice_limit || index > lattice_limit) {
            throw Error(ErrorCode::kSupportEscapesLattice,
                        "destination leaves [-" + std::to_string(n) + ", " +
                            std::to_string(n) + "]");
          }
          destination[k] = static_cast<double>(index) / scale;
        } else {
          destination[k] =
              base.point[k] + tau * (static_cast<double>(cell) / velocity_scale);
        }
      }
      moved.push_back({std::move(destination), base.weight * v.weight});
    }
  }
  return DiscreteMeasure::Create(std::move(moved));
}

Trajectory SolveLas(const MeasureVectorField& field, const DiscreteMeasure& mu0,
                    const LasConfig& config) {
  Trajectory trajectory{{}, {}, config, field.name(), 0.0, 0};
  auto record = [&](double t, DiscreteMeasure state) {
    trajectory.mass_error += std::abs(state.TotalMass() - 1.0);
    trajectory.max_atoms = std::max(trajectory.max_atoms, state.size());
    trajectory.times.push_back(t);
    trajectory.states.push_back(std::move(state));
  };
  try {
    record(0.0, LatticeQuantize(mu0, config.n));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSupportEscapesLattice) throw;
    throw Error(ErrorCode::kSupportEscapesLattice,
                std::string("initial measure at time index 0: ") + e.what());
  }
  for (int step = 0; step < config.steps; ++step) {
    const DiscreteMeasure& current = trajectory.states.back();
    try {
      DiscreteMeasure next = LatticeQuantize(
          LasStep(current, field(current), config.n, config.time_step()),
          config.n);
      record(static_cast<double>(step + 1) / config.n, std::move(next));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kSupportEscapesLattice) throw;
      throw Error(ErrorCode::kSupportEscapesLattice,
                  "at time index " + std::to_string(step + 1) + ": " + e.what());
    }
  }
  return trajectory;
}

Trajectory SolveLas(const ControlSystem& sys, const MeasureControl& mc,
                    const DiscreteMeasure& mu0, const LasConfig& config) {
  auto shared = std::make_shared<const ControlSystem>(sys);
  return SolveLas(FieldFromControl(std::move(shared), mc), mu0, config);
}

DiscreteMeasure StateAt(const Trajectory& trajectory,
                        const MeasureVectorField& field, double t) {
  const LasConfig& config = trajectory.config;
  if (t < 0.0 || t > config.horizon) {
    throw Error(ErrorCode::kInvalidArgument,
                "time " + std::to_string(t) + " outside the horizon");
  }
  const int64_t step = std::min<int64_t>(GridIndex(t, config.n), config.steps);
  const double offset = t - static_cast<double>(step) / config.n;
  const DiscreteMeasure& state = trajectory.states[step];
  if (offset <= 0.0 || step == config.steps) return state;
  return LasStep(state, field(state), config.n, std::min(offset, 1.0 / config.n));
}

double TimeModulusCheck(const Trajectory& trajectory) {
  const size_t count = trajectory.states.size();
  const double n = trajectory.config.n;
  double ratio = 0.0;
  for (size_t i = 0; i < count; ++i) {
    for (size_t j = i + 1; j < count; ++j) {
      const double w = WassersteinDistance(trajectory.states[i], trajectory.states[j]);
      ratio = std::max(ratio, w / (static_cast<double>(j - i) / n));
    }
  }
  return ratio;
}

double TimeModulusEnvelope(const Trajectory& trajectory,
                           const ControlSystem& sys) {
  const double c = SublinearConstant(sys);
  const double radius = trajectory.states.front().SupportRadius();
  const double horizon = trajectory.config.horizon;
  return c * std::exp(c * horizon) * (radius + 1.0) + 2.0 / trajectory.config.n;
}

double APrioriRadius(double initial_radius, double sublinear, double horizon) {
  return (1.0 + initial_radius) * std::exp(sublinear * horizon) - 1.0;
}

}  // namespace mdelab
