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

#include "mdelab/synthesis.h"

#include <algorithm>
#include <limits>
#include <string>
#include <utility>

#include "mdelab/error.h"

namespace mdelab {
namespace {

constexpr double kAssociationTolerance = 1e-9;

size_t Nearest(std::span<const Point> candidates, std::span<const double> target) {
  size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < candidates.size(); ++i) {
    const double d = Distance(candidates[i], target);
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

std::optional<size_t> VelocityNet::IndexOf(
    std::span<const double> velocity) const {
  const auto it = std::lower_bound(
      velocities.begin(), velocities.end(), velocity,
      [](const Point& a, std::span<const double> b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
      });
  if (it == velocities.end() ||
      !std::equal(it->begin(), it->end(), velocity.begin(), velocity.end())) {
    return std::nullopt;
  }
  return static_cast<size_t>(it - velocities.begin());
}

VelocityNet EpsilonNet(std::vector<Point> velocities, double eps) {
  if (velocities.empty()) {
    throw Error(ErrorCode::kEmptySet, "epsilon net of an empty velocity set");
  }
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be > 0");
  std::sort(velocities.begin(), velocities.end());
  velocities.erase(std::unique(velocities.begin(), velocities.end()),
                   velocities.end());
  const double radius = eps / 2.0;
  const size_t count = velocities.size();

  VelocityNet net;
  net.epsilon = eps;
  std::vector<size_t> center_index{0};
  std::vector<double> gap(count);
  for (size_t i = 0; i < count; ++i) gap[i] = Distance(velocities[i], velocities[0]);
  while (true) {
    size_t farthest = 0;
    for (size_t i = 1; i < count; ++i) {
      if (gap[i] > gap[farthest]) farthest = i;
    }
    if (gap[farthest] <= radius) break;
    center_index.push_back(farthest);
    for (size_t i = 0; i < count; ++i) {
      gap[i] = std::min(gap[i], Distance(velocities[i], velocities[farthest]));
    }
  }
  for (size_t c : center_index) net.centers.push_back(velocities[c]);
  net.cell.resize(count);
  for (size_t i = 0; i < count; ++i) net.cell[i] = Nearest(net.centers, velocities[i]);
  net.velocities = std::move(velocities);
  return net;
}

DiscreteMeasure QuantizeFiber(const VelocityNet& net,
                              const DiscreteMeasure& fiber) {
  std::vector<Atom> atoms;
  atoms.reserve(fiber.size());
  for (const Atom& a : fiber.atoms()) {
    const auto index = net.IndexOf(a.point);
    if (!index) {
      throw Error(ErrorCode::kUnknownVelocity,
                  "fiber charges a velocity outside the net's set");
    }
    atoms.push_back({net.centers[net.cell[*index]], a.weight});
  }
  return DiscreteMeasure::Create(std::move(atoms));
}

std::vector<DiscreteMeasure> SynthesizeFibers(const ControlSystem& sys,
                                              const MeasureVectorField& field,
                                              double eps,
                                              const StateBox& domain,
                                              const DiscreteMeasure& mu) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be > 0");
  const FiberedMeasure target = field(mu);
  std::vector<DiscreteMeasure> fibers;
  fibers.reserve(mu.size());
  for (size_t i = 0; i < mu.size(); ++i) {
    const Point& x = mu.atom(i).point;
    if (!domain.Contains(x)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "synthesis queried outside its domain box");
    }
    std::vector<Point> reachable = ReachableVelocities(sys, x);
    const VelocityNet net = EpsilonNet(reachable, eps);

    // Snap each target velocity onto F(x) (exact for associated fields), then
    // quantize on the net.
    std::vector<Atom> snapped;
    for (const Atom& v : target.fiber(i).atoms()) {
      const size_t nearest = Nearest(net.velocities, v.point);
      if (Distance(net.velocities[nearest], v.point) >
          kAssociationTolerance + eps / 2.0) {
        throw Error(ErrorCode::kNotAssociated,
                    "field '" + field.name() +
                        "' charges a velocity outside F(x)");
      }
      snapped.push_back({net.velocities[nearest], v.weight});
    }
    const DiscreteMeasure quantized =
        QuantizeFiber(net, DiscreteMeasure::Create(std::move(snapped)));

    std::vector<Atom> controls;
    for (const Atom& c : quantized.atoms()) {
      size_t best = 0;
      double best_distance = std::numeric_limits<double>::infinity();
      for (size_t u = 0; u < sys.controls().size(); ++u) {
        const double d = Distance(sys.Velocity(x, u), c.point);
        if (d < best_distance) {
          best_distance = d;
          best = u;
        }
      }
      controls.push_back({sys.control(best), c.weight});
    }
    fibers.push_back(DiscreteMeasure::Create(std::move(controls)));
  }
  return fibers;
}

MeasureControl SynthesizeControl(std::shared_ptr<const ControlSystem> sys,
                                 MeasureVectorField field, double eps,
                                 StateBox domain) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be > 0");
  std::string name = "synthesized[" + field.name() + "]";
  return MeasureControl(
      std::move(name), [sys = std::move(sys), field = std::move(field), eps,
                        domain = std::move(domain)](const DiscreteMeasure& mu) {
        return SynthesizeFibers(*sys, field, eps, domain, mu);
      });
}

}  // namespace mdelab
