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

#include "mdelab/measures.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "mdelab/error.h"

namespace mdelab {
namespace {

// Sorts, merges equal points and prunes. Weights must already be validated.
std::vector<Atom> Canonicalize(std::vector<Atom> atoms) {
  for (Atom& a : atoms) {
    for (double& c : a.point) c += 0.0;  // -0.0 -> +0.0
  }
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& a, const Atom& b) { return a.point < b.point; });
  std::vector<Atom> merged;
  merged.reserve(atoms.size());
  for (Atom& a : atoms) {
    if (!merged.empty() && merged.back().point == a.point) {
      merged.back().weight += a.weight;
    } else {
      merged.push_back(std::move(a));
    }
  }
  const size_t before = merged.size();
  std::erase_if(merged, [](const Atom& a) { return a.weight < kPruneThreshold; });
  const bool pruned = merged.size() < before;
  double total = 0.0;
  for (const Atom& a : merged) total += a.weight;
  if (merged.empty() || total <= 0.0) {
    throw Error(ErrorCode::kEmptyMeasure, "no atoms left after pruning");
  }
  // Weights already summing to 1 up to rounding are kept bit-for-bit, so
  // canonicalization is idempotent and serialized measures reload exactly.
  const double rounding = 4.0 * std::numeric_limits<double>::epsilon() *
                          static_cast<double>(merged.size());
  if (pruned || std::abs(total - 1.0) > rounding) {
    for (Atom& a : merged) a.weight /= total;
  }
  return merged;
}

}  // namespace

DiscreteMeasure DiscreteMeasure::Create(std::vector<Atom> raw_atoms) {
  if (raw_atoms.empty()) {
    throw Error(ErrorCode::kEmptyMeasure, "measure has no atoms");
  }
  const size_t dim = raw_atoms.front().point.size();
  if (dim == 0) {
    throw Error(ErrorCode::kInvalidArgument, "atoms must have dimension >= 1");
  }
  double total = 0.0;
  for (const Atom& a : raw_atoms) {
    if (a.point.size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "atoms of dimension " + std::to_string(a.point.size()) +
                      " and " + std::to_string(dim));
    }
    for (double c : a.point) {
      if (!std::isfinite(c)) {
        throw Error(ErrorCode::kInvalidArgument, "non-finite atom coordinate");
      }
    }
    if (!(a.weight >= 0.0)) {
      throw Error(ErrorCode::kNegativeWeight,
                  "weight " + std::to_string(a.weight));
    }
    total += a.weight;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw Error(ErrorCode::kMassMismatch,
                "weights sum to " + std::to_string(total));
  }
  return DiscreteMeasure(static_cast<int>(dim),
                         Canonicalize(std::move(raw_atoms)));
}

DiscreteMeasure DiscreteMeasure::Dirac(Point point) {
  return Create({Atom{std::move(point), 1.0}});
}

DiscreteMeasure DiscreteMeasure::Mixture(
    std::span<const DiscreteMeasure> measures,
    std::span<const double> coefficients) {
  if (measures.size() != coefficients.size() || measures.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "mixture needs one coefficient per measure");
  }
  std::vector<Atom> atoms;
  for (size_t k = 0; k < measures.size(); ++k) {
    if (coefficients[k] < 0.0) {
      throw Error(ErrorCode::kNegativeWeight, "negative mixture coefficient");
    }
    for (const Atom& a : measures[k].atoms()) {
      atoms.push_back({a.point, coefficients[k] * a.weight});
    }
  }
  return Create(std::move(atoms));
}

std::vector<Point> DiscreteMeasure::Support() const {
  std::vector<Point> support;
  support.reserve(atoms_.size());
  for (const Atom& a : atoms_) support.push_back(a.point);
  return support;
}

double DiscreteMeasure::TotalMass() const {
  double total = 0.0;
  for (const Atom& a : atoms_) total += a.weight;
  return total;
}

double DiscreteMeasure::SupportRadius() const {
  double radius = 0.0;
  for (const Atom& a : atoms_) radius = std::max(radius, Norm(a.point));
  return radius;
}

PointMap PointMap::Identity(int dim) {
  return {dim, dim, [](std::span<const double> x) {
            return Point(x.begin(), x.end());
          }};
}

PointMap PointMap::Affine(int input_dim, int output_dim,
                          std::vector<double> matrix, Point offset) {
  if (matrix.size() != static_cast<size_t>(input_dim * output_dim) ||
      offset.size() != static_cast<size_t>(output_dim)) {
    throw Error(ErrorCode::kDimensionMismatch, "affine map shape");
  }
  return {input_dim, output_dim,
          [input_dim, output_dim, matrix = std::move(matrix),
           offset = std::move(offset)](std::span<const double> x) {
            Point y = offset;
            for (int r = 0; r < output_dim; ++r) {
              for (int c = 0; c < input_dim; ++c) {
                y[r] += matrix[r * input_dim + c] * x[c];
              }
            }
            return y;
          }};
}

DiscreteMeasure Pushforward(const DiscreteMeasure& measure,
                            const PointMap& map) {
  if (map.input_dim != measure.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "map expects dimension " + std::to_string(map.input_dim) +
                    ", measure has " + std::to_string(measure.dim()));
  }
  std::vector<Atom> atoms;
  atoms.reserve(measure.size());
  for (const Atom& a : measure.atoms()) {
    Point image = map.apply(a.point);
    if (image.size() != static_cast<size_t>(map.output_dim)) {
      throw Error(ErrorCode::kDimensionMismatch, "map output dimension");
    }
    atoms.push_back({std::move(image), a.weight});
  }
  return DiscreteMeasure::Create(std::move(atoms));
}

std::string_view FiberKindName(FiberKind kind) {
  return kind == FiberKind::kControl ? "control" : "velocity";
}

FiberedMeasure FiberedMeasure::Create(DiscreteMeasure base,
                                      std::vector<DiscreteMeasure> fibers,
                                      FiberKind kind) {
  if (fibers.size() != base.size()) {
    throw Error(ErrorCode::kFiberCountMismatch,
                std::to_string(fibers.size()) + " fibers for " +
                    std::to_string(base.size()) + " base atoms");
  }
  for (const DiscreteMeasure& f : fibers) {
    if (f.dim() != fibers.front().dim()) {
      throw Error(ErrorCode::kDimensionMismatch, "fibers of mixed dimension");
    }
  }
  return FiberedMeasure(std::move(base), std::move(fibers), kind);
}

DiscreteMeasure FiberedMeasure::Flatten() const {
  std::vector<Atom> atoms;
  for (size_t i = 0; i < base_.size(); ++i) {
    const Atom& b = base_.atom(i);
    for (const Atom& f : fibers_[i].atoms()) {
      Point p = b.point;
      p.insert(p.end(), f.point.begin(), f.point.end());
      atoms.push_back({std::move(p), b.weight * f.weight});
    }
  }
  return DiscreteMeasure::Create(std::move(atoms));
}

FiberedMeasure FiberProduct(DiscreteMeasure base,
                            std::vector<DiscreteMeasure> fibers,
                            FiberKind kind) {
  return FiberedMeasure::Create(std::move(base), std::move(fibers), kind);
}

FiberedMeasure Disintegrate(const DiscreteMeasure& joint, int split_dim,
                            FiberKind kind) {
  if (split_dim <= 0 || split_dim >= joint.dim()) {
    throw Error(ErrorCode::kInvalidArgument,
                "split dimension " + std::to_string(split_dim) +
                    " outside (0, " + std::to_string(joint.dim()) + ")");
  }
  // Atoms are sorted lexicographically, so atoms sharing a base point are
  // contiguous.
  std::vector<Atom> base_atoms;
  std::vector<std::vector<Atom>> fiber_atoms;
  for (const Atom& a : joint.atoms()) {
    Point x(a.point.begin(), a.point.begin() + split_dim);
    Point y(a.point.begin() + split_dim, a.point.end());
    if (base_atoms.empty() || base_atoms.back().point != x) {
      base_atoms.push_back({std::move(x), 0.0});
      fiber_atoms.emplace_back();
    }
    base_atoms.back().weight += a.weight;
    fiber_atoms.back().push_back({std::move(y), a.weight});
  }
  std::vector<DiscreteMeasure> fibers;
  fibers.reserve(fiber_atoms.size());
  for (size_t i = 0; i < fiber_atoms.size(); ++i) {
    for (Atom& a : fiber_atoms[i]) a.weight /= base_atoms[i].weight;
    fibers.push_back(DiscreteMeasure::Create(std::move(fiber_atoms[i])));
  }
  return FiberedMeasure::Create(DiscreteMeasure::Create(std::move(base_atoms)),
                                std::move(fibers), kind);
}

double Norm(std::span<const double> x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return std::sqrt(s);
}

double Distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace mdelab
