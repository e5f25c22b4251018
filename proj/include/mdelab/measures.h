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

#ifndef MDELAB_MEASURES_H_
#define MDELAB_MEASURES_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mdelab {

using Point = std::vector<double>;

struct Atom {
  Point point;
  double weight = 0.0;

  bool operator==(const Atom&) const = default;
};

// Weights below this are dropped (and the remainder renormalized) whenever a
// measure is built.
inline constexpr double kPruneThreshold = 1e-15;
// make_measure accepts raw weight sums within this distance of 1.
inline constexpr double kMassTolerance = 1e-9;

// A finitely atomic probability measure on R^dim. Atoms are sorted
// lexicographically by coordinates and carry pairwise distinct points, so two
// measures are equal exactly when their atom lists are.
class DiscreteMeasure {
 public:
  // Validates, merges coincident points (bitwise coordinate equality), prunes
  // atoms below kPruneThreshold and renormalizes to unit mass.
  static DiscreteMeasure Create(std::vector<Atom> raw_atoms);
  static DiscreteMeasure Dirac(Point point);
  // Convex combination sum_k coefficients[k] * measures[k].
  static DiscreteMeasure Mixture(std::span<const DiscreteMeasure> measures,
                                 std::span<const double> coefficients);

  int dim() const { return dim_; }
  size_t size() const { return atoms_.size(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Atom& atom(size_t i) const { return atoms_[i]; }

  std::vector<Point> Support() const;
  double TotalMass() const;
  // max ||x|| over the support.
  double SupportRadius() const;

  bool operator==(const DiscreteMeasure&) const = default;

 private:
  DiscreteMeasure(int dim, std::vector<Atom> atoms)
      : dim_(dim), atoms_(std::move(atoms)) {}

  int dim_ = 0;
  std::vector<Atom> atoms_;
};

// A pointwise map R^input_dim -> R^output_dim.
struct PointMap {
  int input_dim = 0;
  int output_dim = 0;
  std::function<Point(std::span<const double>)> apply;

  static PointMap Identity(int dim);
  // x -> matrix * x + offset, matrix given row-major with output_dim rows.
  static PointMap Affine(int input_dim, int output_dim,
                         std::vector<double> matrix, Point offset);
};

DiscreteMeasure Pushforward(const DiscreteMeasure& measure,
                            const PointMap& map);

enum class FiberKind { kControl, kVelocity };

std::string_view FiberKindName(FiberKind kind);

// A base measure together with one conditional measure per base atom; the
// atomic form of a disintegration mu (x)_x nu_x.
class FiberedMeasure {
 public:
  static FiberedMeasure Create(DiscreteMeasure base,
                               std::vector<DiscreteMeasure> fibers,
                               FiberKind kind);

  const DiscreteMeasure& base() const { return base_; }
  const std::vector<DiscreteMeasure>& fibers() const { return fibers_; }
  const DiscreteMeasure& fiber(size_t i) const { return fibers_[i]; }
  FiberKind kind() const { return kind_; }
  int fiber_dim() const { return fibers_.front().dim(); }

  // Joint measure on R^(base_dim + fiber_dim) with weights w_base * w_fiber.
  DiscreteMeasure Flatten() const;

  bool operator==(const FiberedMeasure&) const = default;

 private:
  FiberedMeasure(DiscreteMeasure base, std::vector<DiscreteMeasure> fibers,
                 FiberKind kind)
      : base_(std::move(base)), fibers_(std::move(fibers)), kind_(kind) {}

  DiscreteMeasure base_;
  std::vector<DiscreteMeasure> fibers_;
  FiberKind kind_;
};

FiberedMeasure FiberProduct(DiscreteMeasure base,
                            std::vector<DiscreteMeasure> fibers,
                            FiberKind kind = FiberKind::kVelocity);

// Splits a joint measure on R^dim into its marginal on the first split_dim
// coordinates and the conditional measures on the remaining ones.
FiberedMeasure Disintegrate(const DiscreteMeasure& joint, int split_dim,
                            FiberKind kind = FiberKind::kVelocity);

double Norm(std::span<const double> x);
double Distance(std::span<const double> x, std::span<const double> y);

}  // namespace mdelab

#endif  // MDELAB_MEASURES_H_
