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

#ifndef MDELAB_TRANSPORT_H_
#define MDELAB_TRANSPORT_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdelab/measures.h"

namespace mdelab {

// Ground metric for transport problems.
//  - kEuclidean: ||x - y||.
//  - kControl: a validated distance matrix over a finite list of control
//    points; both arguments must be one of those points.
//  - kProductSum: on R^split x (fiber space), ||x1 - x2|| + d_fiber(u1, u2)
//    with d_fiber the nested control metric, or euclidean if absent.
class GroundMetric {
 public:
  enum class Kind { kEuclidean, kControl, kProductSum };

  static GroundMetric Euclidean();
  // Validates symmetry, zero diagonal, nonnegativity and the triangle
  // inequality. Labels are informational; empty means "u<i>".
  static GroundMetric Control(std::vector<Point> points,
                              std::vector<std::vector<double>> matrix,
                              std::vector<std::string> labels = {});
  // Matrix metric over points 0, 1, ..., k-1 (1-D), as loaded from a metric
  // document without an attached control system.
  static GroundMetric IndexedControl(std::vector<std::vector<double>> matrix,
                                     std::vector<std::string> labels = {});
  // Euclidean distances between the given control points, as a matrix metric.
  static GroundMetric EuclideanControl(std::vector<Point> points);
  static GroundMetric ProductSum(int split,
                                 std::optional<GroundMetric> fiber = {});

  Kind kind() const { return kind_; }
  double operator()(std::span<const double> a, std::span<const double> b) const;

  // Control metric accessors.
  const std::vector<Point>& points() const { return points_; }
  const std::vector<std::vector<double>>& matrix() const { return matrix_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<size_t> IndexOf(std::span<const double> point) const;
  double Diameter() const;

 private:
  GroundMetric() = default;

  Kind kind_ = Kind::kEuclidean;
  std::vector<Point> points_;
  std::vector<std::vector<double>> matrix_;
  std::vector<std::string> labels_;
  int split_ = 0;
  std::vector<GroundMetric> fiber_;  // zero or one nested metric
};

struct PlanEntry {
  size_t left = 0;   // atom index in the left marginal
  size_t right = 0;  // atom index in the right marginal
  double mass = 0.0;
};

// A coupling of two discrete measures with its ground cost.
struct TransportPlan {
  std::vector<PlanEntry> entries;  // nonzero cells only
  DiscreteMeasure left_marginal;
  DiscreteMeasure right_marginal;
  double cost = 0.0;

  // Joint measure on R^(2 dim) with atoms (x, y).
  DiscreteMeasure Joint() const;
};

struct WassersteinResult {
  double value = 0.0;
  TransportPlan plan;
};

// Order-1 Wasserstein distance by exact transport simplex.
WassersteinResult Wasserstein(const DiscreteMeasure& m1,
                              const DiscreteMeasure& m2,
                              const GroundMetric& metric = GroundMetric::Euclidean());
double WassersteinDistance(const DiscreteMeasure& m1, const DiscreteMeasure& m2);

// Kantorovich-Rubinstein dual value: max sum f d(m1 - m2) over potentials on
// the union of supports with |f(x) - f(y)| <= ||x - y||.
double DualWasserstein(const DiscreteMeasure& m1, const DiscreteMeasure& m2);

// Minimal secondary transport cost over joint plans whose base-pair marginal
// is an optimal plan between the bases. `secondary` acts on fiber
// coordinates. Two-stage: W* from the bases, then the secondary cost is
// minimized subject to base cost <= W* + 1e-9 (1 + W*).
double PseudoDistance(const FiberedMeasure& j1, const FiberedMeasure& j2,
                      const GroundMetric& secondary);

// Same objective without the optimality constraint on the base marginal.
double UnconstrainedSecondaryCost(const FiberedMeasure& j1,
                                  const FiberedMeasure& j2,
                                  const GroundMetric& secondary);

double Hausdorff(std::span<const Point> s1, std::span<const Point> s2);

}  // namespace mdelab

#endif  // MDELAB_TRANSPORT_H_
