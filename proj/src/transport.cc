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

#include "mdelab/transport.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "mdelab/error.h"
#include "mdelab/lp.h"

namespace mdelab {
namespace {

constexpr double kMetricTolerance = 1e-12;

void ValidateMatrix(const std::vector<std::vector<double>>& d) {
  const size_t k = d.size();
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "empty control metric");
  for (const auto& row : d) {
    if (row.size() != k) {
      throw Error(ErrorCode::kInvalidArgument, "control metric is not square");
    }
  }
  for (size_t i = 0; i < k; ++i) {
    if (d[i][i] != 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "control metric diagonal entry " + std::to_string(i) +
                      " is nonzero");
    }
    for (size_t j = 0; j < k; ++j) {
      if (!(d[i][j] >= 0.0) || !std::isfinite(d[i][j])) {
        throw Error(ErrorCode::kInvalidArgument,
                    "control metric has a negative or non-finite entry");
      }
      if (std::abs(d[i][j] - d[j][i]) > kMetricTolerance) {
        throw Error(ErrorCode::kInvalidArgument,
                    "control metric is not symmetric at (" + std::to_string(i) +
                        ", " + std::to_string(j) + ")");
      }
      if (i != j && d[i][j] == 0.0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "distinct controls at distance zero");
      }
    }
  }
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < k; ++j) {
      for (size_t l = 0; l < k; ++l) {
        if (d[i][l] > d[i][j] + d[j][l] + kMetricTolerance) {
          throw Error(ErrorCode::kInvalidArgument,
                      "control metric violates the triangle inequality at (" +
                          std::to_string(i) + ", " + std::to_string(j) + ", " +
                          std::to_string(l) + ")");
        }
      }
    }
  }
}

// One atom of a flattened fibered measure.
struct FlatAtom {
  size_t base = 0;
  const Point* fiber_point = nullptr;
  double weight = 0.0;
};

std::vector<FlatAtom> FlatAtoms(const FiberedMeasure& j) {
  std::vector<FlatAtom> atoms;
  for (size_t i = 0; i < j.base().size(); ++i) {
    for (const Atom& a : j.fiber(i).atoms()) {
      atoms.push_back({i, &a.point, j.base().atom(i).weight * a.weight});
    }
  }
  return atoms;
}

void CheckComparable(const FiberedMeasure& j1, const FiberedMeasure& j2) {
  if (j1.kind() != j2.kind()) {
    throw Error(ErrorCode::kFiberKindMismatch,
                std::string(FiberKindName(j1.kind())) + " vs " +
                    std::string(FiberKindName(j2.kind())));
  }
  if (j1.base().dim() != j2.base().dim() || j1.fiber_dim() != j2.fiber_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "fibered measure dimensions");
  }
}

}  // namespace

GroundMetric GroundMetric::Euclidean() { return GroundMetric(); }

GroundMetric GroundMetric::Control(std::vector<Point> points,
                                   std::vector<std::vector<double>> matrix,
                                   std::vector<std::string> labels) {
  ValidateMatrix(matrix);
  if (points.size() != matrix.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "control metric has " + std::to_string(matrix.size()) +
                    " rows for " + std::to_string(points.size()) + " controls");
  }
  for (size_t i = 0; i < points.size(); ++i) {
    for (size_t j = 0; j < i; ++j) {
      if (points[i] == points[j]) {
        throw Error(ErrorCode::kInvalidArgument, "duplicate control point");
      }
    }
  }
  if (labels.empty()) {
    for (size_t i = 0; i < points.size(); ++i) {
      labels.push_back("u" + std::to_string(i));
    }
  } else if (labels.size() != points.size()) {
    throw Error(ErrorCode::kInvalidArgument, "label count mismatch");
  }
  GroundMetric g;
  g.kind_ = Kind::kControl;
  g.points_ = std::move(points);
  g.matrix_ = std::move(matrix);
  g.labels_ = std::move(labels);
  return g;
}

GroundMetric GroundMetric::IndexedControl(
    std::vector<std::vector<double>> matrix, std::vector<std::string> labels) {
  std::vector<Point> points;
  for (size_t i = 0; i < matrix.size(); ++i) {
    points.push_back({static_cast<double>(i)});
  }
  return Control(std::move(points), std::move(matrix), std::move(labels));
}

GroundMetric GroundMetric::EuclideanControl(std::vector<Point> points) {
  std::vector<std::vector<double>> matrix(points.size(),
                                          std::vector<double>(points.size()));
  for (size_t i = 0; i < points.size(); ++i) {
    for (size_t j = 0; j < points.size(); ++j) {
      matrix[i][j] = i == j ? 0.0 : Distance(points[i], points[j]);
    }
  }
  return Control(std::move(points), std::move(matrix));
}

GroundMetric GroundMetric::ProductSum(int split,
                                      std::optional<GroundMetric> fiber) {
  if (split <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "product metric split must be > 0");
  }
  GroundMetric g;
  g.kind_ = Kind::kProductSum;
  g.split_ = split;
  if (fiber) g.fiber_.push_back(std::move(*fiber));
  return g;
}

std::optional<size_t> GroundMetric::IndexOf(
    std::span<const double> point) const {
  for (size_t i = 0; i < points_.size(); ++i) {
    if (std::equal(points_[i].begin(), points_[i].end(), point.begin(),
                   point.end())) {
      return i;
    }
  }
  return std::nullopt;
}

double GroundMetric::Diameter() const {
  double diameter = 0.0;
  for (const auto& row : matrix_) {
    for (double d : row) diameter = std::max(diameter, d);
  }
  return diameter;
}

double GroundMetric::operator()(std::span<const double> a,
                                std::span<const double> b) const {
  switch (kind_) {
    case Kind::kEuclidean:
      if (a.size() != b.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "metric arguments");
      }
      return Distance(a, b);
    case Kind::kControl: {
      const auto i = IndexOf(a);
      const auto j = IndexOf(b);
      if (!i || !j) {
        throw Error(ErrorCode::kUnknownControlPoint,
                    "point is not in the control set");
      }
      return matrix_[*i][*j];
    }
    case Kind::kProductSum: {
      if (a.size() != b.size() || a.size() <= static_cast<size_t>(split_)) {
        throw Error(ErrorCode::kDimensionMismatch, "product metric arguments");
      }
      const double state = Distance(a.first(split_), b.first(split_));
      const auto fa = a.subspan(split_);
      const auto fb = b.subspan(split_);
      return state + (fiber_.empty() ? Distance(fa, fb) : fiber_[0](fa, fb));
    }
  }
  return 0.0;
}

DiscreteMeasure TransportPlan::Joint() const {
  std::vector<Atom> atoms;
  for (const PlanEntry& e : entries) {
    Point p = left_marginal.atom(e.left).point;
    const Point& q = right_marginal.atom(e.right).point;
    p.insert(p.end(), q.begin(), q.end());
    atoms.push_back({std::move(p), e.mass});
  }
  return DiscreteMeasure::Create(std::move(atoms));
}

WassersteinResult Wasserstein(const DiscreteMeasure& m1,
                              const DiscreteMeasure& m2,
                              const GroundMetric& metric) {
  if (m1.dim() != m2.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "Wasserstein between dimensions " + std::to_string(m1.dim()) +
                    " and " + std::to_string(m2.dim()));
  }
  const size_t m = m1.size(), n = m2.size();
  std::vector<double> supply(m), demand(n), cost(m * n);
  for (size_t i = 0; i < m; ++i) supply[i] = m1.atom(i).weight;
  for (size_t j = 0; j < n; ++j) demand[j] = m2.atom(j).weight;
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < n; ++j) {
      cost[i * n + j] = metric(m1.atom(i).point, m2.atom(j).point);
    }
  }
  TransportSolution solution = SolveTransport(supply, demand, cost);
  TransportPlan plan{{}, m1, m2, solution.cost};
  for (size_t c = 0; c < m * n; ++c) {
    if (solution.flow[c] > 0.0) {
      plan.entries.push_back({c / n, c % n, solution.flow[c]});
    }
  }
  return {solution.cost, std::move(plan)};
}

double WassersteinDistance(const DiscreteMeasure& m1,
                           const DiscreteMeasure& m2) {
  return Wasserstein(m1, m2).value;
}

double DualWasserstein(const DiscreteMeasure& m1, const DiscreteMeasure& m2) {
  if (m1.dim() != m2.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "dual Wasserstein dimensions");
  }
  // Union of supports with signed mass m1 - m2.
  std::vector<Atom> signed_atoms;
  for (const Atom& a : m1.atoms()) signed_atoms.push_back(a);
  for (const Atom& a : m2.atoms()) signed_atoms.push_back({a.point, -a.weight});
  std::stable_sort(signed_atoms.begin(), signed_atoms.end(),
                   [](const Atom& a, const Atom& b) { return a.point < b.point; });
  std::vector<Atom> points;
  for (Atom& a : signed_atoms) {
    if (!points.empty() && points.back().point == a.point) {
      points.back().weight += a.weight;
    } else {
      points.push_back(std::move(a));
    }
  }
  const size_t k = points.size();
  if (k == 1) return 0.0;
  // Fix f(z0) = 0 and substitute g(z) = f(z) + d(z, z0) >= 0 for z != z0, so
  // every constraint g(x) - g(y) <= d(x,y) + d(x,z0) - d(y,z0) has a
  // nonnegative right-hand side.
  const Point& z0 = points[0].point;
  std::vector<double> anchor(k);
  for (size_t i = 0; i < k; ++i) anchor[i] = Distance(points[i].point, z0);
  const size_t vars = k - 1;
  LinearProgram lp;
  lp.objective.resize(vars);
  double offset = 0.0;
  for (size_t i = 1; i < k; ++i) {
    lp.objective[i - 1] = -points[i].weight;  // maximize sum c_z g_z
    offset -= points[i].weight * anchor[i];
  }
  for (size_t x = 0; x < k; ++x) {
    for (size_t y = 0; y < k; ++y) {
      if (x == y) continue;
      std::vector<double> row(vars, 0.0);
      if (x > 0) row[x - 1] += 1.0;
      if (y > 0) row[y - 1] -= 1.0;
      const double bound =
          Distance(points[x].point, points[y].point) + anchor[x] - anchor[y];
      lp.AddRow(std::move(row), RowSense::kLessEqual, std::max(0.0, bound));
    }
  }
  const LpSolution solution = SolveLinearProgram(lp);
  return -solution.objective + offset;
}

double PseudoDistance(const FiberedMeasure& j1, const FiberedMeasure& j2,
                      const GroundMetric& secondary) {
  CheckComparable(j1, j2);
  const double base_optimum = Wasserstein(j1.base(), j2.base()).value;
  const double slack = 1e-9 * (1.0 + base_optimum);

  const std::vector<FlatAtom> left = FlatAtoms(j1);
  const std::vector<FlatAtom> right = FlatAtoms(j2);
  const size_t p = left.size(), q = right.size();
  LinearProgram lp;
  lp.objective.resize(p * q);
  std::vector<double> base_cost(p * q);
  for (size_t a = 0; a < p; ++a) {
    for (size_t b = 0; b < q; ++b) {
      lp.objective[a * q + b] = secondary(*left[a].fiber_point, *right[b].fiber_point);
      base_cost[a * q + b] = Distance(j1.base().atom(left[a].base).point,
                                      j2.base().atom(right[b].base).point);
    }
  }
  for (size_t a = 0; a < p; ++a) {
    std::vector<double> row(p * q, 0.0);
    for (size_t b = 0; b < q; ++b) row[a * q + b] = 1.0;
    lp.AddRow(std::move(row), RowSense::kEqual, left[a].weight);
  }
  // The last column constraint is implied by the others.
  for (size_t b = 0; b + 1 < q; ++b) {
    std::vector<double> row(p * q, 0.0);
    for (size_t a = 0; a < p; ++a) row[a * q + b] = 1.0;
    lp.AddRow(std::move(row), RowSense::kEqual, right[b].weight);
  }
  lp.AddRow(std::move(base_cost), RowSense::kLessEqual, base_optimum + slack);
  return std::max(0.0, SolveLinearProgram(lp).objective);
}

double UnconstrainedSecondaryCost(const FiberedMeasure& j1,
                                  const FiberedMeasure& j2,
                                  const GroundMetric& secondary) {
  CheckComparable(j1, j2);
  const std::vector<FlatAtom> left = FlatAtoms(j1);
  const std::vector<FlatAtom> right = FlatAtoms(j2);
  std::vector<double> supply, demand, cost;
  for (const FlatAtom& a : left) supply.push_back(a.weight);
  for (const FlatAtom& b : right) demand.push_back(b.weight);
  for (const FlatAtom& a : left) {
    for (const FlatAtom& b : right) {
      cost.push_back(secondary(*a.fiber_point, *b.fiber_point));
    }
  }
  return SolveTransport(supply, demand, cost).cost;
}

double Hausdorff(std::span<const Point> s1, std::span<const Point> s2) {
  if (s1.empty() || s2.empty()) {
    throw Error(ErrorCode::kEmptySet, "Hausdorff distance of an empty set");
  }
  auto directed = [](std::span<const Point> from, std::span<const Point> to) {
    double sup = 0.0;
    for (const Point& x : from) {
      double inf = std::numeric_limits<double>::infinity();
      for (const Point& y : to) {
        if (x.size() != y.size()) {
          throw Error(ErrorCode::kDimensionMismatch, "Hausdorff point sets");
        }
        inf = std::min(inf, Distance(x, y));
      }
      sup = std::max(sup, inf);
    }
    return sup;
  };
  return std::max(directed(s1, s2), directed(s2, s1));
}

}  // namespace mdelab
