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

#ifndef MDELAB_CONTROL_H_
#define MDELAB_CONTROL_H_

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mdelab/measures.h"
#include "mdelab/transport.h"

namespace mdelab {

enum class DynamicsFamily {
  kAffine,              // A x + B u + c
  kControlTranslation,  // u
  kDampedDrive,         // -x + u
  kBilinear,            // (A + u_1 D) x + b
};

std::string_view DynamicsFamilyName(DynamicsFamily family);
std::optional<DynamicsFamily> ParseDynamicsFamily(std::string_view name);

// Parametric right-hand side f(x, u). Unused coefficients stay empty.
struct Dynamics {
  DynamicsFamily family = DynamicsFamily::kControlTranslation;
  Eigen::MatrixXd a;  // affine, bilinear
  Eigen::MatrixXd b;  // affine
  Eigen::MatrixXd d;  // bilinear
  Eigen::VectorXd c;  // affine offset / bilinear drift b

  Point Evaluate(std::span<const double> x, std::span<const double> u) const;

  static Dynamics Translation() { return {}; }
  static Dynamics DampedDrive() {
    Dynamics f;
    f.family = DynamicsFamily::kDampedDrive;
    return f;
  }
  static Dynamics Affine(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::VectorXd c);
  static Dynamics Bilinear(Eigen::MatrixXd a, Eigen::MatrixXd d, Eigen::VectorXd drift);
};

struct StateBox {
  Point lo;
  Point hi;

  bool Contains(std::span<const double> x) const;
  // Largest norm attained on the box.
  double MaxNorm() const;
};

// f(x, u) over a finite control set U with metric d_U, a declared Lipschitz
// constant L_f (validated against the family's analytic constant on the state
// box) and a distinguished control u0.
class ControlSystem {
 public:
  static ControlSystem Create(int dim, Dynamics dynamics,
                              std::vector<Point> controls,
                              std::optional<GroundMetric> control_metric,
                              double lipschitz, size_t base_control,
                              StateBox box);

  int dim() const { return dim_; }
  int control_dim() const { return static_cast<int>(controls_.front().size()); }
  const Dynamics& dynamics() const { return dynamics_; }
  const std::vector<Point>& controls() const { return controls_; }
  const Point& control(size_t i) const { return controls_[i]; }
  const GroundMetric& control_metric() const { return metric_; }
  double lipschitz() const { return lipschitz_; }
  size_t base_control() const { return base_control_; }
  const StateBox& box() const { return box_; }

  Point Velocity(std::span<const double> x, size_t control_index) const;
  std::optional<size_t> FindControl(std::span<const double> u) const;
  double ControlDistance(size_t i, size_t j) const { return metric_.matrix()[i][j]; }
  double ControlDiameter() const { return metric_.Diameter(); }
  // Smallest L with ||f(x,u)-f(y,v)|| <= L (||x-y|| + d_U(u,v)) on the box
  // that the family's closed form certifies.
  double AnalyticLipschitz() const;
  // Index of the control nearest to `target` in the euclidean sense (ties to
  // the lowest index).
  size_t NearestControl(std::span<const double> target) const;

 private:
  ControlSystem(int dim, Dynamics dynamics, std::vector<Point> controls,
                GroundMetric metric, double lipschitz, size_t base_control,
                StateBox box)
      : dim_(dim), dynamics_(std::move(dynamics)), controls_(std::move(controls)),
        metric_(std::move(metric)), lipschitz_(lipschitz),
        base_control_(base_control), box_(std::move(box)) {}

  int dim_;
  Dynamics dynamics_;
  std::vector<Point> controls_;
  GroundMetric metric_;
  double lipschitz_;
  size_t base_control_;
  StateBox box_;
};

// mu -> u~[mu], a fibered measure over mu with control fibers. The base of the
// result is the input measure by construction.
class MeasureControl {
 public:
  using FiberRule = std::function<std::vector<DiscreteMeasure>(const DiscreteMeasure&)>;

  MeasureControl(std::string name, FiberRule rule)
      : name_(std::move(name)), rule_(std::move(rule)) {}

  const std::string& name() const { return name_; }
  FiberedMeasure operator()(const DiscreteMeasure& mu) const;

 private:
  std::string name_;
  FiberRule rule_;
};

// Every atom receives the same control measure.
MeasureControl ConstantFiberControl(const ControlSystem& sys,
                                    DiscreteMeasure fiber);
// Fiber at x is the Dirac at the control nearest to gain * x + offset.
MeasureControl FeedbackControl(const ControlSystem& sys, Eigen::MatrixXd gain,
                               Eigen::VectorXd offset);
// Fiber at x is lambda(x) first + (1 - lambda(x)) second with the logistic
// weight lambda(x) = 1 / (1 + exp(-sharpness (direction . x - threshold))).
MeasureControl StateMixedControl(const ControlSystem& sys,
                                 DiscreteMeasure first, DiscreteMeasure second,
                                 Point direction, double threshold,
                                 double sharpness);

// mu -> V[mu], a fibered measure over mu with velocity fibers.
class MeasureVectorField {
 public:
  using FiberRule = MeasureControl::FiberRule;

  MeasureVectorField(std::string name, FiberRule rule)
      : name_(std::move(name)), rule_(std::move(rule)) {}

  const std::string& name() const { return name_; }
  FiberedMeasure operator()(const DiscreteMeasure& mu) const;

 private:
  std::string name_;
  FiberRule rule_;
};

// V^u~[mu]: the control fibers of mc(mu) pushed through u -> f(x, u).
FiberedMeasure ControlToMvf(const ControlSystem& sys, const MeasureControl& mc,
                            const DiscreteMeasure& mu);
MeasureVectorField FieldFromControl(std::shared_ptr<const ControlSystem> sys,
                                    MeasureControl mc);
// Same velocity measure at every atom.
MeasureVectorField FixedVelocityField(DiscreteMeasure velocities);
// Fiber at x is the Dirac at the reachable velocity closest to
// (mean(mu) - x), ties to the lexicographically smallest.
MeasureVectorField MeanSeekingField(std::shared_ptr<const ControlSystem> sys);

// F(x) = { f(x, u) : u in U }, sorted, duplicates removed.
std::vector<Point> ReachableVelocities(const ControlSystem& sys,
                                       std::span<const double> x);

// max d_H(F(x), F(y)) / ||x - y|| over the sample pairs.
double HausdorffLipschitzCheck(
    const ControlSystem& sys,
    std::span<const std::pair<Point, Point>> samples);

// sum_i w_i f(x, u_i) for a relaxed control rc on U.
Point RelaxedVectorField(const ControlSystem& sys, std::span<const double> x,
                         const DiscreteMeasure& rc);

// max{L_f, L_f diam(U) + ||f(0, u0)||}.
double SublinearConstant(const ControlSystem& sys);

// max over pairs of W_{R^n x U}(u~[mu], u~[nu]) / W(mu, nu).
double WLipschitzEstimate(
    const MeasureControl& mc, const ControlSystem& sys,
    std::span<const std::pair<DiscreteMeasure, DiscreteMeasure>> pairs);

}  // namespace mdelab

#endif  // MDELAB_CONTROL_H_
