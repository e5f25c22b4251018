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

#include "mdelab/control.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "mdelab/error.h"

namespace mdelab {
namespace {

Eigen::Map<const Eigen::VectorXd> AsVector(std::span<const double> x) {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

Point ToPoint(const Eigen::VectorXd& v) { return Point(v.data(), v.data() + v.size()); }

double SpectralNorm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

void RequireShape(const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols,
                  const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + " must be " + std::to_string(rows) + "x" +
                    std::to_string(cols));
  }
}

}  // namespace

std::string_view DynamicsFamilyName(DynamicsFamily family) {
  switch (family) {
    case DynamicsFamily::kAffine: return "affine";
    case DynamicsFamily::kControlTranslation: return "control-translation";
    case DynamicsFamily::kDampedDrive: return "damped-drive";
    case DynamicsFamily::kBilinear: return "bilinear";
  }
  return "unknown";
}

std::optional<DynamicsFamily> ParseDynamicsFamily(std::string_view name) {
  for (DynamicsFamily f :
       {DynamicsFamily::kAffine, DynamicsFamily::kControlTranslation,
        DynamicsFamily::kDampedDrive, DynamicsFamily::kBilinear}) {
    if (DynamicsFamilyName(f) == name) return f;
  }
  return std::nullopt;
}

Dynamics Dynamics::Affine(Eigen::MatrixXd a, Eigen::MatrixXd b,
                          Eigen::VectorXd c) {
  Dynamics f;
  f.family = DynamicsFamily::kAffine;
  f.a = std::move(a);
  f.b = std::move(b);
  f.c = std::move(c);
  return f;
}

Dynamics Dynamics::Bilinear(Eigen::MatrixXd a, Eigen::MatrixXd d,
                            Eigen::VectorXd drift) {
  Dynamics f;
  f.family = DynamicsFamily::kBilinear;
  f.a = std::move(a);
  f.d = std::move(d);
  f.c = std::move(drift);
  return f;
}

Point Dynamics::Evaluate(std::span<const double> x,
                         std::span<const double> u) const {
  switch (family) {
    case DynamicsFamily::kControlTranslation:
      return Point(u.begin(), u.end());
    case DynamicsFamily::kDampedDrive: {
      Point v(x.size());
      for (size_t i = 0; i < x.size(); ++i) v[i] = u[i] - x[i];
      return v;
    }
    case DynamicsFamily::kAffine:
      return ToPoint(a * AsVector(x) + b * AsVector(u) + c);
    case DynamicsFamily::kBilinear:
      return ToPoint((a + u[0] * d) * AsVector(x) + c);
  }
  return {};
}

bool StateBox::Contains(std::span<const double> x) const {
  if (x.size() != lo.size()) return false;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  }
  return true;
}

double StateBox::MaxNorm() const {
  double s = 0.0;
  for (size_t i = 0; i < lo.size(); ++i) {
    const double m = std::max(std::abs(lo[i]), std::abs(hi[i]));
    s += m * m;
  }
  return std::sqrt(s);
}

ControlSystem ControlSystem::Create(int dim, Dynamics dynamics,
                                    std::vector<Point> controls,
                                    std::optional<GroundMetric> control_metric,
                                    double lipschitz, size_t base_control,
                                    StateBox box) {
  if (dim <= 0) throw Error(ErrorCode::kInvalidArgument, "dim must be >= 1");
  if (controls.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "control set is empty");
  }
  const Eigen::Index m = static_cast<Eigen::Index>(controls.front().size());
  for (const Point& u : controls) {
    if (static_cast<Eigen::Index>(u.size()) != m || m == 0) {
      throw Error(ErrorCode::kDimensionMismatch, "controls of mixed dimension");
    }
  }
  switch (dynamics.family) {
    case DynamicsFamily::kControlTranslation:
    case DynamicsFamily::kDampedDrive:
      if (m != dim) {
        throw Error(ErrorCode::kDimensionMismatch,
                    std::string(DynamicsFamilyName(dynamics.family)) +
                        " needs controls of the state dimension");
      }
      break;
    case DynamicsFamily::kAffine:
      RequireShape(dynamics.a, dim, dim, "A");
      RequireShape(dynamics.b, dim, m, "B");
      RequireShape(dynamics.c, dim, 1, "c");
      break;
    case DynamicsFamily::kBilinear:
      RequireShape(dynamics.a, dim, dim, "A");
      RequireShape(dynamics.d, dim, dim, "D");
      RequireShape(dynamics.c, dim, 1, "b");
      break;
  }
  GroundMetric metric =
      control_metric && control_metric->kind() == GroundMetric::Kind::kControl
          ? GroundMetric::Control(controls, control_metric->matrix(),
                                  control_metric->labels())
          : GroundMetric::EuclideanControl(controls);
  if (base_control >= controls.size()) {
    throw Error(ErrorCode::kInvalidArgument, "u0 index out of range");
  }
  if (box.lo.size() != static_cast<size_t>(dim) || box.hi.size() != box.lo.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "state box dimension");
  }
  for (int i = 0; i < dim; ++i) {
    if (!(box.lo[i] <= box.hi[i])) {
      throw Error(ErrorCode::kInvalidArgument, "state box has lo > hi");
    }
  }
  ControlSystem sys(dim, std::move(dynamics), std::move(controls),
                    std::move(metric), lipschitz, base_control, std::move(box));
  const double analytic = sys.AnalyticLipschitz();
  if (!(lipschitz > 0.0) || lipschitz < analytic - 1e-12) {
    throw Error(ErrorCode::kInvalidArgument,
                "declared L_f = " + std::to_string(lipschitz) +
                    " is below the analytic constant " + std::to_string(analytic));
  }
  return sys;
}

Point ControlSystem::Velocity(std::span<const double> x,
                              size_t control_index) const {
  if (x.size() != static_cast<size_t>(dim_)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "state of dimension " + std::to_string(x.size()));
  }
  return dynamics_.Evaluate(x, controls_.at(control_index));
}

std::optional<size_t> ControlSystem::FindControl(
    std::span<const double> u) const {
  return metric_.IndexOf(u);
}

size_t ControlSystem::NearestControl(std::span<const double> target) const {
  size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < controls_.size(); ++i) {
    const double d = Distance(controls_[i], target);
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  return best;
}

double ControlSystem::AnalyticLipschitz() const {
  double state_part = 0.0;
  switch (dynamics_.family) {
    case DynamicsFamily::kControlTranslation: state_part = 0.0; break;
    case DynamicsFamily::kDampedDrive: state_part = 1.0; break;
    case DynamicsFamily::kAffine: state_part = SpectralNorm(dynamics_.a); break;
    case DynamicsFamily::kBilinear:
      for (const Point& u : controls_) {
        state_part = std::max(state_part,
                              SpectralNorm(dynamics_.a + u[0] * dynamics_.d));
      }
      break;
  }
  // Control part: exact over the finite set of control pairs.
  const double box_norm = box_.MaxNorm();
  const double d_norm = SpectralNorm(dynamics_.d);
  double control_part = 0.0;
  for (size_t i = 0; i < controls_.size(); ++i) {
    for (size_t j = i + 1; j < controls_.size(); ++j) {
      const Point& ui = controls_[i];
      const Point& uj = controls_[j];
      double change = 0.0;
      switch (dynamics_.family) {
        case DynamicsFamily::kControlTranslation:
        case DynamicsFamily::kDampedDrive:
          change = Distance(ui, uj);
          break;
        case DynamicsFamily::kAffine:
          change = (dynamics_.b * (AsVector(ui) - AsVector(uj))).norm();
          break;
        case DynamicsFamily::kBilinear:
          change = std::abs(ui[0] - uj[0]) * d_norm * box_norm;
          break;
      }
      control_part = std::max(control_part, change / ControlDistance(i, j));
    }
  }
  return std::max(state_part, control_part);
}

FiberedMeasure MeasureControl::operator()(const DiscreteMeasure& mu) const {
  return FiberedMeasure::Create(mu, rule_(mu), FiberKind::kControl);
}

FiberedMeasure MeasureVectorField::operator()(const DiscreteMeasure& mu) const {
  return FiberedMeasure::Create(mu, rule_(mu), FiberKind::kVelocity);
}

namespace {

void RequireControls(const ControlSystem& sys, const DiscreteMeasure& m) {
  for (const Atom& a : m.atoms()) {
    if (!sys.FindControl(a.point)) {
      throw Error(ErrorCode::kUnknownControlPoint,
                  "relaxed control charges a point outside U");
    }
  }
}

}  // namespace

MeasureControl ConstantFiberControl(const ControlSystem& sys,
                                    DiscreteMeasure fiber) {
  RequireControls(sys, fiber);
  return MeasureControl("constant-fiber", [fiber = std::move(fiber)](
                                              const DiscreteMeasure& mu) {
    return std::vector<DiscreteMeasure>(mu.size(), fiber);
  });
}

MeasureControl FeedbackControl(const ControlSystem& sys, Eigen::MatrixXd gain,
                               Eigen::VectorXd offset) {
  RequireShape(gain, sys.control_dim(), sys.dim(), "feedback gain");
  RequireShape(offset, sys.control_dim(), 1, "feedback offset");
  return MeasureControl(
      "feedback", [sys, gain = std::move(gain),
                   offset = std::move(offset)](const DiscreteMeasure& mu) {
        std::vector<DiscreteMeasure> fibers;
        fibers.reserve(mu.size());
        for (const Atom& a : mu.atoms()) {
          const Eigen::VectorXd target = gain * AsVector(a.point) + offset;
          fibers.push_back(DiscreteMeasure::Dirac(
              sys.control(sys.NearestControl(ToPoint(target)))));
        }
        return fibers;
      });
}

MeasureControl StateMixedControl(const ControlSystem& sys,
                                 DiscreteMeasure first, DiscreteMeasure second,
                                 Point direction, double threshold,
                                 double sharpness) {
  RequireControls(sys, first);
  RequireControls(sys, second);
  if (direction.size() != static_cast<size_t>(sys.dim())) {
    throw Error(ErrorCode::kDimensionMismatch, "mixing direction");
  }
  return MeasureControl(
      "state-mixed",
      [pair = std::vector<DiscreteMeasure>{std::move(first), std::move(second)},
       direction = std::move(direction), threshold,
       sharpness](const DiscreteMeasure& mu) {
        std::vector<DiscreteMeasure> fibers;
        fibers.reserve(mu.size());
        for (const Atom& a : mu.atoms()) {
          double s = -threshold;
          for (size_t i = 0; i < direction.size(); ++i) s += direction[i] * a.point[i];
          const double lambda = 1.0 / (1.0 + std::exp(-sharpness * s));
          const double coefficients[] = {lambda, 1.0 - lambda};
          fibers.push_back(DiscreteMeasure::Mixture(pair, coefficients));
        }
        return fibers;
      });
}

FiberedMeasure ControlToMvf(const ControlSystem& sys, const MeasureControl& mc,
                            const DiscreteMeasure& mu) {
  const FiberedMeasure controls = mc(mu);
  std::vector<DiscreteMeasure> fibers;
  fibers.reserve(mu.size());
  for (size_t i = 0; i < mu.size(); ++i) {
    const Point& x = mu.atom(i).point;
    std::vector<Atom> velocities;
    for (const Atom& u : controls.fiber(i).atoms()) {
      if (!sys.FindControl(u.point)) {
        throw Error(ErrorCode::kUnknownControlPoint,
                    "measure control '" + mc.name() + "' left the control set");
      }
      velocities.push_back({sys.dynamics().Evaluate(x, u.point), u.weight});
    }
    fibers.push_back(DiscreteMeasure::Create(std::move(velocities)));
  }
  return FiberedMeasure::Create(mu, std::move(fibers), FiberKind::kVelocity);
}

MeasureVectorField FieldFromControl(std::shared_ptr<const ControlSystem> sys,
                                    MeasureControl mc) {
  std::string name = "V[" + mc.name() + "]";
  return MeasureVectorField(
      std::move(name),
      [sys = std::move(sys), mc = std::move(mc)](const DiscreteMeasure& mu) {
        return ControlToMvf(*sys, mc, mu).fibers();
      });
}

MeasureVectorField FixedVelocityField(DiscreteMeasure velocities) {
  return MeasureVectorField(
      "fixed-velocity",
      [velocities = std::move(velocities)](const DiscreteMeasure& mu) {
        if (mu.dim() != velocities.dim()) {
          throw Error(ErrorCode::kDimensionMismatch, "velocity fiber dimension");
        }
        return std::vector<DiscreteMeasure>(mu.size(), velocities);
      });
}

MeasureVectorField MeanSeekingField(std::shared_ptr<const ControlSystem> sys) {
  return MeasureVectorField(
      "mean-seeking", [sys = std::move(sys)](const DiscreteMeasure& mu) {
        Point mean(mu.dim(), 0.0);
        for (const Atom& a : mu.atoms()) {
          for (int k = 0; k < mu.dim(); ++k) mean[k] += a.weight * a.point[k];
        }
        std::vector<DiscreteMeasure> fibers;
        for (const Atom& a : mu.atoms()) {
          Point target(mu.dim());
          for (int k = 0; k < mu.dim(); ++k) target[k] = mean[k] - a.point[k];
          const std::vector<Point> reachable = ReachableVelocities(*sys, a.point);
          const Point* best = &reachable.front();
          for (const Point& v : reachable) {
            if (Distance(v, target) < Distance(*best, target)) best = &v;
          }
          fibers.push_back(DiscreteMeasure::Dirac(*best));
        }
        return fibers;
      });
}

std::vector<Point> ReachableVelocities(const ControlSystem& sys,
                                       std::span<const double> x) {
  std::vector<Point> velocities;
  velocities.reserve(sys.controls().size());
  for (size_t i = 0; i < sys.controls().size(); ++i) {
    Point v = sys.Velocity(x, i);
    for (double& c : v) c += 0.0;
    velocities.push_back(std::move(v));
  }
  std::sort(velocities.begin(), velocities.end());
  velocities.erase(std::unique(velocities.begin(), velocities.end()),
                   velocities.end());
  return velocities;
}

double HausdorffLipschitzCheck(
    const ControlSystem& sys,
    std::span<const std::pair<Point, Point>> samples) {
  double ratio = 0.0;
  for (const auto& [x, y] : samples) {
    const double gap = Distance(x, y);
    if (gap == 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "sample pair is not distinct");
    }
    ratio = std::max(ratio, Hausdorff(ReachableVelocities(sys, x),
                                      ReachableVelocities(sys, y)) / gap);
  }
  return ratio;
}

Point RelaxedVectorField(const ControlSystem& sys, std::span<const double> x,
                         const DiscreteMeasure& rc) {
  Point v(sys.dim(), 0.0);
  for (const Atom& a : rc.atoms()) {
    const auto index = sys.FindControl(a.point);
    if (!index) {
      throw Error(ErrorCode::kUnknownControlPoint,
                  "relaxed control charges a point outside U");
    }
    const Point f = sys.Velocity(x, *index);
    for (int k = 0; k < sys.dim(); ++k) v[k] += a.weight * f[k];
  }
  return v;
}

double SublinearConstant(const ControlSystem& sys) {
  const Point origin(sys.dim(), 0.0);
  const double drift = Norm(sys.Velocity(origin, sys.base_control()));
  return std::max(sys.lipschitz(),
                  sys.lipschitz() * sys.ControlDiameter() + drift);
}

double WLipschitzEstimate(
    const MeasureControl& mc, const ControlSystem& sys,
    std::span<const std::pair<DiscreteMeasure, DiscreteMeasure>> pairs) {
  double ratio = 0.0;
  for (const auto& [mu, nu] : pairs) {
    const double gap = WassersteinDistance(mu, nu);
    if (gap == 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "sample measures coincide");
    }
    ratio = std::max(
        ratio, PseudoDistance(mc(mu), mc(nu), sys.control_metric()) / gap);
  }
  return ratio;
}

}  // namespace mdelab
