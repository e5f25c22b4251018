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

#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "gtest/gtest.h"
#include "mdelab/error.h"
#include "test_util.h"

namespace mdelab {
namespace {

using ::mdelab::testing::RandomMeasure;

StateBox Box1(double r = 4.0) { return {{-r}, {r}}; }

ControlSystem Translation(std::vector<Point> controls, double lipschitz = 1.0) {
  return ControlSystem::Create(1, Dynamics::Translation(), std::move(controls),
                               std::nullopt, lipschitz, 0, Box1());
}

ControlSystem Damped(std::vector<Point> controls) {
  return ControlSystem::Create(1, Dynamics::DampedDrive(), std::move(controls),
                               std::nullopt, 1.0, 0, Box1());
}

ControlSystem AffineScaling() {
  Eigen::MatrixXd a = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2, 1);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(2);
  return ControlSystem::Create(2, Dynamics::Affine(a, b, c), {{-1.0}, {1.0}},
                               std::nullopt, 2.0, 0, {{-2.0, -2.0}, {2.0, 2.0}});
}

ControlSystem Bilinear() {
  Eigen::MatrixXd a(2, 2), d(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  d << -0.5, 0.0, 0.0, -0.5;
  Eigen::VectorXd drift(2);
  drift << 0.1, 0.0;
  return ControlSystem::Create(2, Dynamics::Bilinear(a, d, drift),
                               {{0.0}, {0.5}, {1.0}}, std::nullopt, 1.5, 0,
                               {{-1.0, -1.0}, {1.0, 1.0}});
}

TEST(ControlSystemTest, RejectsUnderstatedLipschitz) {
  EXPECT_THROW(Translation({{-1.0}, {1.0}}, 0.5), Error);
  Eigen::MatrixXd a = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2, 1);
  EXPECT_THROW(ControlSystem::Create(2, Dynamics::Affine(a, b, Eigen::VectorXd::Zero(2)),
                                     {{0.0}}, std::nullopt, 1.9, 0,
                                     {{-1.0, -1.0}, {1.0, 1.0}}),
               Error);
  EXPECT_NEAR(AffineScaling().AnalyticLipschitz(), 2.0, 1e-12);
  EXPECT_NEAR(Damped({{0.0}, {1.0}}).AnalyticLipschitz(), 1.0, 1e-12);
}

TEST(ControlSystemTest, RejectsBadShapes) {
  EXPECT_THROW(ControlSystem::Create(1, Dynamics::Translation(), {}, std::nullopt,
                                     1.0, 0, Box1()),
               Error);
  EXPECT_THROW(ControlSystem::Create(2, Dynamics::Translation(), {{0.0}},
                                     std::nullopt, 1.0, 0, {{-1, -1}, {1, 1}}),
               Error);
  EXPECT_THROW(Translation({{0.0}, {1.0}}).Velocity(Point{0.0, 0.0}, 0), Error);
}

TEST(ControlSystemTest, MatrixControlMetricIsRebound) {
  const auto metric = GroundMetric::IndexedControl({{0.0, 3.0}, {3.0, 0.0}});
  const auto sys = ControlSystem::Create(1, Dynamics::Translation(), {{-1.0}, {1.0}},
                                         metric, 1.0, 0, Box1());
  EXPECT_EQ(sys.control_metric()(Point{-1.0}, Point{1.0}), 3.0);
  EXPECT_EQ(sys.ControlDiameter(), 3.0);
}

TEST(ReachableVelocitiesTest, Examples) {
  EXPECT_EQ(ReachableVelocities(Translation({{1.0}, {-1.0}}), Point{0.7}),
            (std::vector<Point>{{-1.0}, {1.0}}));
  EXPECT_EQ(ReachableVelocities(Damped({{0.0}}), Point{2.0}),
            (std::vector<Point>{{-2.0}}));
  EXPECT_EQ(ReachableVelocities(Damped({{-1.0}, {0.0}, {1.0}}), Point{0.0}),
            (std::vector<Point>{{-1.0}, {0.0}, {1.0}}));
}

TEST(HausdorffLipschitzCheckTest, Examples) {
  std::mt19937 rng(1);
  std::vector<std::pair<Point, Point>> pairs;
  for (int i = 0; i < 50; ++i) {
    pairs.push_back({testing::RandomPoint(rng, 1, -3, 3), testing::RandomPoint(rng, 1, -3, 3)});
  }
  EXPECT_EQ(HausdorffLipschitzCheck(Translation({{-1.0}, {1.0}}), pairs), 0.0);
  EXPECT_NEAR(HausdorffLipschitzCheck(Damped({{-1.0}, {0.0}, {1.0}}), pairs), 1.0, 1e-12);

  std::vector<std::pair<Point, Point>> pairs2;
  for (int i = 0; i < 50; ++i) {
    pairs2.push_back({testing::RandomPoint(rng, 2, -2, 2), testing::RandomPoint(rng, 2, -2, 2)});
  }
  EXPECT_NEAR(HausdorffLipschitzCheck(AffineScaling(), pairs2), 2.0, 1e-12);
  const auto bilinear = Bilinear();
  EXPECT_LE(HausdorffLipschitzCheck(bilinear, pairs2), bilinear.lipschitz());
}

TEST(RelaxedVectorFieldTest, Examples) {
  const auto sys = Damped({{0.0}, {4.0}});
  EXPECT_EQ(RelaxedVectorField(sys, Point{1.0}, DiscreteMeasure::Dirac({4.0})),
            Point{3.0});
  const auto rc = DiscreteMeasure::Create({{{0.0}, 0.25}, {{4.0}, 0.75}});
  EXPECT_DOUBLE_EQ(RelaxedVectorField(sys, Point{1.0}, rc)[0], 2.0);
  const auto symmetric = DiscreteMeasure::Create({{{-1.0}, 0.5}, {{1.0}, 0.5}});
  EXPECT_EQ(RelaxedVectorField(Translation({{-1.0}, {1.0}}), Point{0.3}, symmetric),
            Point{0.0});
  try {
    RelaxedVectorField(sys, Point{1.0}, DiscreteMeasure::Dirac({2.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownControlPoint);
  }
}

TEST(ControlToMvfTest, Examples) {
  const auto translation = Translation({{-1.0}, {0.5}, {1.0}});
  const auto mu = DiscreteMeasure::Create({{{0.0}, 0.5}, {{1.0}, 0.5}});
  const auto constant = ConstantFiberControl(translation, DiscreteMeasure::Dirac({0.5}));
  const auto v = ControlToMvf(translation, constant, mu);
  EXPECT_EQ(v.base(), mu);
  EXPECT_EQ(v.fiber(0), DiscreteMeasure::Dirac({0.5}));
  EXPECT_EQ(v.fiber(1), DiscreteMeasure::Dirac({0.5}));

  // Two controls with the same velocity at x: f(x, u) = (A + u D) x with D x = 0 at x = 0.
  const auto bilinear = Bilinear();
  const auto mixed = ConstantFiberControl(
      bilinear, DiscreteMeasure::Create({{{0.0}, 0.5}, {{1.0}, 0.5}}));
  const auto at_origin = ControlToMvf(bilinear, mixed, DiscreteMeasure::Dirac({0.0, 0.0}));
  ASSERT_EQ(at_origin.fiber(0).size(), 1u);
  EXPECT_DOUBLE_EQ(at_origin.fiber(0).atom(0).weight, 1.0);

  const auto damped = Damped({{0.0}, {4.0}});
  const auto split = ConstantFiberControl(
      damped, DiscreteMeasure::Create({{{0.0}, 0.5}, {{4.0}, 0.5}}));
  const auto w = ControlToMvf(damped, split, DiscreteMeasure::Dirac({1.0}));
  EXPECT_EQ(w.base(), DiscreteMeasure::Dirac({1.0}));
  EXPECT_EQ(w.fiber(0), DiscreteMeasure::Create({{{-1.0}, 0.5}, {{3.0}, 0.5}}));
}

TEST(ControlToMvfTest, UnknownControl) {
  const auto sys = Translation({{-1.0}, {1.0}});
  EXPECT_THROW(ConstantFiberControl(sys, DiscreteMeasure::Dirac({0.0})), Error);
}

TEST(SublinearConstantTest, Examples) {
  // L_f = 1, diam(U) = 2, f(0, u0) = 0.
  EXPECT_DOUBLE_EQ(SublinearConstant(Damped({{0.0}, {2.0}})), 2.0);
  EXPECT_DOUBLE_EQ(SublinearConstant(Damped({{0.0}})), 1.0);
  // L_f = 2, diam(U) = 1, ||f(0, u0)|| = 3.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(1, 1), b = Eigen::MatrixXd::Identity(1, 1);
  Eigen::VectorXd c(1);
  c << 3.0;
  const auto sys = ControlSystem::Create(1, Dynamics::Affine(a, b, c), {{0.0}, {1.0}},
                                         std::nullopt, 2.0, 0, Box1());
  EXPECT_DOUBLE_EQ(SublinearConstant(sys), 5.0);
}

std::vector<std::shared_ptr<const ControlSystem>> Families() {
  return {std::make_shared<const ControlSystem>(Translation({{-1.0}, {0.0}, {1.0}})),
          std::make_shared<const ControlSystem>(Damped({{-1.0}, {0.5}, {2.0}})),
          std::make_shared<const ControlSystem>(AffineScaling()),
          std::make_shared<const ControlSystem>(Bilinear())};
}

MeasureControl MixedControlFor(const ControlSystem& sys) {
  const auto& u = sys.controls();
  return StateMixedControl(sys, DiscreteMeasure::Dirac(u.front()),
                           DiscreteMeasure::Create({{u.back(), 0.5}, {u[1], 0.5}}),
                           Point(sys.dim(), 1.0), 0.1, 3.0);
}

TEST(MeasureControlTest, MarginalSupportAndGrowthProperties) {
  std::mt19937 rng(21);
  for (const auto& sys : Families()) {
    const double c = SublinearConstant(*sys);
    const MeasureControl rules[] = {
        ConstantFiberControl(*sys, DiscreteMeasure::Dirac(sys->control(0))),
        FeedbackControl(*sys, Eigen::MatrixXd::Ones(sys->control_dim(), sys->dim()),
                        Eigen::VectorXd::Zero(sys->control_dim())),
        MixedControlFor(*sys)};
    for (const auto& mc : rules) {
      for (int trial = 0; trial < 20; ++trial) {
        const auto mu = RandomMeasure(rng, sys->dim(), 1 + trial % 5, -1.0, 1.0);
        const auto controls = mc(mu);
        const auto marginal =
            Disintegrate(controls.Flatten(), sys->dim(), FiberKind::kControl).base();
        ASSERT_EQ(marginal.size(), mu.size());
        for (size_t i = 0; i < mu.size(); ++i) {
          EXPECT_EQ(marginal.atom(i).point, mu.atom(i).point);
          EXPECT_NEAR(marginal.atom(i).weight, mu.atom(i).weight, 1e-14);
        }
        const auto v = ControlToMvf(*sys, mc, mu);
        EXPECT_EQ(v.base(), mu);
        double max_speed = 0.0;
        for (size_t i = 0; i < mu.size(); ++i) {
          const auto reachable = ReachableVelocities(*sys, mu.atom(i).point);
          for (const Atom& a : v.fiber(i).atoms()) {
            EXPECT_TRUE(std::find(reachable.begin(), reachable.end(), a.point) !=
                        reachable.end());
            max_speed = std::max(max_speed, Norm(a.point));
          }
        }
        EXPECT_LE(max_speed, c * (1.0 + mu.SupportRadius()) + 1e-12);
      }
    }
  }
}

TEST(ControlSystemTest, LipschitzInBothVariables) {
  std::mt19937 rng(22);
  for (const auto& sys : Families()) {
    std::uniform_int_distribution<size_t> pick(0, sys->controls().size() - 1);
    for (int trial = 0; trial < 200; ++trial) {
      const Point x = testing::RandomPoint(rng, sys->dim(), sys->box().lo[0], sys->box().hi[0]);
      const Point y = testing::RandomPoint(rng, sys->dim(), sys->box().lo[0], sys->box().hi[0]);
      const size_t i = pick(rng), j = pick(rng);
      EXPECT_LE(Distance(sys->Velocity(x, i), sys->Velocity(y, j)),
                sys->lipschitz() * (Distance(x, y) + sys->ControlDistance(i, j)) + 1e-12);
    }
  }
}

TEST(WLipschitzEstimateTest, Examples) {
  std::vector<Point> grid;
  for (int i = -8; i <= 8; ++i) grid.push_back({i / 4.0});
  const auto sys = Translation(grid);
  std::mt19937 rng(23);
  std::uniform_int_distribution<int> cell(-8, 8);
  std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> pairs;
  auto grid_measure = [&] {
    std::vector<Atom> raw;
    for (int i = 0; i < 3; ++i) raw.push_back({{cell(rng) / 4.0}, 1.0 / 3});
    return DiscreteMeasure::Create(raw);
  };
  while (pairs.size() < 20) {
    auto mu = grid_measure(), nu = grid_measure();
    if (mu != nu) pairs.push_back({mu, nu});
  }
  const auto constant = ConstantFiberControl(
      sys, DiscreteMeasure::Create({{{-1.0}, 0.5}, {{1.0}, 0.5}}));
  EXPECT_NEAR(WLipschitzEstimate(constant, sys, pairs), 0.0, 1e-9);
  const auto fixed = FeedbackControl(sys, Eigen::MatrixXd::Zero(1, 1),
                                     Eigen::VectorXd::Constant(1, 0.5));
  EXPECT_NEAR(WLipschitzEstimate(fixed, sys, pairs), 0.0, 1e-9);
  // u(x) = x on grid points: 1-Lipschitz into the euclidean control set.
  const auto identity = FeedbackControl(sys, Eigen::MatrixXd::Identity(1, 1),
                                        Eigen::VectorXd::Zero(1));
  EXPECT_LE(WLipschitzEstimate(identity, sys, pairs), 1.0 + 1e-9);
}

TEST(MeasureVectorFieldTest, MeanSeekingIsAssociated) {
  auto sys = std::make_shared<const ControlSystem>(Damped({{-1.0}, {0.0}, {1.0}}));
  const auto field = MeanSeekingField(sys);
  const auto mu = DiscreteMeasure::Create({{{-1.0}, 0.5}, {{1.0}, 0.5}});
  const auto v = field(mu);
  // mean 0: at x = -1 target 1 -> f(-1, 0) = 1; at x = 1 target -1 -> f(1, 0) = -1.
  EXPECT_EQ(v.fiber(0), DiscreteMeasure::Dirac({1.0}));
  EXPECT_EQ(v.fiber(1), DiscreteMeasure::Dirac({-1.0}));
}

}  // namespace
}  // namespace mdelab
