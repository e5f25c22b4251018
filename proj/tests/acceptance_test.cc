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

// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mdelab/control.h"
#include "mdelab/experiments.h"
#include "mdelab/las.h"
#include "mdelab/measures.h"
#include "mdelab/transport.h"
#include "test_util.h"

namespace mdelab {
namespace {

namespace fs = std::filesystem;
using ::mdelab::testing::PermutationMatchingCost;
using ::mdelab::testing::RandomMeasure;
using ::mdelab::testing::RandomPoint;
using ::mdelab::testing::UniformMeasure;

const fs::path kScenarios = MDELAB_SCENARIOS;

// Outcome of one criterion: pass flag and a one-line detail.
struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void Require(bool condition, const std::string& what) {
    if (!condition && pass) detail << "first failure: " << what << "; ";
    pass = pass && condition;
  }
};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

Scenario Load(const std::string& name) { return LoadScenario(kScenarios / name); }

// 1. Exact OT against the permutation-matching minimum.
void OtOracle(Outcome& out) {
  std::mt19937 rng(101);
  std::uniform_int_distribution<int> atoms(1, 5), dims(1, 3);
  double worst = 0.0;
  const auto start = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 200; ++trial) {
    const int k = atoms(rng), dim = dims(rng);
    std::vector<Point> xs, ys;
    for (int i = 0; i < k; ++i) {
      xs.push_back(RandomPoint(rng, dim));
      ys.push_back(RandomPoint(rng, dim));
    }
    worst = std::max(worst, std::abs(WassersteinDistance(UniformMeasure(xs), UniformMeasure(ys)) -
                                     PermutationMatchingCost(xs, ys)));
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.Require(worst <= 1e-9, "oracle deviation " + Num(worst));
  out.Require(seconds < 5.0, "runtime " + Num(seconds) + " s");
  out.detail << "200 instances, max |W - oracle| = " << Num(worst);
}

// 2. Kantorovich-Rubinstein duality.
void Duality(Outcome& out) {
  std::mt19937 rng(102);
  std::uniform_int_distribution<int> atoms(1, 6), dims(1, 2);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = dims(rng);
    const auto a = RandomMeasure(rng, dim, atoms(rng));
    const auto b = RandomMeasure(rng, dim, atoms(rng));
    worst = std::max(worst, std::abs(WassersteinDistance(a, b) - DualWasserstein(a, b)));
  }
  out.Require(worst <= 1e-7, "duality gap " + Num(worst));
  out.detail << "100 instances, max |primal - dual| = " << Num(worst);
}

// 3. The optimal-face constraint of the pseudo-distance binds.
void FaceConstraint(Outcome& out) {
  const auto base = DiscreteMeasure::Create({{{0.0}, 0.5}, {{1.0}, 0.5}});
  const auto a = DiscreteMeasure::Dirac({0.0}), b = DiscreteMeasure::Dirac({1.0});
  const auto j1 = FiberProduct(base, {a, b}, FiberKind::kControl);
  const auto j2 = FiberProduct(base, {b, a}, FiberKind::kControl);
  const auto metric = GroundMetric::Control({{0.0}, {1.0}}, {{0.0, 1.0}, {1.0, 0.0}});
  const double constrained = PseudoDistance(j1, j2, metric);
  const double free = UnconstrainedSecondaryCost(j1, j2, metric);
  out.Require(std::abs(constrained - 1.0) <= 1e-9, "pseudo-distance " + Num(constrained));
  out.Require(std::abs(free) <= 1e-9, "unconstrained " + Num(free));
  out.detail << "constrained = " << Num(constrained) << ", unconstrained = " << Num(free);
}

// 4. LAS convergence: exact translation, first-order damped drive.
void Convergence(Outcome& out) {
  const auto start = std::chrono::steady_clock::now();
  const auto translation = Load("translation.json");
  for (int n : {2, 4, 8}) {
    const auto traj =
        SolveLas(translation.Driver(), *translation.initial, LasConfig::Create(n, 1.0));
    out.Require(traj.states.back() == DiscreteMeasure::Dirac({1.0}),
                "translation final state at N=" + std::to_string(n));
  }
  auto damped = Load("damped.json");
  damped.n_list = {4, 8, 16, 32};
  const auto result = RunConvergence(damped);
  double worst_ratio = 0.0;
  for (size_t i = 1; i < result.rows.size(); ++i) {
    const double ratio = *result.rows[i].gap_reference / *result.rows[i - 1].gap_reference;
    worst_ratio = std::max(worst_ratio, ratio);
  }
  out.Require(result.rows.size() == 4, "damped rows");
  out.Require(worst_ratio <= 0.75, "damped ratio " + Num(worst_ratio));
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.Require(seconds < 30.0, "runtime " + Num(seconds) + " s");
  out.detail << "translation exact for N=2,4,8; damped worst ratio = " << Num(worst_ratio);
}

// 5. Semigroup gap under the exponential envelope.
void Semigroup(Outcome& out) {
  double worst = -1e300;
  for (const char* name : {"semigroup_damped.json", "semigroup_translation.json"}) {
    auto sc = Load(name);
    sc.n_list = {16};
    const double slack = 4.0 * std::sqrt(static_cast<double>(sc.system->dim())) / 256.0;
    const auto result = RunSemigroup(sc);
    for (const auto& row : result.runs.at(0).rows) {
      const double excess = row.gap - (1.1 * row.bound + slack);
      worst = std::max(worst, excess);
      out.Require(excess <= 0.0, std::string(name) + " at t=" + Num(row.t));
    }
  }
  out.detail << "max(gap - envelope) = " << Num(worst);
}

// 6. Stability with respect to the measure control.
void Stability(Outcome& out) {
  auto sc = Load("stability.json");
  sc.n_list = {16};
  const auto result = RunStability(sc);
  const double slack = 4.0 * std::sqrt(static_cast<double>(sc.system->dim())) / 256.0;
  double worst_excess = -1e300;
  for (const auto& row : result.runs.at(0).rows) {
    out.Require(row.sup_trajectory_gap <= 1.0 / row.k + 4.0 / 256.0,
                "k=" + std::to_string(row.k) + " gap " + Num(row.sup_trajectory_gap));
    worst_excess = std::max(worst_excess, row.worst_recursion_excess);
  }
  std::vector<int> ks;
  for (const auto& row : result.runs.at(0).rows) ks.push_back(row.k);
  out.Require(ks == std::vector<int>{2, 4, 8, 16}, "k sequence");
  // The reported excess already subtracts the slack from the right-hand side.
  out.Require(worst_excess <= 0.0, "recursion excess " + Num(worst_excess));
  out.detail << "k=2..16 within 1/k + 4/N^2; worst recursion excess = " << Num(worst_excess)
             << " (slack " << Num(slack) << " included)";
}

// 7. Weak-form residual halves as N doubles.
void Closure(Outcome& out) {
  double worst = 0.0;
  for (const char* name : {"translation.json", "splitting.json"}) {
    auto sc = Load(name);
    sc.n_list = {4, 8, 16, 32};
    out.Require(sc.test_functions.size() == 3, std::string(name) + " has three bumps");
    const auto result = RunClosure(sc);
    for (size_t g = 0; g < sc.test_functions.size(); ++g) {
      for (size_t i = 1; i < result.runs.size(); ++i) {
        const double prev = result.runs[i - 1].max_residual[g];
        const double ratio = prev > 0.0 ? result.runs[i].max_residual[g] / prev : 0.0;
        worst = std::max(worst, ratio);
        out.Require(ratio <= 0.6, std::string(name) + " " + sc.test_functions[g].name +
                                      " ratio " + Num(ratio));
      }
    }
  }
  out.detail << "worst ratio over 6 bumps = " << Num(worst);
}

// Largest certificate error per eps, in eps_list order.
std::vector<double> MaxErrors(const Scenario& sc, const SynthesisResult& result) {
  std::vector<double> worst(sc.eps_list.size(), 0.0);
  for (const auto& row : result.rows) {
    const auto it = std::find(sc.eps_list.begin(), sc.eps_list.end(), row.eps);
    worst[it - sc.eps_list.begin()] = std::max(worst[it - sc.eps_list.begin()], row.error);
  }
  return worst;
}

// 8. Synthesis certificate.
void Synthesis(Outcome& out) {
  const auto sc = Load("synthesis.json");
  out.Require(sc.eps_list == std::vector<double>{0.5, 0.1, 0.02}, "eps list");
  out.Require(sc.system->controls().size() == 201, "control grid of 201 points");
  const auto result = RunSynthesis(sc);
  for (const auto& row : result.rows) {
    out.Require(row.error <= row.eps, "probe " + std::to_string(row.probe) + " eps " +
                                          Num(row.eps) + " error " + Num(row.error));
  }
  const auto worst = MaxErrors(sc, result);
  for (size_t i = 1; i < worst.size(); ++i) {
    out.Require(worst[i] <= worst[i - 1], "splitting error grew as eps shrank");
  }
  // A field that the grid cannot reproduce exactly shows strict decrease.
  const auto relaxed = Load("synthesis_relaxed.json");
  const auto relaxed_result = RunSynthesis(relaxed);
  for (const auto& row : relaxed_result.rows) {
    out.Require(row.error <= row.eps, "relaxed probe " + std::to_string(row.probe));
  }
  const auto relaxed_worst = MaxErrors(relaxed, relaxed_result);
  for (size_t i = 1; i < relaxed_worst.size(); ++i) {
    out.Require(relaxed_worst[i] < relaxed_worst[i - 1], "relaxed error did not decrease");
  }
  out.detail << "splitting max errors";
  for (double e : worst) out.detail << " " << Num(e);
  out.detail << "; relaxed max errors";
  for (double e : relaxed_worst) out.detail << " " << Num(e);
}

std::vector<std::shared_ptr<const ControlSystem>> Families() {
  const StateBox box1{{-4.0}, {4.0}};
  const StateBox box2{{-2.0, -2.0}, {2.0, 2.0}};
  Eigen::MatrixXd rot(2, 2), damp(2, 2);
  rot << 0.0, -1.0, 1.0, 0.0;
  damp << -0.5, 0.0, 0.0, -0.5;
  Eigen::VectorXd drift(2);
  drift << 0.1, 0.0;
  return {
      std::make_shared<const ControlSystem>(ControlSystem::Create(
          1, Dynamics::Translation(), {{-1.0}, {0.0}, {1.0}}, std::nullopt, 1.0, 1, box1)),
      std::make_shared<const ControlSystem>(ControlSystem::Create(
          1, Dynamics::DampedDrive(), {{-1.0}, {0.5}, {2.0}}, std::nullopt, 1.0, 0, box1)),
      std::make_shared<const ControlSystem>(ControlSystem::Create(
          2, Dynamics::Affine(rot, Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)),
          {{0.0, 0.0}, {0.5, -0.25}, {-0.25, 0.75}}, std::nullopt, 1.0, 0, box2)),
      std::make_shared<const ControlSystem>(ControlSystem::Create(
          2, Dynamics::Bilinear(rot, damp, drift), {{0.0}, {0.5}, {1.0}}, std::nullopt, 1.5, 0,
          box2)),
  };
}

// 9. Structural invariants across the four dynamics families.
void Invariants(Outcome& out) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(109);
  double worst_mass = 0.0, worst_hausdorff_ratio = 0.0;
  size_t checks = 0;
  for (const auto& sys : Families()) {
    const std::string family(DynamicsFamilyName(sys->dynamics().family));
    const auto& u = sys->controls();
    const MeasureControl rules[] = {
        ConstantFiberControl(*sys, DiscreteMeasure::Create({{u[0], 0.5}, {u[1], 0.5}})),
        FeedbackControl(*sys, Eigen::MatrixXd::Ones(sys->control_dim(), sys->dim()),
                        Eigen::VectorXd::Zero(sys->control_dim())),
        StateMixedControl(*sys, DiscreteMeasure::Dirac(u.front()),
                          DiscreteMeasure::Create({{u.back(), 0.5}, {u[1], 0.5}}),
                          Point(sys->dim(), 1.0), 0.1, 3.0)};
    for (const auto& mc : rules) {
      for (int trial = 0; trial < 20; ++trial) {
        const auto mu = RandomMeasure(rng, sys->dim(), 1 + trial % 5, -1.0, 1.0);
        // Marginal: the state base is the input measure itself and every
        // fiber is a probability measure on U.
        const auto controls = mc(mu);
        out.Require(controls.base() == mu, family + " marginal base");
        for (const auto& fiber : controls.fibers()) {
          out.Require(std::abs(fiber.TotalMass() - 1.0) <= 1e-12, family + " fiber mass");
          for (const Atom& a : fiber.atoms()) {
            out.Require(sys->FindControl(a.point).has_value(), family + " fiber in U");
          }
        }
        // Support association: velocity atoms over x lie in F(x) exactly.
        const auto v = ControlToMvf(*sys, mc, mu);
        out.Require(v.base() == mu, family + " velocity base");
        for (size_t i = 0; i < mu.size(); ++i) {
          const auto reachable = ReachableVelocities(*sys, mu.atom(i).point);
          for (const Atom& a : v.fiber(i).atoms()) {
            out.Require(std::find(reachable.begin(), reachable.end(), a.point) !=
                            reachable.end(),
                        family + " support association");
          }
        }
        ++checks;
      }
      // Mass conservation and lattice closure along LAS trajectories.
      for (int n : {2, 3, 4}) {
        const auto mu0 = RandomMeasure(rng, sys->dim(), 4, -0.5, 0.5);
        const auto traj = SolveLas(*sys, mc, mu0, LasConfig::Create(n, 1.0));
        const double cells = static_cast<double>(n) * n;
        for (const auto& state : traj.states) {
          worst_mass = std::max(worst_mass, std::abs(state.TotalMass() - 1.0));
          for (const Atom& a : state.atoms()) {
            for (double x : a.point) {
              out.Require(std::round(x * cells) / cells == x, family + " lattice closure");
            }
          }
        }
      }
    }
    // Hausdorff-Lipschitz ratio of the reachable-velocity map.
    std::vector<std::pair<Point, Point>> pairs;
    for (int i = 0; i < 100; ++i) {
      pairs.emplace_back(RandomPoint(rng, sys->dim(), sys->box().lo[0], sys->box().hi[0]),
                         RandomPoint(rng, sys->dim(), sys->box().lo[0], sys->box().hi[0]));
    }
    const double ratio = HausdorffLipschitzCheck(*sys, pairs);
    // Damped drive attains L_f exactly; allow rounding in the quotient.
    out.Require(ratio <= sys->lipschitz() * (1.0 + 1e-12), family + " Hausdorff ratio " + Num(ratio));
    worst_hausdorff_ratio = std::max(worst_hausdorff_ratio, ratio / sys->lipschitz());
  }
  out.Require(worst_mass <= 1e-12, "mass error " + Num(worst_mass));
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.Require(seconds < 60.0, "runtime " + Num(seconds) + " s");
  out.detail << checks << " measure-control checks, max mass error = " << Num(worst_mass)
             << ", max Hausdorff ratio / L_f = " << Num(worst_hausdorff_ratio);
}

}  // namespace
}  // namespace mdelab

int main() {
  using Criterion = std::pair<const char*, std::function<void(mdelab::Outcome&)>>;
  const Criterion criteria[] = {
      {"ot-oracle-equivalence", mdelab::OtOracle},
      {"kantorovich-rubinstein-duality", mdelab::Duality},
      {"pseudo-distance-face-constraint", mdelab::FaceConstraint},
      {"las-convergence", mdelab::Convergence},
      {"semigroup-envelope", mdelab::Semigroup},
      {"stability", mdelab::Stability},
      {"closure-residual", mdelab::Closure},
      {"synthesis-certificate", mdelab::Synthesis},
      {"structural-invariants", mdelab::Invariants},
  };
  int failures = 0;
  int index = 1;
  for (const auto& [name, run] : criteria) {
    mdelab::Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      run(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << "exception: " << e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s [%d] %s (%.2f s): %s\n", out.pass ? "PASS" : "FAIL", index++, name, seconds,
                out.detail.str().c_str());
    failures += out.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures,
              std::size(criteria));
  return failures == 0 ? 0 : 1;
}
