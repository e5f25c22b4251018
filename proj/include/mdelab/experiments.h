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

#ifndef MDELAB_EXPERIMENTS_H_
#define MDELAB_EXPERIMENTS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdelab/control.h"
#include "mdelab/io.h"
#include "mdelab/las.h"
#include "mdelab/measures.h"

namespace mdelab {

// Tensor-product cubic B-spline bump, C^2 with support center + [-r, r]^n.
// Each factor is b((x_i - c_i) / h) with h = r / 2 and
//   b(s) = 2/3 - s^2 + |s|^3 / 2   for |s| < 1,
//   b(s) = (2 - |s|)^3 / 6         for 1 <= |s| < 2.
struct SplineBump {
  std::string name;
  Point center;
  double radius = 1.0;

  double Value(std::span<const double> x) const;
  Point Gradient(std::span<const double> x) const;
  // Upper bounds from the closed form: Lip(grad g) and sup |grad g|.
  double GradientLipschitz() const;
  double GradientBound() const;
};

struct ControlStep {
  int k = 0;
  MeasureControl control;
};

// A parsed scenario document. Optional sections are required only by the
// experiments that read them.
struct Scenario {
  std::string name;
  std::shared_ptr<const ControlSystem> system;
  std::optional<MeasureControl> control;
  bool deterministic_control = false;  // a particle ODE gives the exact flow
  std::vector<ControlStep> control_sequence;
  std::optional<MeasureVectorField> field;
  std::optional<DiscreteMeasure> initial;
  std::optional<DiscreteMeasure> initial_other;
  std::vector<int> n_list;
  double horizon = 1.0;
  std::vector<DiscreteMeasure> probes;
  std::vector<SplineBump> test_functions;
  uint64_t seed = 0;
  std::vector<double> eps_list;

  // The rule that drives trajectories: the control if present, else the field.
  MeasureVectorField Driver() const;
};

Scenario ParseScenario(const Json& doc, const std::filesystem::path& base,
                       std::string name = "scenario");
Scenario LoadScenario(const std::filesystem::path& path);

// A checked bound. Envelope failures always fail a run; diagnostics fail it
// only in strict mode.
struct Finding {
  bool envelope = true;
  std::string where;
  std::string message;
};

// Runs fn(0..count-1) on up to MDE_LAB_THREADS threads (default: hardware
// concurrency). The first exception by index is rethrown.
void ParallelFor(size_t count, const std::function<void(size_t)>& fn);
int WorkerCount();

// Atom-wise fourth-order Runge-Kutta flow of x' = f(x, u(x)) for a
// deterministic feedback control, step 1e-4.
DiscreteMeasure OracleFlow(const ControlSystem& sys, const MeasureControl& mc,
                           const DiscreteMeasure& mu0, double horizon,
                           double step = 1e-4);

struct ConvergenceRow {
  int n = 0;
  double gap_next = 0.0;                // W(final(N), final(2N))
  std::optional<double> gap_reference;  // W(final(N), ODE flow)
};
struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  std::optional<DiscreteMeasure> reference;
  std::vector<Finding> findings;
};
ConvergenceResult RunConvergence(const Scenario& sc);

struct SemigroupRow {
  double t = 0.0;
  double gap = 0.0;    // W(mu(t), nu(t))
  double bound = 0.0;  // exp(L_f (C + 1) t) W(mu0, nu0)
};
struct SemigroupRun {
  int n = 0;
  std::vector<SemigroupRow> rows;
};
struct SemigroupResult {
  std::vector<SemigroupRun> runs;
  std::vector<Finding> findings;
};
SemigroupResult RunSemigroup(const Scenario& sc);

struct StabilityRow {
  int k = 0;
  double sup_trajectory_gap = 0.0;  // max over lattice times of W(mu_k, mu)
  double sup_control_gap = 0.0;     // estimated sup of W_{R^n x U}(u_k[nu], u[nu])
  double worst_recursion_excess = 0.0;  // max of lhs - rhs over steps
};
struct StabilityRun {
  int n = 0;
  std::vector<StabilityRow> rows;
};
struct StabilityResult {
  std::vector<StabilityRun> runs;
  std::vector<Finding> findings;
};
StabilityResult RunStability(const Scenario& sc);

struct ClosureRow {
  std::string test_function;
  double t = 0.0;
  double residual = 0.0;
  double target = 0.0;  // Lip(grad g) (1 + max speed)^2 T / N
};
struct ClosureRun {
  int n = 0;
  std::vector<ClosureRow> rows;
  std::vector<double> max_residual;  // per test function
};
struct ClosureResult {
  std::vector<ClosureRun> runs;
  std::vector<Finding> findings;
};
// Residual of the weak formulation along the LAS trajectory driven by
// sc.Driver(), tested against `field` (the driver when absent).
ClosureResult RunClosure(const Scenario& sc,
                         const std::optional<MeasureVectorField>& field = {});
// Residuals for a single trajectory.
ClosureRun ClosureResiduals(const Trajectory& traj, const MeasureVectorField& field,
                            std::span<const SplineBump> tests);

struct SynthesisRow {
  size_t probe = 0;
  double error = 0.0;
  double eps = 0.0;
};
struct SynthesisCell {
  double eps = 0.0;
  size_t probe = 0;
  Point point;
  std::vector<int64_t> cell;  // lattice index at the first N of the scenario
  DiscreteMeasure fiber;
};
struct SynthesisResult {
  std::vector<SynthesisRow> rows;
  std::vector<SynthesisCell> table;
  std::vector<Finding> findings;
};
SynthesisResult RunSynthesis(const Scenario& sc);

struct SolveRow {
  double time = 0.0;
  size_t atom_count = 0;
  double support_radius = 0.0;
  double w_to_previous = 0.0;
};
struct SolveResult {
  Trajectory trajectory;
  std::vector<SolveRow> rows;
  double time_modulus = 0.0;
  double time_modulus_envelope = 0.0;
  double a_priori_radius = 0.0;
  std::vector<Finding> findings;
};
SolveResult RunSolve(const Scenario& sc, int n);

// CSV output; numbers are formatted with 17 significant digits.
std::string FormatNumber(double value);
void WriteCsv(const std::filesystem::path& path, const std::vector<std::string>& header,
              const std::vector<std::vector<std::string>>& rows);

}  // namespace mdelab

#endif  // MDELAB_EXPERIMENTS_H_
