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

#include "mdelab/experiments.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <thread>
#include <utility>

#include "mdelab/error.h"
#include "mdelab/synthesis.h"
#include "mdelab/transport.h"

namespace mdelab {
namespace {

double Bump(double s) {
  const double a = std::abs(s);
  if (a < 1.0) return 2.0 / 3.0 - s * s + 0.5 * a * a * a;
  if (a < 2.0) return (2.0 - a) * (2.0 - a) * (2.0 - a) / 6.0;
  return 0.0;
}

double BumpSlope(double s) {
  const double a = std::abs(s);
  if (a < 1.0) return -2.0 * s + 1.5 * s * a;
  if (a < 2.0) return (s < 0 ? 0.5 : -0.5) * (2.0 - a) * (2.0 - a);
  return 0.0;
}

// Lattice slack of one re-quantization per run, for two runs.
double QuantizationSlack(int dim, int n) {
  return 4.0 * std::sqrt(static_cast<double>(dim)) / (static_cast<double>(n) * n);
}

std::string Where(const std::string& table, const std::string& row) {
  return table + "[" + row + "]";
}

[[noreturn]] void Missing(const std::string& name, const std::string& what) {
  throw Error(ErrorCode::kParseError, name + "." + what + ": missing field");
}

}  // namespace

double SplineBump::Value(std::span<const double> x) const {
  const double h = radius / 2.0;
  double v = 1.0;
  for (size_t i = 0; i < center.size(); ++i) v *= Bump((x[i] - center[i]) / h);
  return v;
}

Point SplineBump::Gradient(std::span<const double> x) const {
  const double h = radius / 2.0;
  const size_t n = center.size();
  std::vector<double> s(n), b(n);
  for (size_t i = 0; i < n; ++i) {
    s[i] = (x[i] - center[i]) / h;
    b[i] = Bump(s[i]);
  }
  Point grad(n);
  for (size_t i = 0; i < n; ++i) {
    double g = BumpSlope(s[i]) / h;
    for (size_t j = 0; j < n; ++j) {
      if (j != i) g *= b[j];
    }
    grad[i] = g;
  }
  return grad;
}

double SplineBump::GradientLipschitz() const {
  // |b''| <= 2 and |b| <= 2/3 bound every Hessian entry by 2 (2/3)^(n-1) / h^2;
  // a row sum bounds the operator norm.
  const double h = radius / 2.0;
  const double n = static_cast<double>(center.size());
  return n * 2.0 * std::pow(2.0 / 3.0, n - 1) / (h * h);
}

double SplineBump::GradientBound() const {
  const double h = radius / 2.0;
  const double n = static_cast<double>(center.size());
  return std::sqrt(n) * 0.5 * std::pow(2.0 / 3.0, n - 1) / h;
}

MeasureVectorField Scenario::Driver() const {
  if (control) return FieldFromControl(system, *control);
  if (field) return *field;
  Missing(name, "control");
}

Scenario ParseScenario(const Json& doc, const std::filesystem::path& base, std::string name) {
  if (!doc.is_object()) throw Error(ErrorCode::kParseError, name + ": expected an object");
  DocumentReader reader(base);
  Scenario sc;
  sc.name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>()
                                                            : name;
  const std::string& w = name;
  if (!doc.contains("system")) Missing(w, "system");
  sc.system = reader.System(doc["system"], w + ".system");
  if (doc.contains("control")) {
    const Json resolved = reader.Resolve(doc["control"], w + ".control");
    sc.control = reader.Control(resolved, sc.system, w + ".control");
    sc.deterministic_control = IsDeterministicControl(resolved);
  }
  if (doc.contains("controls")) {
    const Json& list = doc["controls"];
    if (!list.is_array()) throw Error(ErrorCode::kParseError, w + ".controls: expected an array");
    for (size_t i = 0; i < list.size(); ++i) {
      const std::string at = w + ".controls[" + std::to_string(i) + "]";
      const Json& entry = list[i];
      if (!entry.is_object() || !entry.contains("k") || !entry["k"].is_number_integer()) {
        throw Error(ErrorCode::kParseError, at + ".k: missing integer field");
      }
      if (!entry.contains("control")) Missing(at, "control");
      sc.control_sequence.push_back(
          {entry["k"].get<int>(), reader.Control(entry["control"], sc.system, at + ".control")});
    }
    for (size_t i = 1; i < sc.control_sequence.size(); ++i) {
      if (sc.control_sequence[i].k <= sc.control_sequence[i - 1].k) {
        throw Error(ErrorCode::kParseError, w + ".controls: k must be strictly increasing");
      }
    }
  }
  if (doc.contains("mvf")) sc.field = reader.Field(doc["mvf"], sc.system, w + ".mvf");
  if (doc.contains("initial")) sc.initial = reader.Measure(doc["initial"], w + ".initial");
  if (doc.contains("initial_other")) {
    sc.initial_other = reader.Measure(doc["initial_other"], w + ".initial_other");
  }
  for (const auto* mu : {&sc.initial, &sc.initial_other}) {
    if (*mu && (*mu)->dim() != sc.system->dim()) {
      throw Error(ErrorCode::kDimensionMismatch, w + ": initial measure dimension differs from system");
    }
  }
  if (doc.contains("N_list")) {
    const Json& list = doc["N_list"];
    if (!list.is_array()) throw Error(ErrorCode::kParseError, w + ".N_list: expected an array");
    for (size_t i = 0; i < list.size(); ++i) {
      if (!list[i].is_number_integer() || list[i].get<int>() <= 0) {
        throw Error(ErrorCode::kParseError,
                    w + ".N_list[" + std::to_string(i) + "]: expected a positive integer");
      }
      sc.n_list.push_back(list[i].get<int>());
      if (i > 0 && sc.n_list[i] <= sc.n_list[i - 1]) {
        throw Error(ErrorCode::kParseError, w + ".N_list: must be strictly increasing");
      }
    }
  }
  if (doc.contains("T")) {
    if (!doc["T"].is_number() || !(doc["T"].get<double>() > 0)) {
      throw Error(ErrorCode::kParseError, w + ".T: expected a positive number");
    }
    sc.horizon = doc["T"].get<double>();
  }
  if (doc.contains("probes")) {
    const Json& list = doc["probes"];
    if (!list.is_array()) throw Error(ErrorCode::kParseError, w + ".probes: expected an array");
    for (size_t i = 0; i < list.size(); ++i) {
      sc.probes.push_back(reader.Measure(list[i], w + ".probes[" + std::to_string(i) + "]"));
      if (sc.probes.back().dim() != sc.system->dim()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    w + ".probes[" + std::to_string(i) + "]: dimension differs from system");
      }
    }
  }
  if (doc.contains("test_functions")) {
    const Json& list = doc["test_functions"];
    if (!list.is_array()) {
      throw Error(ErrorCode::kParseError, w + ".test_functions: expected an array");
    }
    for (size_t i = 0; i < list.size(); ++i) {
      const std::string at = w + ".test_functions[" + std::to_string(i) + "]";
      const Json& g = list[i];
      SplineBump bump;
      if (!g.is_object() || !g.contains("center") || !g["center"].is_array()) {
        throw Error(ErrorCode::kParseError, at + ".center: missing array field");
      }
      bump.name = g.contains("name") && g["name"].is_string() ? g["name"].get<std::string>()
                                                              : "g" + std::to_string(i);
      for (const Json& c : g["center"]) {
        if (!c.is_number()) throw Error(ErrorCode::kParseError, at + ".center: expected numbers");
        bump.center.push_back(c.get<double>());
      }
      if (static_cast<int>(bump.center.size()) != sc.system->dim()) {
        throw Error(ErrorCode::kDimensionMismatch, at + ".center: dimension differs from system");
      }
      if (g.contains("radius")) {
        if (!g["radius"].is_number() || !(g["radius"].get<double>() > 0)) {
          throw Error(ErrorCode::kParseError, at + ".radius: expected a positive number");
        }
        bump.radius = g["radius"].get<double>();
      }
      sc.test_functions.push_back(std::move(bump));
    }
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer()) {
      throw Error(ErrorCode::kParseError, w + ".seed: expected an integer");
    }
    sc.seed = doc["seed"].get<uint64_t>();
  }
  if (doc.contains("eps_list")) {
    const Json& list = doc["eps_list"];
    if (!list.is_array()) throw Error(ErrorCode::kParseError, w + ".eps_list: expected an array");
    for (size_t i = 0; i < list.size(); ++i) {
      if (!list[i].is_number() || !(list[i].get<double>() > 0)) {
        throw Error(ErrorCode::kParseError,
                    w + ".eps_list[" + std::to_string(i) + "]: expected a positive number");
      }
      sc.eps_list.push_back(list[i].get<double>());
    }
  }
  return sc;
}

Scenario LoadScenario(const std::filesystem::path& path) {
  const Json doc = LoadJson(path);
  return ParseScenario(doc, path.parent_path(), path.stem().string());
}

int WorkerCount() {
  if (const char* env = std::getenv("MDE_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void ParallelFor(size_t count, const std::function<void(size_t)>& fn) {
  const size_t workers = std::min<size_t>(WorkerCount(), count);
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

DiscreteMeasure OracleFlow(const ControlSystem& sys, const MeasureControl& mc,
                           const DiscreteMeasure& mu0, double horizon, double step) {
  const int n = sys.dim();
  auto velocity = [&](const Point& x) {
    const auto v = ControlToMvf(sys, mc, DiscreteMeasure::Dirac(x));
    Point mean(n, 0.0);
    for (const Atom& a : v.fiber(0).atoms()) {
      for (int i = 0; i < n; ++i) mean[i] += a.weight * a.point[i];
    }
    return mean;
  };
  auto axpy = [n](const Point& x, double h, const Point& k) {
    Point y(n);
    for (int i = 0; i < n; ++i) y[i] = x[i] + h * k[i];
    return y;
  };
  const long steps = std::max(1L, std::lround(horizon / step));
  const double h = horizon / steps;
  return Pushforward(mu0, {n, n, [&](std::span<const double> start) {
                             Point x(start.begin(), start.end());
                             for (long s = 0; s < steps; ++s) {
                               const Point k1 = velocity(x);
                               const Point k2 = velocity(axpy(x, h / 2, k1));
                               const Point k3 = velocity(axpy(x, h / 2, k2));
                               const Point k4 = velocity(axpy(x, h, k3));
                               for (int i = 0; i < n; ++i) {
                                 x[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
                               }
                             }
                             return x;
                           }});
}

namespace {

void CheckHorizon(const Scenario& sc, int n, std::vector<Finding>& findings) {
  const auto cfg = LasConfig::Create(n, sc.horizon);
  if (cfg.remainder > 0) {
    findings.push_back({false, "N=" + std::to_string(n),
                        "horizon rounded down to " + FormatNumber(cfg.horizon)});
  }
}

const DiscreteMeasure& RequireInitial(const Scenario& sc) {
  if (!sc.initial) Missing(sc.name, "initial");
  return *sc.initial;
}

void RequireNList(const Scenario& sc) {
  if (sc.n_list.empty()) Missing(sc.name, "N_list");
}

}  // namespace

ConvergenceResult RunConvergence(const Scenario& sc) {
  RequireNList(sc);
  const auto& mu0 = RequireInitial(sc);
  const auto field = sc.Driver();
  ConvergenceResult result;
  std::vector<int> ns;
  for (int n : sc.n_list) {
    ns.push_back(n);
    ns.push_back(2 * n);
    CheckHorizon(sc, n, result.findings);
  }
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());

  std::vector<std::optional<DiscreteMeasure>> finals(ns.size());
  ParallelFor(ns.size(), [&](size_t i) {
    finals[i] = SolveLas(field, mu0, LasConfig::Create(ns[i], sc.horizon)).states.back();
  });
  auto final_at = [&](int n) -> const DiscreteMeasure& {
    return *finals[std::lower_bound(ns.begin(), ns.end(), n) - ns.begin()];
  };
  if (sc.control && sc.deterministic_control) {
    result.reference = OracleFlow(*sc.system, *sc.control, mu0, sc.horizon);
  }
  for (int n : sc.n_list) {
    ConvergenceRow row;
    row.n = n;
    row.gap_next = WassersteinDistance(final_at(n), final_at(2 * n));
    if (result.reference) {
      // The reference is evaluated at the horizon the lattice actually reached.
      const auto cfg = LasConfig::Create(n, sc.horizon);
      const auto reference = cfg.remainder > 0
                                 ? OracleFlow(*sc.system, *sc.control, mu0, cfg.horizon)
                                 : *result.reference;
      row.gap_reference = WassersteinDistance(final_at(n), reference);
    }
    result.rows.push_back(row);
  }
  // First-order behavior: the reference gap should shrink by at least 3/4 per
  // doubling of N. Reported as a diagnostic; the theorem itself has no rate.
  for (size_t i = 1; i < result.rows.size(); ++i) {
    const auto& prev = result.rows[i - 1];
    const auto& cur = result.rows[i];
    if (cur.n != 2 * prev.n || !prev.gap_reference || !cur.gap_reference) continue;
    if (*prev.gap_reference <= 1e-12) continue;
    const double ratio = *cur.gap_reference / *prev.gap_reference;
    if (ratio > 0.75) {
      result.findings.push_back({false, Where("convergence", "N=" + std::to_string(cur.n)),
                                 "reference gap ratio " + FormatNumber(ratio) + " > 0.75"});
    }
  }
  return result;
}

SemigroupResult RunSemigroup(const Scenario& sc) {
  RequireNList(sc);
  const auto& mu0 = RequireInitial(sc);
  if (!sc.initial_other) Missing(sc.name, "initial_other");
  const auto& nu0 = *sc.initial_other;
  const auto field = sc.Driver();
  const double lf = sc.system->lipschitz();
  const double c = SublinearConstant(*sc.system);
  const double w0 = WassersteinDistance(mu0, nu0);

  SemigroupResult result;
  for (int n : sc.n_list) CheckHorizon(sc, n, result.findings);
  std::vector<Trajectory> trajs(2 * sc.n_list.size());
  ParallelFor(trajs.size(), [&](size_t i) {
    trajs[i] = SolveLas(field, i % 2 ? nu0 : mu0, LasConfig::Create(sc.n_list[i / 2], sc.horizon));
  });
  for (size_t r = 0; r < sc.n_list.size(); ++r) {
    const int n = sc.n_list[r];
    const auto& mu = trajs[2 * r];
    const auto& nu = trajs[2 * r + 1];
    SemigroupRun run{n, {}};
    const double slack = QuantizationSlack(sc.system->dim(), n);
    for (size_t l = 0; l < mu.states.size(); ++l) {
      SemigroupRow row;
      row.t = mu.times[l];
      row.gap = WassersteinDistance(mu.states[l], nu.states[l]);
      row.bound = std::exp(lf * (c + 1.0) * row.t) * w0;
      if (row.gap > 1.1 * row.bound + slack) {
        result.findings.push_back(
            {true, Where("semigroup", "N=" + std::to_string(n) + ",t=" + FormatNumber(row.t)),
             "gap " + FormatNumber(row.gap) + " exceeds 1.1 * " + FormatNumber(row.bound) +
                 " + " + FormatNumber(slack)});
      }
      run.rows.push_back(row);
    }
    result.runs.push_back(std::move(run));
  }
  return result;
}

StabilityResult RunStability(const Scenario& sc) {
  RequireNList(sc);
  const auto& mu0 = RequireInitial(sc);
  if (!sc.control) Missing(sc.name, "control");
  if (sc.control_sequence.empty()) Missing(sc.name, "controls");
  const auto& sys = *sc.system;
  const double lf = sys.lipschitz();
  const size_t per_n = sc.control_sequence.size() + 1;

  StabilityResult result;
  for (int n : sc.n_list) CheckHorizon(sc, n, result.findings);
  std::vector<Trajectory> trajs(sc.n_list.size() * per_n);
  ParallelFor(trajs.size(), [&](size_t i) {
    const size_t j = i % per_n;
    const auto& mc = j == 0 ? *sc.control : sc.control_sequence[j - 1].control;
    trajs[i] = SolveLas(sys, mc, mu0, LasConfig::Create(sc.n_list[i / per_n], sc.horizon));
  });

  std::vector<StabilityRow> rows(trajs.size());
  ParallelFor(trajs.size(), [&](size_t i) {
    const size_t j = i % per_n;
    if (j == 0) return;
    const int n = sc.n_list[i / per_n];
    const auto& reference = trajs[i - j];
    const auto& traj = trajs[i];
    const auto& mc = sc.control_sequence[j - 1].control;
    StabilityRow& row = rows[i];
    row.k = sc.control_sequence[j - 1].k;

    // Estimated sup over probes and every state either run visited.
    std::vector<const DiscreteMeasure*> samples;
    for (const auto& p : sc.probes) samples.push_back(&p);
    for (const auto& s : reference.states) samples.push_back(&s);
    for (const auto& s : traj.states) samples.push_back(&s);
    for (const DiscreteMeasure* nu : samples) {
      row.sup_control_gap = std::max(
          row.sup_control_gap, PseudoDistance(mc(*nu), (*sc.control)(*nu), sys.control_metric()));
    }
    std::vector<double> gaps;
    for (size_t l = 0; l < traj.states.size(); ++l) {
      gaps.push_back(WassersteinDistance(traj.states[l], reference.states[l]));
      row.sup_trajectory_gap = std::max(row.sup_trajectory_gap, gaps.back());
    }
    const double slack = QuantizationSlack(sys.dim(), n);
    row.worst_recursion_excess = -std::numeric_limits<double>::infinity();
    for (size_t l = 0; l + 1 < gaps.size(); ++l) {
      const double rhs = (3.0 * lf + 1.0) * gaps[l] + 2.0 * lf * row.sup_control_gap + slack;
      row.worst_recursion_excess = std::max(row.worst_recursion_excess, gaps[l + 1] - rhs);
    }
  });

  for (size_t r = 0; r < sc.n_list.size(); ++r) {
    const int n = sc.n_list[r];
    const double slack = QuantizationSlack(sys.dim(), n);
    StabilityRun run{n, {}};
    for (size_t j = 1; j < per_n; ++j) run.rows.push_back(rows[r * per_n + j]);
    for (size_t j = 0; j < run.rows.size(); ++j) {
      const auto& row = run.rows[j];
      const std::string at = Where("stability", "N=" + std::to_string(n) + ",k=" + std::to_string(row.k));
      if (row.worst_recursion_excess > 0) {
        result.findings.push_back({true, at,
                                   "per-step recursion with constant 3 L_f + 1 exceeded by " +
                                       FormatNumber(row.worst_recursion_excess)});
      }
      if (j == 0) continue;
      const auto& prev = run.rows[j - 1];
      if (row.sup_trajectory_gap > prev.sup_trajectory_gap + slack) {
        result.findings.push_back({true, at,
                                   "trajectory gap " + FormatNumber(row.sup_trajectory_gap) +
                                       " increased from " + FormatNumber(prev.sup_trajectory_gap)});
      }
      if (row.sup_control_gap > prev.sup_control_gap + slack) {
        result.findings.push_back({true, at,
                                   "control gap " + FormatNumber(row.sup_control_gap) +
                                       " increased from " + FormatNumber(prev.sup_control_gap)});
      }
    }
    result.runs.push_back(std::move(run));
  }
  return result;
}

ClosureRun ClosureResiduals(const Trajectory& traj, const MeasureVectorField& field,
                            std::span<const SplineBump> tests) {
  const int n = traj.config.n;
  const double tau = traj.config.time_step();
  const size_t steps = traj.states.size();
  std::vector<FiberedMeasure> fields;
  double max_speed = 0.0;
  for (size_t l = 0; l + 1 < steps; ++l) {
    fields.push_back(field(traj.states[l]));
    for (const auto& fiber : fields.back().fibers()) {
      for (const Atom& v : fiber.atoms()) max_speed = std::max(max_speed, Norm(v.point));
    }
  }
  ClosureRun run{n, {}, {}};
  for (const SplineBump& g : tests) {
    auto integral = [&](const DiscreteMeasure& mu) {
      double s = 0.0;
      for (const Atom& a : mu.atoms()) s += a.weight * g.Value(a.point);
      return s;
    };
    const double target =
        g.GradientLipschitz() * (1.0 + max_speed) * (1.0 + max_speed) * traj.config.horizon / n;
    const double start = integral(traj.states.front());
    double flux = 0.0;
    double worst = 0.0;
    for (size_t l = 0; l < steps; ++l) {
      const double residual = std::abs(integral(traj.states[l]) - start - flux);
      worst = std::max(worst, residual);
      run.rows.push_back({g.name, traj.times[l], residual, target});
      if (l + 1 == steps) break;
      const auto& v = fields[l];
      double rate = 0.0;
      for (size_t i = 0; i < v.base().size(); ++i) {
        const Atom& x = v.base().atom(i);
        const Point grad = g.Gradient(x.point);
        for (const Atom& a : v.fiber(i).atoms()) {
          double dot = 0.0;
          for (size_t d = 0; d < grad.size(); ++d) dot += grad[d] * a.point[d];
          rate += x.weight * a.weight * dot;
        }
      }
      flux += tau * rate;
    }
    run.max_residual.push_back(worst);
  }
  return run;
}

ClosureResult RunClosure(const Scenario& sc, const std::optional<MeasureVectorField>& field) {
  RequireNList(sc);
  const auto& mu0 = RequireInitial(sc);
  if (sc.test_functions.empty()) Missing(sc.name, "test_functions");
  const auto driver = sc.Driver();
  const auto& tested = field ? *field : driver;
  ClosureResult result;
  for (int n : sc.n_list) CheckHorizon(sc, n, result.findings);
  result.runs.resize(sc.n_list.size());
  ParallelFor(sc.n_list.size(), [&](size_t i) {
    const auto traj = SolveLas(driver, mu0, LasConfig::Create(sc.n_list[i], sc.horizon));
    result.runs[i] = ClosureResiduals(traj, tested, sc.test_functions);
  });
  const double root_dim = std::sqrt(static_cast<double>(sc.system->dim()));
  for (const auto& run : result.runs) {
    for (const auto& row : run.rows) {
      // The scheme moves along velocities snapped to the 1/N grid; that
      // perturbation contributes at most sup|grad g| sqrt(n) T / N.
      const auto* g = &*std::find_if(sc.test_functions.begin(), sc.test_functions.end(),
                                     [&](const SplineBump& b) { return b.name == row.test_function; });
      const double slack = g->GradientBound() * root_dim * sc.horizon / run.n;
      if (row.residual > row.target + slack) {
        result.findings.push_back(
            {true,
             Where("closure", "N=" + std::to_string(run.n) + "," + row.test_function +
                                  ",t=" + FormatNumber(row.t)),
             "residual " + FormatNumber(row.residual) + " exceeds target " +
                 FormatNumber(row.target) + " + " + FormatNumber(slack)});
      }
    }
  }
  return result;
}

SynthesisResult RunSynthesis(const Scenario& sc) {
  if (!sc.field) Missing(sc.name, "mvf");
  if (sc.eps_list.empty()) Missing(sc.name, "eps_list");
  if (sc.probes.empty()) Missing(sc.name, "probes");
  const auto& field = *sc.field;
  SynthesisResult result;
  std::vector<std::vector<SynthesisRow>> rows(sc.eps_list.size());
  std::vector<std::vector<SynthesisCell>> cells(sc.eps_list.size());
  ParallelFor(sc.eps_list.size(), [&](size_t e) {
    const double eps = sc.eps_list[e];
    const auto mc = SynthesizeControl(sc.system, field, eps, sc.system->box());
    for (size_t p = 0; p < sc.probes.size(); ++p) {
      const auto& mu = sc.probes[p];
      const double error =
          PseudoDistance(field(mu), ControlToMvf(*sc.system, mc, mu), GroundMetric::Euclidean());
      rows[e].push_back({p, error, eps});
      const auto controls = mc(mu);
      for (size_t i = 0; i < mu.size(); ++i) {
        std::vector<int64_t> cell;
        if (!sc.n_list.empty()) {
          const double scale = static_cast<double>(sc.n_list.front()) * sc.n_list.front();
          for (double x : mu.atom(i).point) cell.push_back(FloorIndex(x, scale));
        }
        cells[e].push_back({eps, p, mu.atom(i).point, std::move(cell), controls.fiber(i)});
      }
    }
  });
  std::vector<std::pair<double, double>> worst;  // (eps, max error)
  for (size_t e = 0; e < sc.eps_list.size(); ++e) {
    double m = 0.0;
    for (const auto& row : rows[e]) {
      m = std::max(m, row.error);
      if (row.error > row.eps + 1e-9) {
        result.findings.push_back(
            {true,
             Where("certificate", "probe=" + std::to_string(row.probe) + ",eps=" + FormatNumber(row.eps)),
             "error " + FormatNumber(row.error) + " exceeds eps"});
      }
      result.rows.push_back(row);
    }
    worst.push_back({sc.eps_list[e], m});
    for (auto& c : cells[e]) result.table.push_back(std::move(c));
  }
  std::sort(worst.begin(), worst.end());
  for (size_t i = 1; i < worst.size(); ++i) {
    if (worst[i - 1].second > worst[i].second + 1e-12) {
      result.findings.push_back({false, Where("certificate", "eps=" + FormatNumber(worst[i - 1].first)),
                                 "error did not shrink with eps"});
    }
  }
  return result;
}

SolveResult RunSolve(const Scenario& sc, int n) {
  const auto& mu0 = RequireInitial(sc);
  SolveResult result;
  CheckHorizon(sc, n, result.findings);
  const double c = SublinearConstant(*sc.system);
  result.a_priori_radius = APrioriRadius(mu0.SupportRadius(), c, sc.horizon);
  if (result.a_priori_radius > n) {
    result.findings.push_back({false, "solve",
                               "a-priori support radius " + FormatNumber(result.a_priori_radius) +
                                   " exceeds the lattice box [-N, N]"});
  }
  result.trajectory = SolveLas(sc.Driver(), mu0, LasConfig::Create(n, sc.horizon));
  const auto& traj = result.trajectory;
  for (size_t l = 0; l < traj.states.size(); ++l) {
    const auto& s = traj.states[l];
    result.rows.push_back({traj.times[l], s.size(), s.SupportRadius(),
                           l ? WassersteinDistance(traj.states[l - 1], s) : 0.0});
  }
  result.time_modulus = TimeModulusCheck(traj);
  result.time_modulus_envelope = TimeModulusEnvelope(traj, *sc.system);
  if (result.time_modulus > result.time_modulus_envelope) {
    result.findings.push_back({true, "solve",
                               "time modulus " + FormatNumber(result.time_modulus) +
                                   " exceeds " + FormatNumber(result.time_modulus_envelope)});
  }
  if (traj.mass_error > 1e-12 * static_cast<double>(traj.states.size())) {
    result.findings.push_back({true, "solve", "mass error " + FormatNumber(traj.mass_error)});
  }
  return result;
}

std::string FormatNumber(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void WriteCsv(const std::filesystem::path& path, const std::vector<std::string>& header,
              const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  auto line = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << "\n";
  };
  line(header);
  for (const auto& row : rows) {
    if (row.size() != header.size()) {
      throw Error(ErrorCode::kInvalidArgument, "CSV row width differs from header");
    }
    line(row);
  }
}

}  // namespace mdelab
