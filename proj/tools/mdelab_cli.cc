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

// mdelab: command-line front end for the lattice scheme and its checks.
//
// Exit status: 0 on success, 1 on input errors, 2 when a bound is violated
// (or, with --strict, when any diagnostic fires).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mdelab/error.h"
#include "mdelab/experiments.h"
#include "mdelab/io.h"
#include "mdelab/las.h"
#include "mdelab/transport.h"

namespace fs = std::filesystem;
using namespace mdelab;

namespace {

struct Options {
  std::string scenario;
  std::string out;
  bool strict = false;
  int n = 0;
  std::vector<double> times;
  // ot
  std::string left, right, metric;
  bool plan = false;
  bool dual = false;
};

std::string JoinPoint(const Point& p) {
  std::string s;
  for (size_t i = 0; i < p.size(); ++i) s += (i ? " " : "") + FormatNumber(p[i]);
  return s;
}

Json FindingsJson(const std::vector<Finding>& findings) {
  Json list = Json::array();
  for (const auto& f : findings) {
    list.push_back({{"kind", f.envelope ? "envelope" : "diagnostic"},
                    {"where", f.where},
                    {"message", f.message}});
  }
  return list;
}

// Reports findings on stderr, writes the manifest and returns the exit code.
int Finish(const std::string& command, const Options& opt, const fs::path& out,
           const std::vector<Finding>& findings, Json manifest) {
  bool violated = false;
  for (const auto& f : findings) {
    const bool fatal = f.envelope || opt.strict;
    violated |= fatal;
    std::cerr << (f.envelope ? "VIOLATED " : (fatal ? "FAILED " : "warning ")) << f.where
              << ": " << f.message << "\n";
  }
  manifest["command"] = command;
  manifest["scenario"] = opt.scenario;
  manifest["strict"] = opt.strict;
  manifest["threads"] = WorkerCount();
  manifest["findings"] = FindingsJson(findings);
  manifest["status"] = violated ? "violated" : "ok";
  std::ofstream(out / "manifest.json") << manifest.dump(2) << "\n";
  std::cout << command << ": " << (violated ? "violated" : "ok") << " (" << out.string() << ")\n";
  return violated ? 2 : 0;
}

fs::path PrepareOut(const Options& opt, const std::string& command) {
  fs::path out = opt.out.empty() ? fs::path("out") / command : fs::path(opt.out);
  fs::create_directories(out);
  return out;
}

fs::path RunDir(const fs::path& out, int n) {
  fs::path dir = out / ("N" + std::to_string(n));
  fs::create_directories(dir);
  return dir;
}

int Ot(const Options& opt) {
  DocumentReader reader(fs::current_path());
  const auto a = reader.Measure(Json(opt.left), opt.left);
  const auto b = reader.Measure(Json(opt.right), opt.right);
  const GroundMetric metric =
      opt.metric.empty() ? GroundMetric::Euclidean() : reader.Metric(Json(opt.metric), opt.metric);
  const auto result = Wasserstein(a, b, metric);
  std::cout << "W " << FormatNumber(result.value) << "\n";
  if (opt.dual) {
    if (metric.kind() != GroundMetric::Kind::kEuclidean) {
      throw Error(ErrorCode::kInvalidArgument, "--dual supports the euclidean metric only");
    }
    std::cout << "dual " << FormatNumber(DualWasserstein(a, b)) << "\n";
  }
  if (opt.plan) {
    std::cout << "left,right,mass\n";
    for (const auto& e : result.plan.entries) {
      std::cout << JoinPoint(a.atom(e.left).point) << "," << JoinPoint(b.atom(e.right).point)
                << "," << FormatNumber(e.mass) << "\n";
    }
  }
  return 0;
}

int Solve(const Options& opt) {
  const Scenario sc = LoadScenario(opt.scenario);
  const int n = opt.n > 0 ? opt.n : (sc.n_list.empty() ? 0 : sc.n_list.front());
  if (n <= 0) throw Error(ErrorCode::kParseError, sc.name + ".N_list: missing (or pass --N)");
  const fs::path out = PrepareOut(opt, "solve");
  const auto result = RunSolve(sc, n);
  const auto& traj = result.trajectory;

  std::vector<std::vector<std::string>> rows;
  for (const auto& r : result.rows) {
    rows.push_back({FormatNumber(r.time), std::to_string(r.atom_count),
                    FormatNumber(r.support_radius), FormatNumber(r.w_to_previous)});
  }
  WriteCsv(out / "summary.csv", {"time", "atom_count", "support_radius", "W_to_previous"}, rows);

  Json written = Json::array();
  if (opt.times.empty()) {
    for (size_t l = 0; l < traj.states.size(); ++l) {
      const std::string file = "states_t" + std::to_string(l) + ".json";
      WriteMeasure(out / file, traj.states[l]);
      written.push_back({{"t", traj.times[l]}, {"file", file}});
    }
  } else {
    const auto field = sc.Driver();
    for (size_t i = 0; i < opt.times.size(); ++i) {
      const double t = opt.times[i];
      const double steps = t * n;
      const bool on_grid = std::abs(steps - std::round(steps)) < 1e-9;
      const std::string file = on_grid ? "states_t" + std::to_string(std::lround(steps)) + ".json"
                                       : "dense_" + std::to_string(i) + ".json";
      WriteMeasure(out / file, StateAt(traj, field, t));
      written.push_back({{"t", t}, {"file", file}});
    }
  }
  Json manifest;
  manifest["config"] = {{"N", traj.config.n},
                        {"T", traj.config.horizon},
                        {"steps", traj.config.steps},
                        {"remainder", traj.config.remainder}};
  manifest["provenance"] = traj.provenance;
  manifest["mass_error"] = traj.mass_error;
  manifest["max_atoms"] = traj.max_atoms;
  manifest["time_modulus"] = result.time_modulus;
  manifest["time_modulus_envelope"] = result.time_modulus_envelope;
  manifest["a_priori_radius"] = result.a_priori_radius;
  manifest["states"] = written;
  return Finish("solve", opt, out, result.findings, manifest);
}

int Convergence(const Options& opt) {
  const Scenario sc = LoadScenario(opt.scenario);
  const fs::path out = PrepareOut(opt, "convergence");
  const auto result = RunConvergence(sc);
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : result.rows) {
    rows.push_back({std::to_string(r.n), FormatNumber(r.gap_next),
                    r.gap_reference ? FormatNumber(*r.gap_reference) : ""});
  }
  WriteCsv(out / "convergence.csv", {"N", "W_N_2N", "W_N_reference"}, rows);
  Json manifest;
  manifest["N_list"] = sc.n_list;
  manifest["T"] = sc.horizon;
  manifest["reference"] = result.reference ? "fourth-order particle flow, step 1e-4" : "none";
  if (result.reference) WriteMeasure(out / "reference.json", *result.reference);
  return Finish("convergence", opt, out, result.findings, manifest);
}

int Semigroup(const Options& opt) {
  const Scenario sc = LoadScenario(opt.scenario);
  const fs::path out = PrepareOut(opt, "semigroup");
  const auto result = RunSemigroup(sc);
  for (const auto& run : result.runs) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : run.rows) {
      rows.push_back({FormatNumber(r.t), FormatNumber(r.gap), FormatNumber(r.bound)});
    }
    WriteCsv(RunDir(out, run.n) / "semigroup.csv", {"t", "W_mu_nu", "bound"}, rows);
  }
  Json manifest;
  manifest["N_list"] = sc.n_list;
  manifest["L_f"] = sc.system->lipschitz();
  manifest["C"] = SublinearConstant(*sc.system);
  manifest["bound_factor"] = 1.1;
  return Finish("semigroup", opt, out, result.findings, manifest);
}

int Stability(const Options& opt) {
  const Scenario sc = LoadScenario(opt.scenario);
  const fs::path out = PrepareOut(opt, "stability");
  const auto result = RunStability(sc);
  for (const auto& run : result.runs) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : run.rows) {
      rows.push_back({std::to_string(r.k), FormatNumber(r.sup_trajectory_gap),
                      FormatNumber(r.sup_control_gap)});
    }
    WriteCsv(RunDir(out, run.n) / "stability.csv", {"k", "sup_W_traj", "sup_W_control"}, rows);
  }
  Json manifest;
  manifest["N_list"] = sc.n_list;
  manifest["L_f"] = sc.system->lipschitz();
  manifest["sup_W_control"] = "estimated sup over probes and visited states";
  return Finish("stability", opt, out, result.findings, manifest);
}

int Closure(const Options& opt) {
  const Scenario sc = LoadScenario(opt.scenario);
  const fs::path out = PrepareOut(opt, "closure");
  const auto result = RunClosure(sc);
  Json maxima = Json::object();
  for (const auto& run : result.runs) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : run.rows) {
      rows.push_back({r.test_function, FormatNumber(r.t), FormatNumber(r.residual),
                      FormatNumber(r.target)});
    }
    WriteCsv(RunDir(out, run.n) / "closure.csv", {"test_function", "t", "residual", "target"},
             rows);
    Json per = Json::object();
    for (size_t g = 0; g < sc.test_functions.size(); ++g) {
      per[sc.test_functions[g].name] = run.max_residual[g];
    }
    maxima[std::to_string(run.n)] = per;
  }
  Json manifest;
  manifest["N_list"] = sc.n_list;
  manifest["max_residual"] = maxima;
  return Finish("closure", opt, out, result.findings, manifest);
}

int Synthesize(const Options& opt) {
  const Scenario sc = LoadScenario(opt.scenario);
  const fs::path out = PrepareOut(opt, "synthesize");
  const auto result = RunSynthesis(sc);
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : result.rows) {
    rows.push_back({std::to_string(r.probe), FormatNumber(r.error), FormatNumber(r.eps)});
  }
  WriteCsv(out / "certificate.csv", {"probe_id", "W_error", "eps"}, rows);
  Json entries = Json::array();
  for (const auto& c : result.table) {
    Json fiber = Json::array();
    for (const Atom& a : c.fiber.atoms()) {
      Json atom(a.point);
      atom.push_back(a.weight);
      fiber.push_back(atom);
    }
    entries.push_back({{"eps", c.eps}, {"probe", c.probe}, {"point", c.point},
                       {"cell", c.cell}, {"fiber", fiber}});
  }
  Json table;
  table["lattice_N"] = sc.n_list.empty() ? Json(nullptr) : Json(sc.n_list.front());
  table["entries"] = entries;
  std::ofstream(out / "control_table.json") << table.dump(2) << "\n";
  Json manifest;
  manifest["eps_list"] = sc.eps_list;
  manifest["probes"] = sc.probes.size();
  return Finish("synthesize", opt, out, result.findings, manifest);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice approximate solutions of controlled measure differential equations"};
  app.require_subcommand(1);
  Options opt;

  auto* ot = app.add_subcommand("ot", "Wasserstein distance between two measure files");
  ot->add_option("left", opt.left, "First measure file")->required();
  ot->add_option("right", opt.right, "Second measure file")->required();
  ot->add_option("--metric", opt.metric, "Control metric document (points are indices)");
  ot->add_flag("--plan", opt.plan, "Print the optimal plan as atom-pair rows");
  ot->add_flag("--dual", opt.dual, "Also solve the Kantorovich-Rubinstein dual");

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Command commands[] = {
      {"solve", "Run the lattice scheme and write the trajectory", Solve},
      {"synthesize", "Build an eps-certified control for a target field", Synthesize},
      {"convergence", "Gaps between resolutions and to the particle flow", Convergence},
      {"semigroup", "Gap between two solutions against the exponential envelope", Semigroup},
      {"stability", "Trajectory and control gaps along a control sequence", Stability},
      {"closure", "Weak-form residual along the lattice trajectory", Closure},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("scenario", opt.scenario, "Scenario document")->required();
    sub->add_option("--out", opt.out, "Output directory (default out/<command>)");
    sub->add_flag("--strict", opt.strict, "Treat diagnostics as failures");
    if (std::string(c.name) == "solve") {
      sub->add_option("--N", opt.n, "Resolution (default: first entry of N_list)");
      sub->add_option("--times", opt.times, "Output times (default: every lattice time)")
          ->delimiter(',');
    }
    subs.push_back({sub, &c});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    if (*ot) return Ot(opt);
    for (const auto& [sub, c] : subs) {
      if (*sub) return c->run(opt);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
