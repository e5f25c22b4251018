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

#include "mdelab/io.h"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "mdelab/error.h"
#include "mdelab/synthesis.h"

namespace mdelab {
namespace {

[[noreturn]] void Fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kParseError, where + ": " + what);
}

const Json& Require(const Json& doc, const char* key, const std::string& where) {
  if (!doc.is_object()) Fail(where, "expected an object");
  auto it = doc.find(key);
  if (it == doc.end()) Fail(where + "." + key, "missing field");
  return *it;
}

double Number(const Json& j, const std::string& where) {
  if (!j.is_number()) Fail(where, "expected a number");
  return j.get<double>();
}

int Integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) Fail(where, "expected an integer");
  return j.get<int>();
}

std::string Text(const Json& j, const std::string& where) {
  if (!j.is_string()) Fail(where, "expected a string");
  return j.get<std::string>();
}

std::vector<double> Numbers(const Json& j, const std::string& where) {
  if (!j.is_array()) Fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (size_t i = 0; i < j.size(); ++i) {
    out.push_back(Number(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<std::vector<double>> Rows(const Json& j, const std::string& where) {
  if (!j.is_array()) Fail(where, "expected an array of rows");
  std::vector<std::vector<double>> out;
  for (size_t i = 0; i < j.size(); ++i) {
    out.push_back(Numbers(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Eigen::MatrixXd Matrix(const Json& j, int rows, int cols, const std::string& where) {
  const auto data = Rows(j, where);
  if (static_cast<int>(data.size()) != rows) {
    Fail(where, "expected " + std::to_string(rows) + " rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(data[r].size()) != cols) {
      Fail(where + "[" + std::to_string(r) + "]",
           "expected " + std::to_string(cols) + " columns");
    }
    for (int c = 0; c < cols; ++c) m(r, c) = data[r][c];
  }
  return m;
}

Eigen::VectorXd Vector(const Json& j, int size, const std::string& where) {
  const auto data = Numbers(j, where);
  if (static_cast<int>(data.size()) != size) {
    Fail(where, "expected " + std::to_string(size) + " entries");
  }
  return Eigen::Map<const Eigen::VectorXd>(data.data(), size);
}

// Atoms as [[x..., w], ...] with the point dimension inferred or checked.
DiscreteMeasure AtomList(const Json& j, std::optional<int> dim, const std::string& where) {
  if (!j.is_array() || j.empty()) Fail(where, "expected a nonempty atom list");
  std::vector<Atom> atoms;
  for (size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    auto row = Numbers(j[i], at);
    if (row.size() < 2) Fail(at, "an atom needs coordinates and a weight");
    if (dim && static_cast<int>(row.size()) != *dim + 1) {
      Fail(at, "expected " + std::to_string(*dim) + " coordinates and a weight");
    }
    const double w = row.back();
    row.pop_back();
    atoms.push_back({std::move(row), w});
  }
  try {
    return DiscreteMeasure::Create(std::move(atoms));
  } catch (const Error& e) {
    throw Error(e.code(), where + " (" + e.what() + ")");
  }
}

// Rethrows library validation failures with the document location attached.
template <typename F>
auto Located(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParseError) throw;
    throw Error(e.code(), where + " (" + e.what() + ")");
  }
}

}  // namespace

Json LoadJson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(path.string(), "cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    Fail(path.string(), e.what());
  }
}

std::string MeasureToJson(const DiscreteMeasure& mu) {
  std::string out = "{\"dim\": " + std::to_string(mu.dim()) + ", \"atoms\": [";
  char buf[32];
  for (size_t i = 0; i < mu.size(); ++i) {
    out += i ? ", [" : "[";
    for (double x : mu.atom(i).point) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out += buf;
      out += ", ";
    }
    std::snprintf(buf, sizeof buf, "%.17g", mu.atom(i).weight);
    out += buf;
    out += "]";
  }
  return out + "]}";
}

void WriteMeasure(const std::filesystem::path& path, const DiscreteMeasure& mu) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  out << MeasureToJson(mu) << "\n";
}

Json DocumentReader::Resolve(const Json& doc, const std::string& where) const {
  std::filesystem::path file;
  if (doc.is_string()) {
    file = doc.get<std::string>();
  } else if (doc.is_object() && doc.size() == 1 && doc.contains("file")) {
    file = Text(doc["file"], where + ".file");
  } else {
    return doc;
  }
  if (file.is_relative()) file = base_ / file;
  return LoadJson(file);
}

DiscreteMeasure DocumentReader::Measure(const Json& raw, const std::string& where) const {
  const Json doc = Resolve(raw, where);
  const int dim = Integer(Require(doc, "dim", where), where + ".dim");
  if (dim <= 0) Fail(where + ".dim", "must be positive");
  return AtomList(Require(doc, "atoms", where), dim, where + ".atoms");
}

GroundMetric DocumentReader::Metric(const Json& raw, const std::string& where) const {
  const Json doc = Resolve(raw, where);
  auto d = Rows(Require(doc, "d", where), where + ".d");
  std::vector<std::string> labels;
  if (doc.contains("labels")) {
    const Json& l = doc["labels"];
    if (!l.is_array()) Fail(where + ".labels", "expected an array of strings");
    for (size_t i = 0; i < l.size(); ++i) {
      labels.push_back(Text(l[i], where + ".labels[" + std::to_string(i) + "]"));
    }
  }
  return Located(where, [&] { return GroundMetric::IndexedControl(d, labels); });
}

std::shared_ptr<const ControlSystem> DocumentReader::System(const Json& raw,
                                                            const std::string& where) const {
  const Json doc = Resolve(raw, where);
  const int dim = Integer(Require(doc, "dim", where), where + ".dim");
  if (dim <= 0) Fail(where + ".dim", "must be positive");
  const std::string family_name = Text(Require(doc, "family", where), where + ".family");
  const auto family = ParseDynamicsFamily(family_name);
  if (!family) Fail(where + ".family", "unknown family '" + family_name + "'");

  const Json& controls_doc = Require(doc, "controls", where);
  auto controls = Rows(controls_doc, where + ".controls");
  if (controls.empty()) Fail(where + ".controls", "need at least one control");
  const int m = static_cast<int>(controls.front().size());

  const Json empty = Json::object();
  const Json& coeff = doc.contains("coefficients") ? doc["coefficients"] : empty;
  const std::string cw = where + ".coefficients";
  Dynamics dynamics;
  switch (*family) {
    case DynamicsFamily::kControlTranslation:
      dynamics = Dynamics::Translation();
      break;
    case DynamicsFamily::kDampedDrive:
      dynamics = Dynamics::DampedDrive();
      break;
    case DynamicsFamily::kAffine:
      dynamics = Dynamics::Affine(Matrix(Require(coeff, "A", cw), dim, dim, cw + ".A"),
                                  Matrix(Require(coeff, "B", cw), dim, m, cw + ".B"),
                                  coeff.contains("c") ? Vector(coeff["c"], dim, cw + ".c")
                                                      : Eigen::VectorXd::Zero(dim));
      break;
    case DynamicsFamily::kBilinear:
      dynamics = Dynamics::Bilinear(Matrix(Require(coeff, "A", cw), dim, dim, cw + ".A"),
                                    Matrix(Require(coeff, "D", cw), dim, dim, cw + ".D"),
                                    coeff.contains("b") ? Vector(coeff["b"], dim, cw + ".b")
                                                        : Eigen::VectorXd::Zero(dim));
      break;
  }

  std::optional<GroundMetric> metric;
  if (doc.contains("control_metric")) {
    const Json& cm = doc["control_metric"];
    if (!(cm.is_string() && cm.get<std::string>() == "euclidean")) {
      metric = Metric(cm, where + ".control_metric");
    }
  }
  const double lipschitz = Number(Require(doc, "L_f", where), where + ".L_f");
  const int u0 = doc.contains("u0") ? Integer(doc["u0"], where + ".u0") : 0;
  if (u0 < 0) Fail(where + ".u0", "must be a control index");

  StateBox box;
  const auto box_rows = Rows(Require(doc, "state_box", where), where + ".state_box");
  if (static_cast<int>(box_rows.size()) != dim) {
    Fail(where + ".state_box", "expected one [lo, hi] pair per axis");
  }
  for (int i = 0; i < dim; ++i) {
    if (box_rows[i].size() != 2 || !(box_rows[i][0] < box_rows[i][1])) {
      Fail(where + ".state_box[" + std::to_string(i) + "]", "expected [lo, hi] with lo < hi");
    }
    box.lo.push_back(box_rows[i][0]);
    box.hi.push_back(box_rows[i][1]);
  }
  return Located(where, [&] {
    return std::make_shared<const ControlSystem>(
        ControlSystem::Create(dim, std::move(dynamics), std::move(controls), metric,
                              lipschitz, static_cast<size_t>(u0), std::move(box)));
  });
}

MeasureControl DocumentReader::Control(const Json& raw,
                                       std::shared_ptr<const ControlSystem> sys,
                                       const std::string& where) const {
  const Json doc = Resolve(raw, where);
  const std::string rule = Text(Require(doc, "rule", where), where + ".rule");
  const int n = sys->dim();
  const int m = sys->control_dim();
  if (rule == "constant") {
    auto fiber = AtomList(Require(doc, "fiber", where), m, where + ".fiber");
    return Located(where, [&] { return ConstantFiberControl(*sys, std::move(fiber)); });
  }
  if (rule == "feedback") {
    auto gain = Matrix(Require(doc, "gain", where), m, n, where + ".gain");
    Eigen::VectorXd offset = doc.contains("offset")
                                 ? Vector(doc["offset"], m, where + ".offset")
                                 : Eigen::VectorXd::Zero(m);
    return FeedbackControl(*sys, std::move(gain), std::move(offset));
  }
  if (rule == "state-mixed") {
    auto first = AtomList(Require(doc, "first", where), m, where + ".first");
    auto second = AtomList(Require(doc, "second", where), m, where + ".second");
    auto direction = Numbers(Require(doc, "direction", where), where + ".direction");
    if (static_cast<int>(direction.size()) != n) {
      Fail(where + ".direction", "expected " + std::to_string(n) + " entries");
    }
    const double threshold =
        doc.contains("threshold") ? Number(doc["threshold"], where + ".threshold") : 0.0;
    const double sharpness =
        doc.contains("sharpness") ? Number(doc["sharpness"], where + ".sharpness") : 1.0;
    return Located(where, [&] {
      return StateMixedControl(*sys, std::move(first), std::move(second),
                               std::move(direction), threshold, sharpness);
    });
  }
  if (rule == "synthesized") {
    auto field = Field(Require(doc, "mvf", where), sys, where + ".mvf");
    const double eps = Number(Require(doc, "eps", where), where + ".eps");
    if (!(eps > 0)) Fail(where + ".eps", "must be positive");
    return SynthesizeControl(sys, std::move(field), eps, sys->box());
  }
  Fail(where + ".rule", "unknown rule '" + rule + "'");
}

MeasureVectorField DocumentReader::Field(const Json& raw,
                                         std::shared_ptr<const ControlSystem> sys,
                                         const std::string& where) const {
  const Json doc = Resolve(raw, where);
  const std::string kind = Text(Require(doc, "kind", where), where + ".kind");
  const int n = sys->dim();
  if (kind == "from-control") {
    return FieldFromControl(sys, Control(Require(doc, "control", where), sys,
                                         where + ".control"));
  }
  if (kind == "relaxed-constant") {
    auto fiber = AtomList(Require(doc, "fiber", where), sys->control_dim(), where + ".fiber");
    return Located(where, [&] {
      return FieldFromControl(sys, ConstantFiberControl(*sys, std::move(fiber)));
    });
  }
  if (kind == "fixed-velocity") {
    return FixedVelocityField(
        AtomList(Require(doc, "velocities", where), n, where + ".velocities"));
  }
  if (kind == "splitting") {
    // Half the mass at +e_1 and half at -e_1.
    Point plus(n, 0.0), minus(n, 0.0);
    plus[0] = 1.0;
    minus[0] = -1.0;
    return FixedVelocityField(DiscreteMeasure::Create({{minus, 0.5}, {plus, 0.5}}));
  }
  if (kind == "mean-seeking") return MeanSeekingField(sys);
  Fail(where + ".kind", "unknown field kind '" + kind + "'");
}

bool IsDeterministicControl(const Json& doc) {
  if (!doc.is_object() || !doc.contains("rule") || !doc["rule"].is_string()) return false;
  const auto rule = doc["rule"].get<std::string>();
  if (rule == "feedback") return true;
  return rule == "constant" && doc.contains("fiber") && doc["fiber"].is_array() &&
         doc["fiber"].size() == 1;
}

}  // namespace mdelab
