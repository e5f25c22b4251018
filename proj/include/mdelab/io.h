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

#ifndef MDELAB_IO_H_
#define MDELAB_IO_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mdelab/control.h"
#include "mdelab/measures.h"
#include "mdelab/transport.h"

namespace mdelab {

using Json = nlohmann::json;

// Reads and parses a JSON file; IO and syntax failures raise ParseError.
Json LoadJson(const std::filesystem::path& path);

// { "dim": n, "atoms": [[x_1, ..., x_n, w], ...] } with 17 significant digits.
std::string MeasureToJson(const DiscreteMeasure& mu);
void WriteMeasure(const std::filesystem::path& path, const DiscreteMeasure& mu);

// Documents are resolved relative to `base`: anywhere a document is expected,
// a string or {"file": path} loads it from disk instead. `where` is the field
// path reported in error messages.
class DocumentReader {
 public:
  explicit DocumentReader(std::filesystem::path base) : base_(std::move(base)) {}

  // Follows file references and returns the inline document.
  Json Resolve(const Json& doc, const std::string& where) const;

  DiscreteMeasure Measure(const Json& doc, const std::string& where) const;
  // { "labels": [...], "d": [[...]] }, indexed as points 0..k-1.
  GroundMetric Metric(const Json& doc, const std::string& where) const;
  // { "dim", "family", "coefficients", "controls", "control_metric", "L_f",
  //   "u0", "state_box" }.
  std::shared_ptr<const ControlSystem> System(const Json& doc,
                                              const std::string& where) const;
  // { "rule": "constant" | "feedback" | "state-mixed" | "synthesized", ... }.
  MeasureControl Control(const Json& doc,
                         std::shared_ptr<const ControlSystem> sys,
                         const std::string& where) const;
  // { "kind": "from-control" | "fixed-velocity" | "splitting" |
  //   "relaxed-constant" | "mean-seeking", ... }.
  MeasureVectorField Field(const Json& doc,
                           std::shared_ptr<const ControlSystem> sys,
                           const std::string& where) const;

  const std::filesystem::path& base() const { return base_; }

 private:
  std::filesystem::path base_;
};

// Whether a control document describes a deterministic, state-feedback rule,
// so that the particle ODE is an exact reference flow.
bool IsDeterministicControl(const Json& doc);

}  // namespace mdelab

#endif  // MDELAB_IO_H_
