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

#include "mdelab/error.h"

namespace mdelab {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kEmptyMeasure: return "EmptyMeasure";
    case ErrorCode::kNegativeWeight: return "NegativeWeight";
    case ErrorCode::kMassMismatch: return "MassMismatch";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kFiberCountMismatch: return "FiberCountMismatch";
    case ErrorCode::kFiberKindMismatch: return "FiberKindMismatch";
    case ErrorCode::kSolverFailure: return "SolverFailure";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kUnknownControlPoint: return "UnknownControlPoint";
    case ErrorCode::kSupportEscapesLattice: return "SupportEscapesLattice";
    case ErrorCode::kUnknownVelocity: return "UnknownVelocity";
    case ErrorCode::kNotAssociated: return "NotAssociated";
  }
  return "Unknown";
}

}  // namespace mdelab
