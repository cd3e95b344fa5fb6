// Copyright 2026 The Persona Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "persona/error.h"

namespace persona {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidShape: return "invalid-shape";
    case ErrorKind::kNonFinite: return "non-finite";
    case ErrorKind::kDegenerateMask: return "degenerate-mask";
    case ErrorKind::kEmptyInput: return "empty-input";
    case ErrorKind::kTrainingDivergence: return "training-divergence";
    case ErrorKind::kInputEncoding: return "input-encoding";
    case ErrorKind::kInvalidId: return "invalid-id";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kInsufficientData: return "insufficient-data";
    case ErrorKind::kShortInput: return "short-input";
    case ErrorKind::kConditionArity: return "condition-arity";
    case ErrorKind::kLabelMissing: return "label-missing";
    case ErrorKind::kSeedPool: return "seed-pool";
    case ErrorKind::kMissingOracle: return "missing-oracle";
    case ErrorKind::kConfiguration: return "configuration";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

bool is_user_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kTrainingDivergence:
    case ErrorKind::kNonFinite:
    case ErrorKind::kInvalidShape:
      return false;
    default:
      return true;
  }
}

}  // namespace persona
