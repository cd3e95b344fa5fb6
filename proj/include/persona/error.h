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

#ifndef PERSONA_ERROR_H_
#define PERSONA_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace persona {

enum class ErrorKind {
  kInvalidShape,
  kNonFinite,
  kDegenerateMask,
  kEmptyInput,
  kTrainingDivergence,
  kInputEncoding,
  kInvalidId,
  kValidation,
  kInsufficientData,
  kShortInput,
  kConditionArity,
  kLabelMissing,
  kSeedPool,
  kMissingOracle,
  kConfiguration,
  kParse,
  kIo,
};

std::string_view error_kind_name(ErrorKind kind);

// True for kinds caused by bad user input rather than an internal fault.
bool is_user_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace persona

#endif  // PERSONA_ERROR_H_
