// Copyright 2026 The fdbs Authors.
//
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

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fdbs {

enum class Errc {
  // geostore
  InvalidRecord,
  InvalidPrefixLen,
  InvalidCoverage,
  CoverageViolation,
  DuplicateRecord,
  FormatError,
  ChecksumMismatch,
  InvariantViolation,
  // clustersim
  ImageNotFound,
  UnknownPod,
  UnknownService,
  UnknownDeployment,
  InvalidSpec,
  ServiceUnavailable,
  UpdateStalled,
  // catalog / engine
  NameConflict,
  NoCoverage,
  PartialFailure,
  UnreachableChild,
  InvalidPredicate,
  // costmodel
  DegenerateSamples,
  NoCrossover,
  // gateway / cli
  BadRequest,
  NotFound,
  StartupFailure,
  IoError,
};

std::string_view errc_name(Errc code) noexcept;
std::optional<Errc> errc_from_name(std::string_view name) noexcept;

// Whether an error stems from caller input (CLI exit code 1) rather than an
// internal fault (exit code 2).
bool is_user_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace fdbs
