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

#include "fdbs/error.hpp"

namespace fdbs {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidRecord: return "InvalidRecord";
    case Errc::InvalidPrefixLen: return "InvalidPrefixLen";
    case Errc::InvalidCoverage: return "InvalidCoverage";
    case Errc::CoverageViolation: return "CoverageViolation";
    case Errc::DuplicateRecord: return "DuplicateRecord";
    case Errc::FormatError: return "FormatError";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::InvariantViolation: return "InvariantViolation";
    case Errc::ImageNotFound: return "ImageNotFound";
    case Errc::UnknownPod: return "UnknownPod";
    case Errc::UnknownService: return "UnknownService";
    case Errc::UnknownDeployment: return "UnknownDeployment";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::ServiceUnavailable: return "ServiceUnavailable";
    case Errc::UpdateStalled: return "UpdateStalled";
    case Errc::NameConflict: return "NameConflict";
    case Errc::NoCoverage: return "NoCoverage";
    case Errc::PartialFailure: return "PartialFailure";
    case Errc::UnreachableChild: return "UnreachableChild";
    case Errc::InvalidPredicate: return "InvalidPredicate";
    case Errc::DegenerateSamples: return "DegenerateSamples";
    case Errc::NoCrossover: return "NoCrossover";
    case Errc::BadRequest: return "BadRequest";
    case Errc::NotFound: return "NotFound";
    case Errc::StartupFailure: return "StartupFailure";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

std::optional<Errc> errc_from_name(std::string_view name) noexcept {
  for (int i = 0; i <= static_cast<int>(Errc::IoError); ++i) {
    auto code = static_cast<Errc>(i);
    if (errc_name(code) == name) return code;
  }
  return std::nullopt;
}

bool is_user_error(Errc code) noexcept {
  switch (code) {
    case Errc::ServiceUnavailable:
    case Errc::UpdateStalled:
    case Errc::PartialFailure:
    case Errc::StartupFailure:
      return false;
    default:
      return true;
  }
}

}  // namespace fdbs
