// Copyright 2026 The evcs-forensics Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evcsf {

enum class ErrorCode {
    MalformedTimestamp,
    InvalidConfig,
    EmptyState,
    UnknownEntity,
    IndexOutOfRange,
    InvalidModel,
    ZeroMarginal,
    EmptyTimeline,
    FileUnreadable,
    InvalidFilter,
    EmptyGroup,
    MissingAttribution,
    MalformedDocument,
    InvalidScenario,
    MismatchedOrigin,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MalformedTimestamp: return "MalformedTimestamp";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::EmptyState: return "EmptyState";
        case ErrorCode::UnknownEntity: return "UnknownEntity";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::InvalidModel: return "InvalidModel";
        case ErrorCode::ZeroMarginal: return "ZeroMarginal";
        case ErrorCode::EmptyTimeline: return "EmptyTimeline";
        case ErrorCode::FileUnreadable: return "FileUnreadable";
        case ErrorCode::InvalidFilter: return "InvalidFilter";
        case ErrorCode::EmptyGroup: return "EmptyGroup";
        case ErrorCode::MissingAttribution: return "MissingAttribution";
        case ErrorCode::MalformedDocument: return "MalformedDocument";
        case ErrorCode::InvalidScenario: return "InvalidScenario";
        case ErrorCode::MismatchedOrigin: return "MismatchedOrigin";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the ErrorCode values so
/// callers (the CLI in particular) can map it onto a stable exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace evcsf
