// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace wildfire {

/// Broad failure class; the CLI maps these onto exit codes.
enum class ErrorCategory {
    Config,    // bad user input or configuration
    Data,      // input data violates a contract
    Io,        // filesystem failure
    Internal,  // broken invariant inside the library
};

const char* category_name(ErrorCategory category) noexcept;

/// Every failure raised by the library. `kind()` names the specific condition
/// (for example "MissingColumn" or "UnparseableDate") so callers and tests can
/// match on it without parsing the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, std::string kind, const std::string& detail)
        : std::runtime_error(kind + ": " + detail), category_(category), kind_(std::move(kind)) {}

    ErrorCategory category() const noexcept { return category_; }
    const std::string& kind() const noexcept { return kind_; }

private:
    ErrorCategory category_;
    std::string kind_;
};

[[noreturn]] inline void fail_data(std::string kind, const std::string& detail) {
    throw Error(ErrorCategory::Data, std::move(kind), detail);
}

[[noreturn]] inline void fail_config(std::string kind, const std::string& detail) {
    throw Error(ErrorCategory::Config, std::move(kind), detail);
}

[[noreturn]] inline void fail_io(std::string kind, const std::string& detail) {
    throw Error(ErrorCategory::Io, std::move(kind), detail);
}

[[noreturn]] inline void fail_internal(std::string kind, const std::string& detail) {
    throw Error(ErrorCategory::Internal, std::move(kind), detail);
}

}  // namespace wildfire
