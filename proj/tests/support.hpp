// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wildfire/error.hpp"

#include <filesystem>
#include <string>

namespace test_support {

/// Kind of the wildfire::Error thrown by `f`, or "" if nothing was thrown.
template <class F>
std::string error_kind(F&& f) {
    try {
        f();
    } catch (const wildfire::Error& e) {
        return e.kind();
    }
    return "";
}

template <class F>
wildfire::ErrorCategory error_category(F&& f) {
    try {
        f();
    } catch (const wildfire::Error& e) {
        return e.category();
    }
    return wildfire::ErrorCategory::Internal;
}

inline std::filesystem::path data_dir() { return std::filesystem::path(WILDFIRE_DATA_DIR); }

inline std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("wildfire_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace test_support
