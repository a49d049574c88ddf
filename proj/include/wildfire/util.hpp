// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wildfire {

using Rng = std::mt19937_64;

/// Stable 64-bit mix of a master seed and a stream index (splitmix64 finalizer).
/// Used wherever a sub-computation needs its own stream so that results do not
/// depend on scheduling order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// Runs fn(i) for i in [0, n) on up to `threads` workers. fn must only write
/// to slots owned by index i.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

/// Process-wide default thread count used by the pipeline (settable by --threads).
std::size_t default_threads() noexcept;
void set_default_threads(std::size_t threads) noexcept;

std::string sha256_hex(std::string_view bytes);
std::string sha256_hex(std::span<const double> values);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
/// Fixed-point text with `decimals` digits after the point.
std::string format_fixed(double value, int decimals);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

std::string_view trim(std::string_view text) noexcept;
std::string to_upper(std::string_view text);
bool iequals(std::string_view a, std::string_view b) noexcept;
/// Uppercase, trimmed, internal whitespace runs collapsed to a single space.
std::string normalize_name(std::string_view text);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace wildfire
