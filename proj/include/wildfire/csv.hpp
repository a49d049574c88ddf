// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wildfire::csv {

/// RFC 4180 table: a header row and data rows of equal width.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines;  // 1-based source line of each data row

    /// Case-insensitive header lookup.
    std::optional<std::size_t> find(std::string_view name) const;
    /// First header matching any alias.
    std::optional<std::size_t> find_any(std::initializer_list<std::string_view> aliases) const;
};

/// Parses UTF-8 CSV with a header row. Throws Error{MalformedCsv} naming the
/// offending line on unterminated quotes or ragged rows. A leading UTF-8 BOM
/// is skipped and blank lines are ignored.
Table parse(std::string_view text);

std::string quote(std::string_view field);
std::string join_row(const std::vector<std::string>& fields);

}  // namespace wildfire::csv
