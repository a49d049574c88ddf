// SPDX-License-Identifier: Apache-2.0
#include "wildfire/csv.hpp"

#include "wildfire/error.hpp"
#include "wildfire/util.hpp"

namespace wildfire::csv {

std::optional<std::size_t> Table::find(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (iequals(trim(header[i]), name)) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> Table::find_any(std::initializer_list<std::string_view> aliases) const {
    for (auto alias : aliases) {
        if (auto idx = find(alias)) return idx;
    }
    return std::nullopt;
}

namespace {

bool is_blank(const std::vector<std::string>& row) {
    return row.size() == 1 && trim(row[0]).empty();
}

}  // namespace

Table parse(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

    Table table;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    std::size_t line = 1;
    std::size_t row_start_line = 1;

    auto finish_row = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
        if (is_blank(row)) {
            row.clear();
            return;
        }
        if (table.header.empty()) {
            table.header = std::move(row);
        } else {
            if (row.size() != table.header.size()) {
                fail_data("MalformedCsv", "line " + std::to_string(row_start_line) + ": expected " +
                                              std::to_string(table.header.size()) + " fields, found " +
                                              std::to_string(row.size()));
            }
            table.rows.push_back(std::move(row));
            table.row_lines.push_back(row_start_line);
        }
        row.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty() || field_was_quoted) {
                    fail_data("MalformedCsv", "line " + std::to_string(line) + ": stray quote inside field");
                }
                in_quotes = true;
                field_was_quoted = true;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                field_was_quoted = false;
                break;
            case '\r':
                break;
            case '\n':
                finish_row();
                ++line;
                row_start_line = line;
                break;
            default:
                if (field_was_quoted) {
                    fail_data("MalformedCsv", "line " + std::to_string(line) + ": text after closing quote");
                }
                field.push_back(c);
        }
    }
    if (in_quotes) fail_data("MalformedCsv", "line " + std::to_string(row_start_line) + ": unterminated quote");
    if (!field.empty() || !row.empty() || field_was_quoted) finish_row();
    if (table.header.empty()) fail_data("MalformedCsv", "line 1: missing header row");
    return table;
}

std::string quote(std::string_view field) {
    const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos ||
                       (!field.empty() && (field.front() == ' ' || field.back() == ' '));
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string join_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += quote(fields[i]);
    }
    out.push_back('\n');
    return out;
}

}  // namespace wildfire::csv
