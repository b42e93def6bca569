#pragma once

// Small text helpers shared by the CSV dumps, trace output and loaders.

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pothole/errors.hpp"

namespace pothole::text {

/// Shortest round-trippable decimal rendering; -0 prints as 0.
inline std::string number(double value)
{
    if (value == 0.0) {
        return "0";
    }
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) {
        throw std::runtime_error("number formatting failed");
    }
    return std::string(buf, end);
}

inline std::string number(std::int64_t value) { return std::to_string(value); }
inline std::string number(std::uint64_t value) { return std::to_string(value); }

inline double parse_double(std::string_view field, std::string_view what)
{
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("invalid number for " + std::string(what) + ": '" + std::string(field) + "'");
    }
    return value;
}

template <typename Int>
Int parse_int(std::string_view field, std::string_view what)
{
    Int value{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("invalid integer for " + std::string(what) + ": '" + std::string(field) + "'");
    }
    return value;
}

inline std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

/// Splits into lines, dropping a trailing '\r' and blank lines.
inline std::vector<std::string_view> lines(std::string_view body)
{
    std::vector<std::string_view> out;
    for (auto line : split(body, '\n')) {
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (!line.empty()) {
            out.push_back(line);
        }
    }
    return out;
}

/// Ids appear unquoted in CSV and space-separated traces.
inline bool valid_id(std::string_view id)
{
    if (id.empty()) {
        return false;
    }
    for (char c : id) {
        if (c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '=') {
            return false;
        }
    }
    return true;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Parses a headered CSV and checks the header matches `expected` exactly.
inline CsvTable parse_csv(std::string_view body, const std::vector<std::string>& expected)
{
    auto all = lines(body);
    if (all.empty()) {
        throw ParseError("empty CSV (missing header)");
    }
    CsvTable table;
    for (auto h : split(all.front(), ',')) {
        table.header.emplace_back(h);
    }
    if (table.header != expected) {
        throw ParseError("unexpected CSV header: '" + std::string(all.front()) + "'");
    }
    for (std::size_t i = 1; i < all.size(); ++i) {
        auto fields = split(all[i], ',');
        if (fields.size() != expected.size()) {
            throw ParseError("CSV line " + std::to_string(i + 1) + ": expected " + std::to_string(expected.size()) +
                             " fields, got " + std::to_string(fields.size()));
        }
        std::vector<std::string> row;
        row.reserve(fields.size());
        for (auto f : fields) {
            row.emplace_back(f);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i != 0) {
            out += sep;
        }
        out += parts[i];
    }
    return out;
}

} // namespace pothole::text
