#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pathstab::csv {

// Minimal comma-separated tables: no quoting, fields must not contain commas
// or newlines. That is all the canonical node/edge formats need.

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line per row
    std::string source;                     // file path or "<string>"
};

Table read_file(const std::string& path);
Table read_text(std::string_view text, std::string source = "<string>");

/// Parses a full-string floating point number; nullopt on any trailing junk.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

/// Shortest round-trip representation, locale-independent.
std::string format_double(double v);

void write_file(const std::string& path, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows);

}  // namespace pathstab::csv
