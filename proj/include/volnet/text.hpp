#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace volnet::text {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

/// Shortest-safe round-trip rendering (17 significant digits).
std::string format_exact(double v);
/// Fixed rendering for human-facing tables and plot coordinates.
std::string format_fixed(double v, int decimals);

/// Full-string strict parse; rejects trailing garbage, empty input, and non-finite values.
bool parse_double(std::string_view s, double& out);
bool parse_size(std::string_view s, std::size_t& out);
bool parse_u64(std::string_view s, unsigned long long& out);

}  // namespace volnet::text
