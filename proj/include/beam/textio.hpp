#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace beam {

// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double x);
std::string format_u64(std::uint64_t x);

// Strict parsers; `what` names the value in error messages.
double parse_double(std::string_view s, const std::string& what);
long long parse_int(std::string_view s, const std::string& what);
std::uint64_t parse_u64(std::string_view s, const std::string& what);

}  // namespace beam
