#include "beam/textio.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

namespace beam {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string format_u64(std::uint64_t x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const std::string& what) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double x = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::runtime_error(what + ": not a number: '" + std::string(s) + "'");
  }
  return x;
}

long long parse_int(std::string_view s, const std::string& what) {
  long long x = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::runtime_error(what + ": not an integer: '" + std::string(s) + "'");
  }
  return x;
}

std::uint64_t parse_u64(std::string_view s, const std::string& what) {
  std::uint64_t x = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::runtime_error(what + ": not an unsigned integer: '" +
                             std::string(s) + "'");
  }
  return x;
}

}  // namespace beam
