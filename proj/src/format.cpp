#include "epidisc/format.hpp"

#include <charconv>
#include <string>

#include "epidisc/error.hpp"

namespace epidisc {

std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
  double value = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw InvalidInput("not a number: '" + std::string(token) + "'");
  }
  return value;
}

unsigned long long parse_u64(std::string_view token) {
  unsigned long long value = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw InvalidInput("not an unsigned integer: '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace epidisc
