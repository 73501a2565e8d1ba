#pragma once

#include <string>
#include <string_view>

namespace epidisc {

/// Shortest-safe decimal form with 17 significant digits; parses back to the
/// identical double.
std::string format_double(double value);

/// Strict full-token parse; throws InvalidInput on trailing garbage.
double parse_double(std::string_view token);
unsigned long long parse_u64(std::string_view token);

}  // namespace epidisc
