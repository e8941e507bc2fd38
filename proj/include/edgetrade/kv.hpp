// "key = value" text files with '#' comments, used for scenario configs,
// gas tables and optimizer grids.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "edgetrade/domain.hpp"

namespace edgetrade {

// Throws std::invalid_argument on malformed lines or duplicate keys.
std::map<std::string, std::string> parse_key_values(std::string_view text);
std::map<std::string, std::string> load_key_values(const std::string& path);

std::uint64_t parse_u64(std::string_view s);
double parse_double(std::string_view s);
std::vector<std::uint32_t> parse_u32_list(std::string_view s);  // "1,2,4"

// Accepts "3", "-2", "1/4" and "0.125".
Rational parse_rational(std::string_view s);

// Fixed-point rendering, rounded half away from zero: format_decimal(1/3, 6) == "0.333333".
std::string format_decimal(const Rational& r, unsigned digits);

}  // namespace edgetrade
