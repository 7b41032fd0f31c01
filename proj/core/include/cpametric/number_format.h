#pragma once

#include <string>
#include <string_view>

namespace cpametric {

// Shortest decimal string that parses back to the same double; integral
// values keep a trailing ".0" (1.0, -3.0, 0.0).
std::string format_number(double value);

// Parses a full decimal string. Throws SyntaxError on trailing garbage.
double parse_number(std::string_view text);

}  // namespace cpametric
