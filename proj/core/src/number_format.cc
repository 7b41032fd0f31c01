#include "cpametric/number_format.h"

#include <array>
#include <charconv>
#include <cmath>

#include "cpametric/error.h"

namespace cpametric {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  std::string out(buf.data(), ptr);
  if (out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

double parse_number(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw SyntaxError(static_cast<std::size_t>(ptr - text.data()),
                      "malformed number '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace cpametric
