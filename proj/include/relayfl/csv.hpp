#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace relayfl {

/// 12 significant digits in %g style, independent of the global locale.
std::string format_number(double v);

/// Empty string for nullopt.
std::string format_optional(const std::optional<double>& v);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_field(std::string_view text);

/// Splits one line, honouring double-quoted fields.
std::vector<std::string> parse_csv_line(std::string_view line);

}  // namespace relayfl
