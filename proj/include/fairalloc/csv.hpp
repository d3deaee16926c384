#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fairalloc::csv {

/// Splits one line on `delimiter`, honouring double-quoted fields ("" escapes a quote).
std::vector<std::string> split_line(std::string_view line, char delimiter = ',');

/// Shortest round-trippable text for a double (printf %.17g).
std::string format_double(double value);

/// Quotes a field if it contains the delimiter, a quote, or a newline.
std::string escape_field(std::string_view field, char delimiter = ',');

} // namespace fairalloc::csv
