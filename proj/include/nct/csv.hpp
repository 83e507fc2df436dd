#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace nct {

/// RFC-4180 field quoting: quotes only when the field needs it.
std::string csv_escape(std::string_view field);

std::string csv_join(const std::vector<std::string>& fields);

/// Parses CSV text (quoted fields, embedded newlines) into rows of fields.
/// A trailing newline does not produce an empty row.
std::vector<std::vector<std::string>> csv_parse(std::string_view text);

/// "%.17g"-style shortest-faithful double rendering helpers.
std::string format_double(double v, int precision = 17);

} // namespace nct
