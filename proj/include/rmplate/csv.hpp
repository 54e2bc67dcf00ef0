#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

namespace rmplate {

inline constexpr std::string_view kCsvSchemaVersion = "1";

// "# rmplate-csv v1 <kind>". Readers skip lines starting with '#'.
void write_schema_line(std::ostream &out, std::string_view kind);

// Shortest text that round-trips the double; stable across runs.
std::string format_number(double value);

} // namespace rmplate
