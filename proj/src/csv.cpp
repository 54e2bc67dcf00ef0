#include "rmplate/csv.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace rmplate {

void write_schema_line(std::ostream &out, std::string_view kind) {
    out << "# rmplate-csv v" << kCsvSchemaVersion << ' ' << kind << '\n';
}

std::string format_number(double value) {
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, result.ptr);
}

} // namespace rmplate
