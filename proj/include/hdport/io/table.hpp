#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hdp::io {

char detect_delimiter(std::string_view header);

/// Splits one line on `delim`, trimming surrounding whitespace and a
/// trailing carriage return. Quoting is not supported.
std::vector<std::string> split_line(std::string_view line, char delim);

std::string trim(std::string_view s);

/// Parses a decimal number; throws SchemaError naming `column` on failure.
double parse_number(const std::string& cell, const std::string& column);

/// Shortest round-trippable text for a double ("nan"/"inf" for non-finite).
std::string format_number(double value);

enum class OutputFormat { Delimited, Structured };

OutputFormat parse_output_format(const std::string& name);

using Cell = std::variant<double, long long, std::string>;

/**
 * Column-ordered table used for every CLI output. Delimited output is a CSV
 * header followed by one line per row; structured output is a JSON object
 * {"columns": [...], "rows": [[...], ...]}.
 */
class Table {
public:
    explicit Table(std::vector<std::string> columns);

    void add_row(std::vector<Cell> row);

    const std::vector<std::string>& columns() const noexcept { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }

    void write(std::ostream& out, OutputFormat format) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

} // namespace hdp::io
