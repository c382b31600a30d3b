#include "hdport/io/table.hpp"

#include "hdport/errors.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace hdp::io {

char detect_delimiter(std::string_view header) {
    if (header.find('\t') != std::string_view::npos) return '\t';
    if (header.find(';') != std::string_view::npos) return ';';
    return ',';
}

std::string trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_line(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

double parse_number(const std::string& cell, const std::string& column) {
    if (cell.empty()) {
        throw SchemaError("empty value in column '" + column + "'");
    }
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw SchemaError("non-numeric value '" + cell + "' in column '" + column + "'");
    }
    return value;
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc()) {
        std::snprintf(buf.data(), buf.size(), "%.17g", value);
        return std::string(buf.data());
    }
    return std::string(buf.data(), ptr);
}

OutputFormat parse_output_format(const std::string& name) {
    if (name == "csv" || name == "delimited") return OutputFormat::Delimited;
    if (name == "json" || name == "structured") return OutputFormat::Structured;
    throw ValidationError("unknown output format '" + name + "' (expected csv or json)");
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size()) {
        throw ValidationError("table row has " + std::to_string(row.size()) + " cells, expected " +
                              std::to_string(columns_.size()));
    }
    rows_.push_back(std::move(row));
}

namespace {

std::string cell_text(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

nlohmann::json cell_json(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) {
        if (!std::isfinite(*d)) return format_number(*d);
        return *d;
    }
    if (const auto* i = std::get_if<long long>(&c)) return *i;
    return std::get<std::string>(c);
}

} // namespace

void Table::write(std::ostream& out, OutputFormat format) const {
    if (format == OutputFormat::Delimited) {
        for (std::size_t j = 0; j < columns_.size(); ++j) {
            out << (j ? "," : "") << columns_[j];
        }
        out << '\n';
        for (const auto& row : rows_) {
            for (std::size_t j = 0; j < row.size(); ++j) {
                out << (j ? "," : "") << cell_text(row[j]);
            }
            out << '\n';
        }
        return;
    }
    nlohmann::json doc;
    doc["columns"] = columns_;
    doc["rows"] = nlohmann::json::array();
    for (const auto& row : rows_) {
        auto jr = nlohmann::json::array();
        for (const auto& c : row) jr.push_back(cell_json(c));
        doc["rows"].push_back(std::move(jr));
    }
    out << doc.dump(2) << '\n';
}

} // namespace hdp::io
