#include "hdport/core/panel.hpp"

#include "hdport/errors.hpp"
#include "hdport/io/table.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace hdp::core {

namespace {

bool parse_label_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

} // namespace

bool period_less(const std::string& a, const std::string& b) {
    double x = 0.0;
    double y = 0.0;
    if (parse_label_number(a, x) && parse_label_number(b, y)) return x < y;
    return a < b;
}

void validate_period_order(const std::vector<std::string>& periods) {
    // Mixed numeric / non-numeric labels fall back to lexicographic order
    // for the whole list so the comparison is transitive.
    bool all_numeric = true;
    double tmp = 0.0;
    for (const auto& p : periods) all_numeric = all_numeric && parse_label_number(p, tmp);
    for (std::size_t i = 1; i < periods.size(); ++i) {
        const bool ok = all_numeric ? period_less(periods[i - 1], periods[i]) : periods[i - 1] < periods[i];
        if (!ok) {
            throw ValidationError("period labels must be strictly increasing ('" + periods[i - 1] +
                                  "' followed by '" + periods[i] + "')");
        }
    }
}

ReturnPanel::ReturnPanel(std::vector<std::string> periods, std::vector<std::string> assets,
                         MatrixXd values)
    : periods_(std::move(periods)), assets_(std::move(assets)), values_(std::move(values)) {
    if (values_.rows() != static_cast<Index>(periods_.size()) ||
        values_.cols() != static_cast<Index>(assets_.size())) {
        throw ValidationError("return panel is " + std::to_string(values_.rows()) + "x" +
                              std::to_string(values_.cols()) + " but has " +
                              std::to_string(periods_.size()) + " period labels and " +
                              std::to_string(assets_.size()) + " asset identifiers");
    }
    if (!values_.allFinite()) {
        throw ValidationError("return panel contains non-finite values");
    }
    std::unordered_set<std::string> seen;
    for (const auto& a : assets_) {
        if (!seen.insert(a).second) {
            throw ValidationError("duplicate asset identifier '" + a + "'");
        }
    }
    validate_period_order(periods_);
}

ReturnPanel ReturnPanel::from_matrix(MatrixXd values) {
    std::vector<std::string> periods(static_cast<std::size_t>(values.rows()));
    std::vector<std::string> assets(static_cast<std::size_t>(values.cols()));
    for (std::size_t t = 0; t < periods.size(); ++t) periods[t] = std::to_string(t + 1);
    for (std::size_t j = 0; j < assets.size(); ++j) assets[j] = "a" + std::to_string(j + 1);
    return ReturnPanel(std::move(periods), std::move(assets), std::move(values));
}

ReturnPanel ReturnPanel::select_assets(const std::vector<Index>& columns) const {
    MatrixXd sub(values_.rows(), static_cast<Index>(columns.size()));
    std::vector<std::string> ids;
    ids.reserve(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        const Index c = columns[j];
        if (c < 0 || c >= values_.cols()) {
            throw ValidationError("asset column index out of range");
        }
        sub.col(static_cast<Index>(j)) = values_.col(c);
        ids.push_back(assets_[static_cast<std::size_t>(c)]);
    }
    return ReturnPanel(periods_, std::move(ids), std::move(sub));
}

ReturnPanel read_return_panel(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw SchemaError("return panel file is empty");
    }
    const char delim = io::detect_delimiter(line);
    const auto header = io::split_line(line, delim);
    if (header.size() < 2) {
        throw SchemaError("return panel header needs a period column and at least one asset column");
    }
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (header[j].empty()) {
            throw SchemaError("empty asset identifier in header column " + std::to_string(j + 1));
        }
    }
    std::vector<std::string> assets(header.begin() + 1, header.end());

    std::vector<std::string> periods;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (io::trim(line).empty()) continue;
        const auto cells = io::split_line(line, delim);
        if (cells.size() != header.size()) {
            throw SchemaError("line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                              " columns, header has " + std::to_string(header.size()));
        }
        if (cells[0].empty()) {
            throw SchemaError("line " + std::to_string(line_no) + " has an empty period label in column '" +
                              header[0] + "'");
        }
        periods.push_back(cells[0]);
        std::vector<double> row(assets.size());
        for (std::size_t j = 0; j < assets.size(); ++j) {
            row[j] = io::parse_number(cells[j + 1], assets[j]);
        }
        rows.push_back(std::move(row));
    }

    MatrixXd values(static_cast<Index>(rows.size()), static_cast<Index>(assets.size()));
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (std::size_t j = 0; j < assets.size(); ++j) {
            values(static_cast<Index>(t), static_cast<Index>(j)) = rows[t][j];
        }
    }
    try {
        return ReturnPanel(std::move(periods), std::move(assets), std::move(values));
    } catch (const ValidationError& e) {
        throw SchemaError(e.what());
    }
}

ReturnPanel read_return_panel_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open return panel file '" + path + "'");
    return read_return_panel(in);
}

void write_return_panel(std::ostream& out, const ReturnPanel& panel) {
    out << "period";
    for (const auto& a : panel.assets()) out << ',' << a;
    out << '\n';
    for (Index t = 0; t < panel.num_periods(); ++t) {
        out << panel.periods()[static_cast<std::size_t>(t)];
        for (Index j = 0; j < panel.num_assets(); ++j) out << ',' << io::format_number(panel.values()(t, j));
        out << '\n';
    }
}

} // namespace hdp::core
