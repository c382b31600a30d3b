#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace hdp::core {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/**
 * T x N matrix of per-period excess returns with asset identifiers and
 * ordered period labels.
 *
 * Invariants (checked on construction):
 *  - values is periods.size() x assets.size(), all entries finite;
 *  - asset identifiers are unique;
 *  - period labels are strictly increasing.
 *
 * Period labels are compared numerically when every label parses as a
 * number (e.g. 196701, 1, 2, ...) and lexicographically otherwise, which
 * covers ISO dates such as 2019-06-30.
 */
class ReturnPanel {
public:
    ReturnPanel(std::vector<std::string> periods, std::vector<std::string> assets,
                MatrixXd values);

    /// Panel with generated labels "1".."T" and "a1".."aN".
    static ReturnPanel from_matrix(MatrixXd values);

    const std::vector<std::string>& periods() const noexcept { return periods_; }
    const std::vector<std::string>& assets() const noexcept { return assets_; }
    const MatrixXd& values() const noexcept { return values_; }

    Index num_periods() const noexcept { return values_.rows(); }
    Index num_assets() const noexcept { return values_.cols(); }

    /// Sub-panel with the listed columns, in the given order.
    ReturnPanel select_assets(const std::vector<Index>& columns) const;

private:
    std::vector<std::string> periods_;
    std::vector<std::string> assets_;
    MatrixXd values_;
};

/// True when `a` precedes `b` under the period ordering described above.
bool period_less(const std::string& a, const std::string& b);

/// Checks that labels are strictly increasing; throws ValidationError otherwise.
void validate_period_order(const std::vector<std::string>& periods);

/**
 * Reads a delimited panel: header row `<label>,<asset1>,...,<assetN>`, then
 * one row per period with the label in the first column. The delimiter is
 * ',' unless the header contains a tab or semicolon. Empty cells and
 * non-numeric cells are schema errors that name the offending column.
 */
ReturnPanel read_return_panel(std::istream& in);
ReturnPanel read_return_panel_file(const std::string& path);

void write_return_panel(std::ostream& out, const ReturnPanel& panel);

} // namespace hdp::core
