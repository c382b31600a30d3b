#pragma once

#include "hdport/core/panel.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hdp::backtest {

using core::Index;
using core::MatrixXd;
using core::VectorXd;

/**
 * Stock-level inputs for portfolio construction. Every matrix is T x S with
 * NaN marking a missing observation; zeros are always real values.
 *
 * Row t of a characteristic is the value used to sort stocks whose return
 * is in row t of `returns`, so any lag between measurement and holding
 * period is the caller's responsibility.
 */
struct CharacteristicPanel {
    std::vector<std::string> periods;
    std::vector<std::string> stocks;
    std::vector<std::string> characteristics;
    MatrixXd returns;
    std::vector<MatrixXd> values;  ///< one T x S matrix per characteristic
    MatrixXd ranking;              ///< e.g. market capitalization
    std::optional<VectorXd> market;  ///< market excess return, length T

    Index num_periods() const noexcept { return returns.rows(); }
    Index num_stocks() const noexcept { return returns.cols(); }

    /// Throws ValidationError on inconsistent dimensions, duplicate ids or
    /// unordered periods.
    void validate() const;
};

/**
 * Panel of constructed assets where NaN marks a missing period. Unlike
 * core::ReturnPanel it may be incomplete.
 */
struct AssetPanel {
    std::vector<std::string> periods;
    std::vector<std::string> assets;
    MatrixXd values;
    std::optional<VectorXd> market;

    Index num_periods() const noexcept { return values.rows(); }
    Index num_assets() const noexcept { return values.cols(); }

    /// Columns with no missing value in rows [begin, end).
    std::vector<Index> complete_columns(Index begin, Index end) const;

    static AssetPanel from_return_panel(const core::ReturnPanel& panel, std::optional<VectorXd> market = std::nullopt);

    /// Throws ValidationError when any value is missing.
    core::ReturnPanel to_return_panel() const;
};

/// Sizes of a sequential G-way split of n items; the first n % G groups get
/// one extra item.
std::vector<Index> split_sizes(Index n, Index groups);

/**
 * Characteristic-sorted portfolios. For every period and characteristic:
 * keep the top_M stocks by ranking weight (ties broken by column order),
 * drop those missing the characteristic or the return, sort ascending by
 * the characteristic (stable), split into G groups via split_sizes and
 * equal-weight each group.
 *
 * Output assets are ordered characteristic-major and named "<char>_g<k>",
 * k = 1..G. A period where fewer than G stocks are eligible leaves that
 * characteristic's G assets missing (NaN) in that row.
 */
AssetPanel build_sorted_portfolios(const CharacteristicPanel& panel, Index top_M, Index groups);

/**
 * Long-format readers, each with a header row:
 *   returns:         period, stock, return
 *   characteristics: period, stock, characteristic, value
 *   ranking:         period, stock, weight
 *   market:          period, value
 * Missing cells are allowed only as absent rows. Duplicate keys, unknown
 * periods in the market file and non-numeric values are schema errors.
 */
CharacteristicPanel read_characteristic_panel(std::istream& returns, std::istream& characteristics,
                                              std::istream& ranking, std::istream* market = nullptr);

CharacteristicPanel read_characteristic_panel_files(const std::string& returns_path,
                                                    const std::string& characteristics_path,
                                                    const std::string& ranking_path,
                                                    const std::string& market_path = {});

/// Reads a market series (period, value) aligned to the given periods.
VectorXd read_market_series(std::istream& in, const std::vector<std::string>& periods);

/// Wide input in the return-panel layout where empty or "nan" cells mean
/// missing.
AssetPanel read_asset_panel(std::istream& in);
AssetPanel read_asset_panel_file(const std::string& path);

/// Wide output: header `period,<asset...>`, "nan" for missing cells.
void write_asset_panel(std::ostream& out, const AssetPanel& panel);

} // namespace hdp::backtest
