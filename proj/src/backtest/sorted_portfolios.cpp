#include "hdport/backtest/sorted_portfolios.hpp"

#include "hdport/errors.hpp"
#include "hdport/io/table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

namespace hdp::backtest {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

void check_shape(const MatrixXd& m, Index t, Index s, const std::string& what) {
    if (m.rows() != t || m.cols() != s) {
        throw ValidationError(what + " is " + std::to_string(m.rows()) + " x " + std::to_string(m.cols()) +
                              ", expected " + std::to_string(t) + " x " + std::to_string(s));
    }
}

template <typename T>
void check_unique(const std::vector<T>& ids, const std::string& what) {
    std::set<T> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second) throw ValidationError("duplicate " + what + " '" + id + "'");
    }
}

struct LongFile {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
};

LongFile read_long(std::istream& in, std::size_t columns, const std::string& what) {
    LongFile f;
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(what + " file is empty");
    const char delim = io::detect_delimiter(line);
    f.header = io::split_line(line, delim);
    if (f.header.size() != columns) {
        throw SchemaError(what + " header has " + std::to_string(f.header.size()) + " columns, expected " +
                          std::to_string(columns));
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (io::trim(line).empty()) continue;
        auto cells = io::split_line(line, delim);
        if (cells.size() != columns) {
            throw SchemaError(what + " line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                              " columns, expected " + std::to_string(columns));
        }
        for (std::size_t j = 0; j + 1 < columns; ++j) {
            if (cells[j].empty()) {
                throw SchemaError(what + " line " + std::to_string(line_no) + " has an empty '" + f.header[j] + "'");
            }
        }
        f.rows.push_back(std::move(cells));
        f.line_numbers.push_back(line_no);
    }
    return f;
}

// Insertion-ordered id registry.
struct Ids {
    std::vector<std::string> list;
    std::unordered_map<std::string, Index> index;

    Index add(const std::string& id) {
        auto [it, inserted] = index.emplace(id, static_cast<Index>(list.size()));
        if (inserted) list.push_back(id);
        return it->second;
    }
    std::optional<Index> find(const std::string& id) const {
        auto it = index.find(id);
        if (it == index.end()) return std::nullopt;
        return it->second;
    }
};

void put(MatrixXd& m, Index r, Index c, double v, const std::string& what, std::size_t line_no) {
    if (!std::isnan(m(r, c))) {
        throw SchemaError(what + " line " + std::to_string(line_no) + " repeats an earlier (period, stock) entry");
    }
    if (!std::isfinite(v)) {
        throw SchemaError(what + " line " + std::to_string(line_no) + " has a non-finite value");
    }
    m(r, c) = v;
}

} // namespace

void CharacteristicPanel::validate() const {
    const Index t = static_cast<Index>(periods.size());
    const Index s = static_cast<Index>(stocks.size());
    check_shape(returns, t, s, "return matrix");
    check_shape(ranking, t, s, "ranking matrix");
    if (values.size() != characteristics.size()) {
        throw ValidationError("characteristic names and value matrices disagree in count");
    }
    for (std::size_t k = 0; k < values.size(); ++k) check_shape(values[k], t, s, "characteristic '" + characteristics[k] + "'");
    if (market && market->size() != t) throw ValidationError("market series length differs from the number of periods");
    check_unique(stocks, "stock id");
    check_unique(characteristics, "characteristic id");
    core::validate_period_order(periods);
}

std::vector<Index> AssetPanel::complete_columns(Index begin, Index end) const {
    if (begin < 0 || end > num_periods() || begin > end) throw ValidationError("row range out of bounds");
    std::vector<Index> out;
    for (Index j = 0; j < num_assets(); ++j) {
        if (values.col(j).segment(begin, end - begin).array().isFinite().all()) out.push_back(j);
    }
    return out;
}

AssetPanel AssetPanel::from_return_panel(const core::ReturnPanel& panel, std::optional<VectorXd> market) {
    if (market && market->size() != panel.num_periods()) {
        throw ValidationError("market series length differs from the number of periods");
    }
    return {panel.periods(), panel.assets(), panel.values(), std::move(market)};
}

core::ReturnPanel AssetPanel::to_return_panel() const {
    if (!values.array().isFinite().all()) throw ValidationError("asset panel has missing values");
    return core::ReturnPanel(periods, assets, values);
}

std::vector<Index> split_sizes(Index n, Index groups) {
    if (groups < 1) throw ValidationError("group count must be positive");
    if (n < 0) throw ValidationError("item count must be non-negative");
    std::vector<Index> sizes(static_cast<std::size_t>(groups), n / groups);
    for (Index g = 0; g < n % groups; ++g) ++sizes[static_cast<std::size_t>(g)];
    return sizes;
}

AssetPanel build_sorted_portfolios(const CharacteristicPanel& panel, Index top_M, Index groups) {
    panel.validate();
    if (groups < 2) throw ValidationError("need at least two groups");
    if (top_M < groups) throw ValidationError("top_M must be at least the group count");

    const Index T = panel.num_periods();
    const Index S = panel.num_stocks();
    const Index C = static_cast<Index>(panel.characteristics.size());

    AssetPanel out;
    out.periods = panel.periods;
    out.market = panel.market;
    for (const auto& c : panel.characteristics) {
        for (Index g = 1; g <= groups; ++g) out.assets.push_back(c + "_g" + std::to_string(g));
    }
    out.values = MatrixXd::Constant(T, C * groups, kMissing);

    std::vector<Index> order(static_cast<std::size_t>(S));
    std::vector<Index> universe;
    std::vector<Index> eligible;
    for (Index t = 0; t < T; ++t) {
        universe.clear();
        for (Index s = 0; s < S; ++s) {
            if (std::isfinite(panel.ranking(t, s)) && std::isfinite(panel.returns(t, s))) universe.push_back(s);
        }
        std::stable_sort(universe.begin(), universe.end(),
                         [&](Index a, Index b) { return panel.ranking(t, a) > panel.ranking(t, b); });
        if (static_cast<Index>(universe.size()) > top_M) universe.resize(static_cast<std::size_t>(top_M));

        for (Index c = 0; c < C; ++c) {
            const MatrixXd& ch = panel.values[static_cast<std::size_t>(c)];
            eligible.clear();
            for (Index s : universe) {
                if (std::isfinite(ch(t, s))) eligible.push_back(s);
            }
            const Index n = static_cast<Index>(eligible.size());
            if (n < groups) continue;
            std::stable_sort(eligible.begin(), eligible.end(), [&](Index a, Index b) { return ch(t, a) < ch(t, b); });
            const auto sizes = split_sizes(n, groups);
            std::size_t pos = 0;
            for (Index g = 0; g < groups; ++g) {
                const Index size = sizes[static_cast<std::size_t>(g)];
                double sum = 0.0;
                for (Index k = 0; k < size; ++k) sum += panel.returns(t, eligible[pos++]);
                out.values(t, c * groups + g) = sum / static_cast<double>(size);
            }
        }
    }
    return out;
}

VectorXd read_market_series(std::istream& in, const std::vector<std::string>& periods) {
    const auto f = read_long(in, 2, "market");
    std::unordered_map<std::string, Index> where;
    for (std::size_t t = 0; t < periods.size(); ++t) where.emplace(periods[t], static_cast<Index>(t));
    VectorXd m = VectorXd::Constant(static_cast<Index>(periods.size()), kMissing);
    for (std::size_t i = 0; i < f.rows.size(); ++i) {
        const auto& r = f.rows[i];
        auto it = where.find(r[0]);
        if (it == where.end()) {
            throw SchemaError("market line " + std::to_string(f.line_numbers[i]) + " has unknown period '" + r[0] + "'");
        }
        if (!std::isnan(m(it->second))) {
            throw SchemaError("market line " + std::to_string(f.line_numbers[i]) + " repeats period '" + r[0] + "'");
        }
        m(it->second) = io::parse_number(r[1], f.header[1]);
    }
    for (Index t = 0; t < m.size(); ++t) {
        if (std::isnan(m(t))) throw SchemaError("market series has no value for period '" + periods[static_cast<std::size_t>(t)] + "'");
    }
    return m;
}

CharacteristicPanel read_characteristic_panel(std::istream& returns, std::istream& characteristics,
                                              std::istream& ranking, std::istream* market) {
    const auto rf = read_long(returns, 3, "returns");
    const auto cf = read_long(characteristics, 4, "characteristics");
    const auto kf = read_long(ranking, 3, "ranking");

    // Periods: union over all files in period order; stocks and
    // characteristics in order of first appearance.
    std::set<std::string, decltype(&core::period_less)> period_set(&core::period_less);
    Ids stocks;
    Ids chars;
    for (const auto& r : rf.rows) { period_set.insert(r[0]); stocks.add(r[1]); }
    for (const auto& r : cf.rows) { period_set.insert(r[0]); stocks.add(r[1]); chars.add(r[2]); }
    for (const auto& r : kf.rows) { period_set.insert(r[0]); stocks.add(r[1]); }

    CharacteristicPanel p;
    p.periods.assign(period_set.begin(), period_set.end());
    p.stocks = stocks.list;
    p.characteristics = chars.list;
    std::unordered_map<std::string, Index> period_index;
    for (std::size_t t = 0; t < p.periods.size(); ++t) period_index.emplace(p.periods[t], static_cast<Index>(t));

    const Index T = static_cast<Index>(p.periods.size());
    const Index S = static_cast<Index>(p.stocks.size());
    p.returns = MatrixXd::Constant(T, S, kMissing);
    p.ranking = MatrixXd::Constant(T, S, kMissing);
    p.values.assign(p.characteristics.size(), MatrixXd::Constant(T, S, kMissing));

    for (std::size_t i = 0; i < rf.rows.size(); ++i) {
        const auto& r = rf.rows[i];
        put(p.returns, period_index.at(r[0]), *stocks.find(r[1]), io::parse_number(r[2], rf.header[2]), "returns",
            rf.line_numbers[i]);
    }
    for (std::size_t i = 0; i < cf.rows.size(); ++i) {
        const auto& r = cf.rows[i];
        put(p.values[static_cast<std::size_t>(*chars.find(r[2]))], period_index.at(r[0]), *stocks.find(r[1]),
            io::parse_number(r[3], cf.header[3]), "characteristics", cf.line_numbers[i]);
    }
    for (std::size_t i = 0; i < kf.rows.size(); ++i) {
        const auto& r = kf.rows[i];
        put(p.ranking, period_index.at(r[0]), *stocks.find(r[1]), io::parse_number(r[2], kf.header[2]), "ranking",
            kf.line_numbers[i]);
    }
    if (market) p.market = read_market_series(*market, p.periods);
    try {
        p.validate();
    } catch (const ValidationError& e) {
        throw SchemaError(e.what());
    }
    return p;
}

CharacteristicPanel read_characteristic_panel_files(const std::string& returns_path,
                                                    const std::string& characteristics_path,
                                                    const std::string& ranking_path, const std::string& market_path) {
    auto open = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open '" + path + "'");
        return in;
    };
    auto r = open(returns_path);
    auto c = open(characteristics_path);
    auto k = open(ranking_path);
    if (market_path.empty()) return read_characteristic_panel(r, c, k);
    auto m = open(market_path);
    return read_characteristic_panel(r, c, k, &m);
}

AssetPanel read_asset_panel(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("asset panel file is empty");
    const char delim = io::detect_delimiter(line);
    const auto header = io::split_line(line, delim);
    if (header.size() < 2) throw SchemaError("asset panel header needs a period column and at least one asset column");
    AssetPanel p;
    p.assets.assign(header.begin() + 1, header.end());
    for (const auto& a : p.assets) {
        if (a.empty()) throw SchemaError("empty asset identifier in header");
    }
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
        if (cells[0].empty()) throw SchemaError("line " + std::to_string(line_no) + " has an empty period label");
        p.periods.push_back(cells[0]);
        std::vector<double> row(p.assets.size());
        for (std::size_t j = 0; j < p.assets.size(); ++j) {
            const auto& c = cells[j + 1];
            if (c.empty() || c == "nan" || c == "NaN" || c == "NA") {
                row[j] = kMissing;
                continue;
            }
            row[j] = io::parse_number(c, p.assets[j]);
            if (!std::isfinite(row[j])) throw SchemaError("non-finite value in column '" + p.assets[j] + "'");
        }
        rows.push_back(std::move(row));
    }
    p.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(p.assets.size()));
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (std::size_t j = 0; j < p.assets.size(); ++j) {
            p.values(static_cast<Index>(t), static_cast<Index>(j)) = rows[t][j];
        }
    }
    try {
        core::validate_period_order(p.periods);
        check_unique(p.assets, "asset id");
    } catch (const ValidationError& e) {
        throw SchemaError(e.what());
    }
    return p;
}

AssetPanel read_asset_panel_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open asset panel file '" + path + "'");
    return read_asset_panel(in);
}

void write_asset_panel(std::ostream& out, const AssetPanel& panel) {
    out << "period";
    for (const auto& a : panel.assets) out << ',' << a;
    out << '\n';
    for (Index t = 0; t < panel.num_periods(); ++t) {
        out << panel.periods[static_cast<std::size_t>(t)];
        for (Index j = 0; j < panel.num_assets(); ++j) out << ',' << io::format_number(panel.values(t, j));
        out << '\n';
    }
}

} // namespace hdp::backtest
