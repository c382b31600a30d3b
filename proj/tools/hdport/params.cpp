#include "params.hpp"

#include "hdport/errors.hpp"
#include "hdport/io/table.hpp"

#include <charconv>
#include <cmath>

namespace hdp::cli {

namespace {

std::vector<std::string> items(const std::string& s) {
    std::vector<std::string> out;
    for (auto& t : io::split_line(s, ',')) {
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

double number(const std::string& s, const std::string& key) {
    try {
        return io::parse_number(s, key);
    } catch (const SchemaError&) {
        throw ValidationError("parameter '" + key + "' expects a number, got '" + s + "'");
    }
}

long long integer(const std::string& s, const std::string& key) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw ValidationError("parameter '" + key + "' expects an integer, got '" + s + "'");
    }
    return v;
}

} // namespace

std::string kebab(const std::string& key) {
    std::string k = key;
    for (auto& c : k) {
        if (c == '_') c = '-';
    }
    return k;
}

const std::string& require(const Params& p, const std::string& key) {
    auto it = p.find(key);
    if (it == p.end() || it->second.empty()) throw ValidationError("missing required parameter --" + kebab(key));
    return it->second;
}

double get_double(const Params& p, const std::string& key) { return number(require(p, key), key); }

long long get_int(const Params& p, const std::string& key) { return integer(require(p, key), key); }

bool get_bool(const Params& p, const std::string& key) {
    auto it = p.find(key);
    if (it == p.end() || it->second.empty()) return false;
    const auto& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ValidationError("parameter '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> parse_real_list(const std::string& s, const std::string& key) {
    std::vector<double> out;
    for (const auto& item : items(s)) {
        auto parts = io::split_line(item, ':');
        const bool log = parts.size() == 4 && parts[0] == "log";
        if (log) parts.erase(parts.begin());
        if (parts.size() == 1) {
            out.push_back(number(parts[0], key));
            continue;
        }
        if (parts.size() != 3) throw ValidationError("malformed range '" + item + "' in '" + key + "'");
        const double a = number(parts[0], key);
        const double b = number(parts[1], key);
        const long long n = integer(parts[2], key);
        if (n < 1) throw ValidationError("range '" + item + "' needs at least one point");
        if (log && !(a > 0.0 && b > 0.0)) throw ValidationError("log range '" + item + "' needs positive ends");
        for (long long i = 0; i < n; ++i) {
            const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
            out.push_back(log ? std::exp(std::log(a) + t * (std::log(b) - std::log(a))) : a + t * (b - a));
        }
    }
    if (out.empty()) throw ValidationError("parameter '" + key + "' is an empty list");
    return out;
}

std::vector<core::Index> parse_index_list(const std::string& s, const std::string& key) {
    std::vector<core::Index> out;
    for (const auto& item : items(s)) {
        const auto parts = io::split_line(item, ':');
        if (parts.size() == 1) {
            out.push_back(integer(parts[0], key));
            continue;
        }
        if (parts.size() != 3) throw ValidationError("malformed range '" + item + "' in '" + key + "'");
        const long long a = integer(parts[0], key);
        const long long b = integer(parts[1], key);
        const long long step = integer(parts[2], key);
        if (step < 1 || b < a) throw ValidationError("range '" + item + "' must be increasing with a positive step");
        for (long long v = a; v <= b; v += step) out.push_back(v);
    }
    if (out.empty()) throw ValidationError("parameter '" + key + "' is an empty list");
    return out;
}

std::vector<double> parse_phi_list(const std::string& s, double T, const std::string& key) {
    std::vector<double> out;
    for (const auto& item : items(s)) {
        if (item == "T") out.push_back(T);
        else if (item == "1/T") out.push_back(1.0 / T);
        else if (item == "sqrtT") out.push_back(std::sqrt(T));
        else if (item == "1/sqrtT") out.push_back(1.0 / std::sqrt(T));
        else if (item == "logT") out.push_back(std::log(T));
        else out.push_back(number(item, key));
    }
    if (out.empty()) throw ValidationError("parameter '" + key + "' is an empty list");
    return out;
}

} // namespace hdp::cli
