#include "hdport/io/keyvalue.hpp"

#include "hdport/errors.hpp"
#include "hdport/io/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace hdp::io {

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
    std::map<std::string, std::string> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw SchemaError("config line " + std::to_string(line_no) + " is not of the form key = value");
        }
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) throw SchemaError("config line " + std::to_string(line_no) + " has an empty key");
        if (!entries.emplace(key, value).second) {
            throw SchemaError("config key '" + key + "' is repeated on line " + std::to_string(line_no));
        }
    }
    return KeyValueConfig(std::move(entries));
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    return parse(in);
}

std::optional<std::string> KeyValueConfig::find(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

const std::string& KeyValueConfig::at(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw SchemaError("config key '" + key + "' is missing");
    return it->second;
}

double KeyValueConfig::get_double(const std::string& key) const {
    return parse_number(at(key), key);
}

long long KeyValueConfig::get_int(const std::string& key) const {
    const auto& s = at(key);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw SchemaError("config key '" + key + "' expects an integer, got '" + s + "'");
    }
    return v;
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
    auto items = split_line(at(key), ',');
    items.erase(std::remove(items.begin(), items.end(), std::string()), items.end());
    return items;
}

void KeyValueConfig::require_known(const std::vector<std::string>& known) const {
    for (const auto& [k, v] : entries_) {
        if (std::find(known.begin(), known.end(), k) == known.end()) {
            throw SchemaError("unknown config key '" + k + "'");
        }
    }
}

} // namespace hdp::io
