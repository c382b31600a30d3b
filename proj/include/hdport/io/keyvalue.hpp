#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hdp::io {

/**
 * Plain-text configuration: one `key = value` per line, `#` starts a
 * comment, blank lines ignored. Keys are case-sensitive; a repeated key is
 * a schema error.
 */
class KeyValueConfig {
public:
    KeyValueConfig() = default;
    explicit KeyValueConfig(std::map<std::string, std::string> entries) : entries_(std::move(entries)) {}

    static KeyValueConfig parse(std::istream& in);
    static KeyValueConfig parse_file(const std::string& path);

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    std::optional<std::string> find(const std::string& key) const;

    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;
    /// Comma-separated list with surrounding whitespace trimmed.
    std::vector<std::string> get_list(const std::string& key) const;

    /// Throws SchemaError naming the first key not in `known`.
    void require_known(const std::vector<std::string>& known) const;

private:
    const std::string& at(const std::string& key) const;
    std::map<std::string, std::string> entries_;
};

} // namespace hdp::io
