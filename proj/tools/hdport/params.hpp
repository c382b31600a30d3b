#pragma once

#include "hdport/core/panel.hpp"

#include <map>
#include <string>
#include <vector>

namespace hdp::cli {

/// Resolved parameters of one subcommand, keyed by snake_case name.
using Params = std::map<std::string, std::string>;

struct ParamSpec {
    std::string key;
    std::string default_value;  ///< empty: no default
    std::string help;
    bool is_flag = false;       ///< boolean switch on the command line
};

std::string kebab(const std::string& key);

const std::string& require(const Params& p, const std::string& key);
double get_double(const Params& p, const std::string& key);
long long get_int(const Params& p, const std::string& key);
bool get_bool(const Params& p, const std::string& key);

/**
 * Real-valued list: comma-separated items, each a number, "a:b:n" (n
 * evenly spaced points from a to b inclusive) or "log:a:b:n".
 */
std::vector<double> parse_real_list(const std::string& s, const std::string& key);

/// Integer list: comma-separated integers or inclusive ranges "a:b:step".
std::vector<core::Index> parse_index_list(const std::string& s, const std::string& key);

/**
 * phi list where tokens may reference the window length: "T", "1/T",
 * "sqrtT", "1/sqrtT", "logT", besides plain numbers.
 */
std::vector<double> parse_phi_list(const std::string& s, double T, const std::string& key);

} // namespace hdp::cli
