#pragma once

#include "params.hpp"

#include "hdport/io/table.hpp"

#include <functional>
#include <string>
#include <vector>

namespace hdp::cli {

struct CommandResult {
    io::Table table;
    std::vector<std::string> warnings;
};

struct Command {
    std::string name;
    std::string description;
    std::vector<ParamSpec> params;
    std::function<CommandResult(const Params&)> run;
};

/// limits, simulate, backtest, calibrate, mp, ridge.
const std::vector<Command>& commands();

const Command& find_command(const std::string& name);

} // namespace hdp::cli
