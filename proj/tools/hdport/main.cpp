// hdport: command-line front end.
//
// Exit codes: 0 success, 1 I/O or unexpected failure, 2 usage or invalid
// parameters, 3 input schema error, 4 numeric failure.

#include "commands.hpp"

#include "hdport/errors.hpp"
#include "hdport/io/keyvalue.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

using hdp::cli::Params;

constexpr const char* kVersion = "1.0.0";

enum Exit { kOk = 0, kIo = 1, kUsage = 2, kSchema = 3, kNumeric = 4 };

struct Invocation {
    std::string format = "csv";
    std::string out;
    std::string manifest;
};

std::string manifest_path(const Invocation& inv) {
    if (!inv.manifest.empty()) return inv.manifest;
    if (!inv.out.empty() && inv.out != "-") return inv.out + ".manifest.json";
    return {};
}

void write_manifest(const std::string& path, const std::string& command, const Params& params,
                    const Invocation& inv) {
    nlohmann::ordered_json j;
    j["program"] = "hdport";
    j["version"] = kVersion;
    j["command"] = command;
    j["format"] = inv.format;
    j["output"] = inv.out.empty() ? "-" : inv.out;
    j["params"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : params) j["params"][k] = v;
    std::ofstream out(path);
    if (!out) throw hdp::IoError("cannot write manifest '" + path + "'");
    out << j.dump(2) << '\n';
}

void execute(const std::string& command, const Params& params, const Invocation& inv) {
    const auto& cmd = hdp::cli::find_command(command);
    const auto format = hdp::io::parse_output_format(inv.format);
    auto result = cmd.run(params);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';

    if (inv.out.empty() || inv.out == "-") {
        result.table.write(std::cout, format);
        std::cout.flush();
    } else {
        std::ofstream out(inv.out);
        if (!out) throw hdp::IoError("cannot write output '" + inv.out + "'");
        result.table.write(out, format);
    }
    const auto mpath = manifest_path(inv);
    if (!mpath.empty()) write_manifest(mpath, command, params, inv);
}

Params resolve(const hdp::cli::Command& cmd, const std::string& config_path,
               const std::map<std::string, std::string>& given) {
    Params p;
    std::vector<std::string> known;
    for (const auto& spec : cmd.params) {
        p[spec.key] = spec.default_value;
        known.push_back(spec.key);
    }
    if (!config_path.empty()) {
        const auto cfg = hdp::io::KeyValueConfig::parse_file(config_path);
        cfg.require_known(known);
        for (const auto& [k, v] : cfg.entries()) p[k] = v;
    }
    for (const auto& [k, v] : given) p[k] = v;
    return p;
}

Params read_replay(const std::string& path, std::string& command, Invocation& inv) {
    std::ifstream in(path);
    if (!in) throw hdp::IoError("cannot open manifest '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
        command = j.at("command").get<std::string>();
        if (inv.format.empty()) inv.format = j.value("format", "csv");
        Params p;
        for (const auto& [k, v] : j.at("params").items()) p[k] = v.get<std::string>();
        // Fill keys added since the manifest was written with their defaults.
        for (const auto& spec : hdp::cli::find_command(command).params) p.emplace(spec.key, spec.default_value);
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw hdp::SchemaError(std::string("malformed manifest: ") + e.what());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"High-dimensional mean-variance portfolio laboratory"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Invocation inv;
    std::string config_path;

    struct Bound {
        const hdp::cli::Command* cmd;
        CLI::App* sub;
        std::map<std::string, std::string> values;
        std::map<std::string, bool> flags;
    };
    std::vector<Bound> bound;
    bound.reserve(hdp::cli::commands().size());

    for (const auto& cmd : hdp::cli::commands()) {
        auto* sub = app.add_subcommand(cmd.name, cmd.description);
        bound.push_back({&cmd, sub, {}, {}});
    }
    for (auto& b : bound) {
        for (const auto& spec : b.cmd->params) {
            const std::string help = spec.help + (spec.default_value.empty() ? "" : " [" + spec.default_value + "]");
            if (spec.is_flag) {
                b.sub->add_flag("--" + hdp::cli::kebab(spec.key), b.flags[spec.key], help);
            } else {
                b.sub->add_option("--" + hdp::cli::kebab(spec.key), b.values[spec.key], help);
            }
        }
        b.sub->add_option("--config", config_path, "key = value configuration file (flags override it)");
        b.sub->add_option("--format", inv.format, "output format: csv or json")->default_val("csv");
        b.sub->add_option("--out", inv.out, "output path (default stdout)");
        b.sub->add_option("--manifest", inv.manifest, "manifest path (default <out>.manifest.json)");
    }

    std::string replay_path;
    Invocation replay_inv;
    replay_inv.format.clear();
    auto* replay = app.add_subcommand("replay", "Rerun a command from its manifest");
    replay->add_option("path", replay_path, "manifest written by an earlier run")->required();
    replay->add_option("--format", replay_inv.format, "output format (default: as recorded)");
    replay->add_option("--out", replay_inv.out, "output path (default stdout)");
    replay->add_option("--manifest", replay_inv.manifest, "write a new manifest here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (replay->parsed()) {
            std::string command;
            const auto params = read_replay(replay_path, command, replay_inv);
            execute(command, params, replay_inv);
            return kOk;
        }
        for (auto& b : bound) {
            if (!b.sub->parsed()) continue;
            std::map<std::string, std::string> given;
            for (const auto& spec : b.cmd->params) {
                const auto* o = b.sub->get_option("--" + hdp::cli::kebab(spec.key));
                if (o->count() == 0) continue;
                given[spec.key] = spec.is_flag ? (b.flags[spec.key] ? "true" : "false") : b.values[spec.key];
            }
            execute(b.cmd->name, resolve(*b.cmd, config_path, given), inv);
        }
        return kOk;
    } catch (const hdp::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const hdp::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return kSchema;
    } catch (const hdp::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    }
}
