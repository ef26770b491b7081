#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "psg/commands.hpp"
#include "psg/error.hpp"

namespace {

struct Subcommand {
    CLI::App* app = nullptr;
    std::string config_path;
    std::map<std::string, std::string> overrides;
};

void register_keys(Subcommand& sub) {
    sub.app->add_option("config", sub.config_path, "key = value configuration file");
    for (const auto& key : psg::config_keys()) {
        std::string help = key.help;
        if (!key.default_value.empty()) help += " [default: " + key.default_value + "]";
        sub.app->add_option("--" + key.name, sub.overrides[key.name], help);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Projected scaled gradient solver with convergence certificates"};
    app.require_subcommand(1);

    const std::map<std::string, std::string> descriptions = {
        {"run", "run the method and write trace.csv and report.json"},
        {"superiorize", "run the superiorized method (TV-steered inner perturbations)"},
        {"compare", "run baseline and superiorized variants side by side"},
        {"certify", "replay a stored trace through the certificates"},
        {"gen-problem", "write a generated problem as CSV files"},
    };
    std::map<std::string, Subcommand> subs;
    for (const auto& [name, text] : descriptions) {
        Subcommand& s = subs[name];
        s.app = app.add_subcommand(name, text);
        register_keys(s);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : psg::exit_usage;
    }

    for (auto& [name, s] : subs) {
        if (!s.app->parsed()) continue;
        psg::ConfigValues values;
        try {
            if (!s.config_path.empty()) values = psg::read_config_file(s.config_path);
        } catch (const psg::Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return psg::exit_usage;
        }
        for (const auto& [key, value] : s.overrides)
            if (s.app->get_option("--" + key)->count() > 0) values[key] = value;
        return psg::run_command(name, values, std::cout, std::cerr);
    }
    return psg::exit_usage;
}
