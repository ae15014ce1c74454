#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <json.hpp>
#include <set>
#include <string>
#include <vector>

#include "levylab/levylab.h"

namespace {

using nlohmann::json;

int report_error(const std::string& kind, const std::string& message, int code, const json& extra = json::object()) {
    json e{{"error", kind}, {"message", message}, {"exit_code", code}};
    e.update(extra);
    std::cerr << e.dump() << std::endl;
    return code;
}

int report_status(levylab_status s) {
    const int code = levylab_exit_code(s);
    return report_error(levylab_status_name(s), levylab_last_error(), code);
}

struct ConfigDeleter {
    void operator()(levylab_config* c) const { levylab_config_destroy(c); }
};
struct ResultDeleter {
    void operator()(levylab_result* r) const { levylab_result_destroy(r); }
};

// Flag name of a "--name" or "--name=value" token.
std::string flag_name(const std::string& token) {
    const auto eq = token.find('=');
    return token.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
}

}  // namespace

int main(int argc, char** argv) {
    const json schema = json::parse(levylab_schema_json());

    CLI::App app{"Heavy-tailed Langevin dynamics and gradient-noise experiments"};
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(0, 1);
    bool print_schema = false, print_version = false;
    app.add_flag("--schema", print_schema, "print the parameter schema as JSON");
    app.add_flag("--version", print_version, "print the library version");

    struct Sub {
        CLI::App* app;
        std::string config_file;
        std::map<std::string, std::string> values;
        std::set<std::string> flags;
    };
    std::map<std::string, Sub> subs;
    for (const auto& cmd : schema["commands"]) {
        const std::string name = cmd["name"];
        Sub& s = subs[name];
        s.app = app.add_subcommand(name, cmd["help"].get<std::string>());
        s.app->add_option("--config", s.config_file, "ini file; command-line flags override it");
        s.flags.insert("config");
        s.flags.insert("help");
        auto add = [&](const json& p) {
            const std::string key = p["name"];
            std::string help = p["help"].get<std::string>() + " [" + p["type"].get<std::string>() + ", default " +
                               p["default"].get<std::string>() + "]";
            s.app->add_option("--" + key, s.values[key], help);
            s.flags.insert(key);
        };
        for (const auto& p : cmd["params"]) add(p);
        for (const auto& p : schema["run"]) add(p);
    }

    // Unknown flags are reported by name before CLI11 sees them.
    if (argc > 1 && subs.count(argv[1])) {
        const Sub& s = subs.at(argv[1]);
        for (int i = 2; i < argc; ++i) {
            const std::string tok = argv[i];
            if (tok.rfind("--", 0) == 0 && !s.flags.count(flag_name(tok)))
                return report_error("config", "unknown flag '" + tok.substr(0, tok.find('=')) + "' for " + argv[1], 2,
                                    {{"flag", tok.substr(0, tok.find('='))}});
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("config", e.what(), 2);
    }

    if (print_version) {
        std::cout << levylab_version() << std::endl;
        return 0;
    }
    if (print_schema) {
        std::cout << schema.dump(2) << std::endl;
        return 0;
    }
    const auto chosen = app.get_subcommands();
    if (chosen.empty()) {
        std::cout << app.help() << std::endl;
        return report_error("config", "a subcommand is required", 2);
    }
    const std::string name = chosen.front()->get_name();
    Sub& s = subs.at(name);

    levylab_config* raw = nullptr;
    if (auto st = levylab_config_create(name.c_str(), &raw); st != LEVYLAB_OK) return report_status(st);
    std::unique_ptr<levylab_config, ConfigDeleter> cfg(raw);
    if (!s.config_file.empty())
        if (auto st = levylab_config_load_file(cfg.get(), s.config_file.c_str()); st != LEVYLAB_OK)
            return report_status(st);
    for (const auto& [key, value] : s.values) {
        if (s.app->count("--" + key) == 0) continue;
        const bool is_run = std::any_of(schema["run"].begin(), schema["run"].end(),
                                        [&](const json& p) { return p["name"] == key; });
        const std::string qualified = (is_run ? "run." : "params.") + key;
        if (auto st = levylab_config_set(cfg.get(), qualified.c_str(), value.c_str()); st != LEVYLAB_OK)
            return report_status(st);
    }

    levylab_result* rraw = nullptr;
    if (auto st = levylab_run(cfg.get(), &rraw); st != LEVYLAB_OK) return report_status(st);
    std::unique_ptr<levylab_result, ResultDeleter> result(rraw);
    json out{{"status", "ok"},
             {"subcommand", name},
             {"output_dir", levylab_result_output_dir(result.get())},
             {"summary", json::parse(levylab_result_summary_json(result.get()))}};
    std::cout << out.dump(2) << std::endl;
    return 0;
}
