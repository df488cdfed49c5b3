// Command-line front end. Talks to the library only through the C API.
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rbpimd/rbpimd.h"

namespace {

struct Options {
    std::string preset;
    std::string config;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::string out = "rbpimd-out";
    std::vector<std::string> overrides;
};

int exit_code(rbp_status s) {
    switch (s) {
        case RBP_OK: return 0;
        case RBP_INVALID_ARGUMENT:
        case RBP_CONFIG: return 2;
        case RBP_SINGULARITY: return 3;
        case RBP_IO: return 4;
        default: return 5;
    }
}

int report(rbp_status s) {
    std::cerr << "rbpimd: error: " << rbp_last_error() << '\n';
    return exit_code(s);
}

int run(const std::string& command, const Options& opt) {
    rbp_config* cfg = nullptr;
    rbp_status s = rbp_config_create(&cfg);
    if (s != RBP_OK) return report(s);
    struct Guard {
        rbp_config* c;
        ~Guard() { rbp_config_destroy(c); }
    } guard{cfg};

    if (!opt.preset.empty() && (s = rbp_config_load_preset(cfg, opt.preset.c_str())) != RBP_OK)
        return report(s);
    if (!opt.config.empty() && (s = rbp_config_load_file(cfg, opt.config.c_str())) != RBP_OK)
        return report(s);
    for (const auto& kv : opt.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << "rbpimd: error: --set expects key=value, got '" << kv << "'\n";
            return 2;
        }
        if ((s = rbp_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str())) != RBP_OK)
            return report(s);
    }
    if (opt.seed &&
        (s = rbp_config_set(cfg, "system.seed", std::to_string(*opt.seed).c_str())) != RBP_OK)
        return report(s);

    char* summary = nullptr;
    s = rbp_run_experiment(cfg, command.c_str(), opt.out.c_str(), opt.threads, &summary);
    if (s != RBP_OK) return report(s);
    std::cout << summary << '\n';
    rbp_string_free(summary);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Path-integral sampling with pmmLang, random batches and splitting Monte Carlo"};
    app.require_subcommand(0, 1);
    bool list_presets = false;
    bool dump_config = false;
    app.add_flag("--list-presets", list_presets, "List the available presets and exit");
    app.set_version_flag("--version", std::string(rbp_version()));

    Options opt;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"run", "Single trajectory time average"},
        {"error-table", "Relative error of the time average against a fine-step reference"},
        {"ensemble", "Weak error and relative entropy over many trajectories"},
        {"strong-error", "Pathwise distance between coupled exact and RBM trajectories"},
        {"spectrum-check", "Ring operator spectrum and solver consistency"},
        {"rejection-table", "Metropolis rejection rates of the splitting methods"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--preset", opt.preset, "Named preset applied before the config file");
        sub->add_option("--config", opt.config, "Config file of 'key = value' lines")
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "Master seed (overrides system.seed)");
        sub->add_option("--threads", opt.threads, "Worker threads for multi-trajectory commands")
            ->check(CLI::PositiveNumber);
        sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
        sub->add_option("--set", opt.overrides, "Override one key: --set key=value (repeatable)");
        sub->add_flag("--dump-config", dump_config, "Print the resolved configuration and exit");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version exit 0; usage errors share the bad-input code.
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (list_presets) {
        char* names = nullptr;
        if (rbp_status s = rbp_preset_list(&names); s != RBP_OK) return report(s);
        std::cout << names;
        rbp_string_free(names);
        return 0;
    }

    for (CLI::App* sub : subs) {
        if (!sub->parsed()) continue;
        if (dump_config) {
            rbp_config* cfg = nullptr;
            rbp_status s = rbp_config_create(&cfg);
            if (s == RBP_OK && !opt.preset.empty()) s = rbp_config_load_preset(cfg, opt.preset.c_str());
            if (s == RBP_OK && !opt.config.empty()) s = rbp_config_load_file(cfg, opt.config.c_str());
            for (const auto& kv : opt.overrides) {
                const auto eq = kv.find('=');
                if (s == RBP_OK && eq != std::string::npos)
                    s = rbp_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
            }
            if (s == RBP_OK && opt.seed)
                s = rbp_config_set(cfg, "system.seed", std::to_string(*opt.seed).c_str());
            if (s == RBP_OK) s = rbp_config_validate(cfg);
            char* text = nullptr;
            if (s == RBP_OK) s = rbp_config_dump(cfg, &text);
            if (s == RBP_OK) {
                std::cout << text;
                rbp_string_free(text);
            }
            const int code = s == RBP_OK ? 0 : report(s);
            rbp_config_destroy(cfg);
            return code;
        }
        return run(sub->get_name(), opt);
    }
    std::cout << app.help();
    return 0;
}
