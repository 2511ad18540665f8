#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "qdiff/config.hpp"
#include "qdiff/experiments.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{"qdiff: measurement-driven quantum diffusion experiments"};
    app.require_subcommand(1);

    struct RunArgs {
        std::string config;
        std::int64_t seed = -1;
        std::string out = "out";
        std::vector<std::string> overrides;
    };
    std::vector<std::pair<std::string, CLI::App*>> runs;
    std::vector<RunArgs> args(qdiff::experiment_kinds().size());
    for (std::size_t i = 0; i < qdiff::experiment_kinds().size(); ++i) {
        const auto& kind = qdiff::experiment_kinds()[i];
        CLI::App* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
        sub->add_option("--config", args[i].config, "config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", args[i].seed, "override the config seed")->check(CLI::NonNegativeNumber);
        sub->add_option("--out", args[i].out, "output directory")->capture_default_str();
        sub->add_option("--set", args[i].overrides, "override a section key, key=value");
        runs.push_back({kind, sub});
    }

    std::string manifest, rerun_out = "rerun";
    CLI::App* rerun = app.add_subcommand("rerun", "rerun a manifest and compare output hashes");
    rerun->add_option("--manifest", manifest, "manifest.json of an earlier run")->required()->check(CLI::ExistingFile);
    rerun->add_option("--out", rerun_out, "output directory")->capture_default_str();

    std::string template_kind;
    CLI::App* tmpl = app.add_subcommand("template", "print the default config of an experiment");
    tmpl->add_option("kind", template_kind)->required()->check(CLI::IsMember(qdiff::experiment_kinds()));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*tmpl) {
            std::cout << qdiff::serialize_config(qdiff::ExperimentConfig::defaults(template_kind));
            return 0;
        }
        if (*rerun) {
            const auto check = qdiff::rerun_manifest(manifest, rerun_out);
            for (const auto& m : check.mismatches) std::cerr << "mismatch: " << m << '\n';
            std::cout << (check.ok ? "reproduced\n" : "NOT reproduced\n");
            return check.ok ? 0 : 3;
        }
        for (std::size_t i = 0; i < runs.size(); ++i) {
            if (!*runs[i].second) continue;
            qdiff::ExperimentConfig config = qdiff::load_config(args[i].config);
            if (config.kind != runs[i].first)
                throw qdiff::ConfigError(0, "kind",
                                         "config is for '" + config.kind + "', not '" + runs[i].first + "'");
            if (args[i].seed >= 0) config.seed = static_cast<std::uint64_t>(args[i].seed);
            for (const auto& kv : args[i].overrides) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) throw qdiff::ConfigError(0, kv, "--set expects key=value");
                config.set(kv.substr(0, eq), kv.substr(eq + 1));
            }
            const fs::path base = fs::path(args[i].config).parent_path();
            for (const auto& f : qdiff::run_experiment(config, args[i].out, base.empty() ? "." : base))
                std::cout << (fs::path(args[i].out) / f).string() << '\n';
        }
    } catch (const qdiff::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
