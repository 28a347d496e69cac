// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver. Exit status: 0 when every check passes, 1 when a
// check fails, 2 on configuration or usage errors.
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "spcut/error.hpp"
#include "spcut/experiments.hpp"
#include "spcut/parallel.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::string out;
    unsigned threads = spcut::default_threads();
};

void add_common(CLI::App* app, CommonOptions& o, bool with_config)
{
    if (with_config) {
        app->add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
        app->add_option("--preset", o.preset, "built-in config name");
    }
    app->add_option("--seed", o.seed, "master seed");
    if (with_config) app->add_option("--out", o.out, "output directory");
    app->add_option("--threads", o.threads, "worker threads (default SPCUT_THREADS or hardware)")
        ->check(CLI::PositiveNumber);
}

spcut::ExperimentConfig load(const std::string& experiment, const CommonOptions& o)
{
    spcut::ExperimentConfig c;
    if (!o.config_path.empty()) {
        std::ifstream f(o.config_path);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(f);
        } catch (const nlohmann::json::parse_error& e) {
            throw spcut::Error(spcut::ErrorCode::config, o.config_path + ": " + e.what());
        }
        c = spcut::ExperimentConfig::from_json(j);
    } else {
        c = spcut::preset(o.preset.empty() ? spcut::default_preset_for(experiment) : o.preset);
    }
    const bool heat_family = experiment == "heat-profile" && c.experiment == "simple-cutoff";
    if (!experiment.empty() && c.experiment != experiment && !heat_family)
        throw spcut::Error(spcut::ErrorCode::config,
                           "/experiment is '" + c.experiment + "' but the subcommand is " + experiment);
    if (o.seed) c.seed = *o.seed;
    if (!o.out.empty()) c.output = o.out;
    return c;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral cutoff profiles for linear SPDEs on boxes"};
    app.require_subcommand(1);

    const std::vector<std::string> experiments{"spectrum",    "heat-profile", "wave-profile",    "wave-window",
                                               "mult-profile", "levy-check",  "wasserstein-test"};
    std::vector<CommonOptions> opts(experiments.size());
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < experiments.size(); ++i) {
        auto* s = app.add_subcommand(experiments[i], "run the " + experiments[i] + " experiment");
        add_common(s, opts[i], true);
        subs.push_back(s);
    }
    CommonOptions run_opts;
    auto* run = app.add_subcommand("run", "run whatever experiment the config names");
    add_common(run, run_opts, true);

    CommonOptions self_opts;
    self_opts.seed = 1;
    auto* self = app.add_subcommand("selftest", "invariant suite with a negative control");
    add_common(self, self_opts, false);

    auto* presets = app.add_subcommand("presets", "list built-in configs");
    std::string dump_name;
    presets->add_option("--dump", dump_name, "print the named preset as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (presets->parsed()) {
            if (!dump_name.empty()) {
                std::cout << spcut::preset(dump_name).to_json().dump(2) << '\n';
            } else {
                for (const auto& n : spcut::preset_names()) std::cout << n << '\n';
            }
            return 0;
        }
        if (self->parsed()) {
            auto r = spcut::selftest(*self_opts.seed, self_opts.threads);
            std::cout << r.text;
            return r.pass() ? 0 : 1;
        }
        spcut::ExperimentConfig config;
        unsigned threads = 1;
        if (run->parsed()) {
            if (run_opts.config_path.empty() && run_opts.preset.empty())
                throw spcut::Error(spcut::ErrorCode::config, "run needs --config or --preset");
            config = load("", run_opts);
            threads = run_opts.threads;
        } else {
            for (std::size_t i = 0; i < subs.size(); ++i) {
                if (subs[i]->parsed()) {
                    config = load(experiments[i], opts[i]);
                    threads = opts[i].threads;
                }
            }
        }
        auto result = spcut::run_and_write(config, threads);
        std::cout << result.summary;
        std::cout << "wrote " << config.output << '/' << config.name << ".{csv,json,summary.txt}\n";
        return result.pass() ? 0 : 1;
    } catch (const spcut::Error& e) {
        std::cerr << "spcut: " << e.what() << '\n';
        return e.code() == spcut::ErrorCode::config ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "spcut: " << e.what() << '\n';
        return 1;
    }
}
