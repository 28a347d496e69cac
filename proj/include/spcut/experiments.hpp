// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
//
// Versioned JSON experiment configs, named presets and the pipelines that
// turn a config into CSV/JSON/summary files.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spcut/multiplicative.hpp"

namespace spcut {

inline constexpr const char* kConfigSchema = "spcut.experiment/1";

enum class Equation { heat_additive, wave_additive, heat_mult_brownian, heat_mult_levy };

std::string equation_name(Equation e);

struct ExperimentConfig {
    std::string name = "experiment";
    //! spectrum, heat-profile, simple-cutoff, wave-profile, wave-window, mult-profile, levy-check, wasserstein-test.
    std::string experiment = "heat-profile";
    Equation equation = Equation::heat_additive;
    std::vector<BoxAxis> axes;
    //! Keep the first `modes` eigenpairs.
    std::size_t modes = 0;
    //! Heat datum, or wave position; zero-padded to `modes`.
    std::vector<double> initial;
    std::vector<double> initial_velocity;
    NoiseSpec noise;
    double p = 2.0;
    std::vector<double> p_grid;
    std::vector<double> eps_grid;
    std::vector<double> rho_grid;
    std::vector<double> delta_grid;
    std::vector<double> eta_grid;
    std::vector<double> times;
    double gamma = 0.0;
    Schedule a_schedule = Schedule::eps;
    BoundVariant bound_variant = BoundVariant::proof;
    double rel_tol = 0.1;
    double ratio_threshold = 100.0;
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    std::string output = "out";
    std::optional<MultBrownianSpec> brownian;
    std::optional<MultLevySpec> levy;

    /*!
     * Parses a config; every error is ErrorCode::config with the JSON
     * pointer of the offending field in its message.
     */
    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    //! Cross-field checks (grids, eps range, p > 0, sizes against modes).
    void validate() const;

    EigenSystemPtr system() const;
    ModeCoefficients heat_datum() const;
    WaveState wave_datum() const;
};

//! Names accepted by preset().
std::vector<std::string> preset_names();

/*!
 * Built-in configs: "paper-default" (heat profile on (0, pi), 32 modes),
 * "simple-cutoff", "wave-overdamped", "wave-subcritical", "mult-brownian",
 * "mult-levy", "levy-check", "wasserstein", "spectrum".
 */
ExperimentConfig preset(const std::string& name);

//! Preset used when a subcommand runs without --config.
std::string default_preset_for(const std::string& experiment);

struct RunResult {
    std::string csv;
    nlohmann::json json;
    std::vector<std::pair<std::string, bool>> checks;
    std::string summary;

    bool pass() const;
};

//! Runs the pipeline named by config.experiment without touching the filesystem.
RunResult run_experiment(const ExperimentConfig& config, unsigned threads);

/*!
 * run_experiment, then writes <output>/<name>.csv, <name>.json and
 * <name>.summary.txt. Returns the result for exit-status decisions.
 */
RunResult run_and_write(const ExperimentConfig& config, unsigned threads);

struct SelftestResult {
    std::vector<std::pair<std::string, bool>> checks;
    std::string text;

    std::size_t passed() const;
    bool pass() const { return passed() == checks.size(); }
};

/*!
 * Small invariant suites of every module plus a negative control: a
 * corrupted eigenvalue table must fail the eigensystem check.
 */
SelftestResult selftest(std::uint64_t seed, unsigned threads);

}  // namespace spcut
