// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
//
// Heat equation with diagonal multiplicative noise: exact Brownian flows,
// the Levy stochastic exponential with an interlacing oracle, closed-form
// second moments and the profile cutoff on the a_eps time scale.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "spcut/cutoff.hpp"

namespace spcut {

//! Diagonal operators G_i with entries g[i][j], driven by independent scalar Brownian motions.
struct MultBrownianSpec {
    std::vector<std::vector<double>> g;
    double eps = 0.0;

    //! (1/2) eps^2 sum_i g[i][j]^2.
    double ito_correction(std::size_t j) const;
    //! -2 lambda_j + eps^2 sum_i g[i][j]^2 < 0 for every mode.
    bool mean_square_stable(const EigenSystem& system) const;
    void validate(std::size_t modes) const;
    MultBrownianSpec with_eps(double e) const;

    nlohmann::json to_json() const;
    static MultBrownianSpec from_json(const nlohmann::json& j);
};

//! Pathwise flow given the terminal values B^{(i)}_t of the driving motions.
ModeCoefficients mult_brownian_flow(double t, const ModeCoefficients& h, const MultBrownianSpec& spec,
                                    std::span<const double> brownian_at_t);

//! Draws B^{(i)}_t ~ N(0, t) on stream i of `replicate` and applies the flow.
ModeCoefficients mult_brownian_flow_sample(double t, const ModeCoefficients& h, const MultBrownianSpec& spec,
                                           const StreamFactory& rng, std::uint32_t replicate);

//! sum_j h_j^2 exp(2t(-lambda_j + (1/2) eps^2 sum_i g[i][j]^2)).
double mult_second_moment_exact(double t, const ModeCoefficients& h, const MultBrownianSpec& spec);

//! A diagonal jump mark z (per-mode entries) with its Poisson rate.
struct LevyMark {
    std::vector<double> z;
    double rate = 0.0;

    double hs_norm() const;
};

struct MultLevySpec {
    std::vector<LevyMark> marks;
    //! Marks must satisfy eta <= |z|_HS < 1.
    double eta = 0.0;
    double eps = 0.0;

    //! sum_m rate_m z^{(m)}_j.
    double compensator(std::size_t j) const;
    //! (1/2) eps^2 sum_m rate_m (z^{(m)}_j)^2, the exact growth rate of the second moment.
    double moment_rate(std::size_t j) const;
    /*!
     * Throws mark_out_of_range when some |z_j| >= 1 or |z|_HS leaves [eta, 1),
     * config for bad rates or eps outside (0, 1], dimension_mismatch on sizes.
     */
    void validate(std::size_t modes) const;
    MultLevySpec with_eps(double e) const;
    //! Marks with |z|_HS >= new_eta only.
    MultLevySpec truncated(double new_eta) const;

    nlohmann::json to_json() const;
    static MultLevySpec from_json(const nlohmann::json& j);
};

//! Jumps of the marked Poisson process on [0, t], drawn from stream kJumpStream.
std::vector<Jump> sample_levy_marks(double t, const MultLevySpec& spec, const StreamFactory& rng,
                                    std::uint32_t replicate);

/*!
 * h_j exp(theta_j) with theta_j = t(-lambda_j - eps sum_m rate_m z_j) + sum_jumps log(1 + eps z_j),
 * the stochastic exponential of the mild equation with jump integrand eps z X.
 */
ModeCoefficients levy_stochexp(double t, const ModeCoefficients& h, const MultLevySpec& spec,
                               const std::vector<Jump>& jumps);

ModeCoefficients levy_stochexp_sample(double t, const ModeCoefficients& h, const MultLevySpec& spec,
                                      const StreamFactory& rng, std::uint32_t replicate);

//! Variant with eps log(1 + z_j) per jump; equals levy_stochexp only at eps = 1.
ModeCoefficients levy_stochexp_eps_log(double t, const ModeCoefficients& h, const MultLevySpec& spec,
                                       const std::vector<Jump>& jumps);

/*!
 * Interlacing: between jumps each mode evolves by exp((-lambda_j - eps sum rate z_j) dt),
 * at a jump it is multiplied by 1 + eps z_j. Throws unordered_jumps.
 */
ModeCoefficients levy_flow_oracle(double t, const ModeCoefficients& h, const MultLevySpec& spec,
                                  const std::vector<Jump>& jumps);

//! sum_j h_j^2 exp(-2 lambda_j t + t eps^2 sum_m rate_m (z^{(m)}_j)^2).
double levy_second_moment_exact(double t, const ModeCoefficients& h, const MultLevySpec& spec);

/*!
 * sum_j h_j^2 exp(2[-lambda_j t + d_j(t)]) with
 * d_j = t eps sum r (log(1+z) - z) + (1/2) sum r [(1+z)^{2 t eps} - 1 - 2 t eps log(1+z)].
 * Vanishes into |S(t)h|^2 as t eps -> 0 but is not the second moment of either flow.
 */
double levy_second_moment_campbell_form(double t, const ModeCoefficients& h, const MultLevySpec& spec);

// ---- profiles ----

enum class Schedule { eps, sqrt_eps, eps_squared, exp_inv_eps, exp_inv_eps_squared };

Schedule schedule_from_name(const std::string& name);
std::string schedule_name(Schedule s);
double schedule_value(Schedule s, double eps);

struct ScheduleCheck {
    //! eps^power |ln a_eps| along the grid sorted by decreasing eps.
    std::vector<double> values;
    bool decreasing = false;
    bool below_threshold = false;
    bool pass() const { return decreasing && below_threshold; }
};

ScheduleCheck check_schedule(Schedule s, const std::vector<double>& eps_grid, int eps_power, double threshold = 1e-3);

struct MultProfileResult {
    CutoffReport report;
    //! max over the grid of B(eps) / (a_eps^{1 - lambda_N/lambda_N*} |h|); 0 without a second eigenvalue.
    double k_max = 0.0;
    bool mean_square_stable = true;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

/*!
 * Exact table of sqrt(E|X_t|^2) / a_eps at t = |ln a_eps| / lambda_N + rho.
 * Rows pass when |renormalized - profile| is at most
 * B = e^{-lambda_N rho}[(e^{t c} - 1)|v_h| + e^{t c} e^{(lambda_N - lambda_N*) t}|h|],
 * c the largest per-mode growth rate of the second moment.
 * Throws schedule_rejected unless eps^2 |ln a_eps| decreases below 1e-3.
 */
MultProfileResult mult_profile(const ModeCoefficients& h, const MultBrownianSpec& spec, Schedule schedule,
                               const std::vector<double>& eps_grid, const std::vector<double>& rho_grid,
                               unsigned threads = 1);

//! Same table for the Levy flow; the schedule test uses eps |ln a_eps|.
MultProfileResult levy_mult_profile(const ModeCoefficients& h, const MultLevySpec& spec, Schedule schedule,
                                    const std::vector<double>& eps_grid, const std::vector<double>& rho_grid,
                                    unsigned threads = 1);

/*!
 * Marks z_n = scale 2^{-n} e_mode with rate 2^n for n = 0..levels-1, so that
 * sum rate |z|^2 stays bounded while the total rate doubles per level.
 */
MultLevySpec dyadic_mark_family(std::size_t modes, std::size_t mode, double scale, int levels, double eps);

struct EtaStudy {
    std::vector<double> etas;
    //! Renormalized distance at t_eps + rho for each truncation level.
    std::vector<double> values;
    bool monotone = false;
    //! Successive increments shrink.
    bool stabilizing = false;

    nlohmann::json to_json() const;
};

EtaStudy levy_eta_study(const ModeCoefficients& h, const MultLevySpec& full, const std::vector<double>& etas,
                        Schedule schedule, double rho);

}  // namespace spcut
