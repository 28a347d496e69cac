// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
//
// Cutoff times, profiles, error bounds and window diagnostics for the heat
// and damped-wave equations with small additive noise.
#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "spcut/wasserstein.hpp"

namespace spcut {

//! One table row; `rho_or_delta` holds rho for profile cases and delta for simple-cutoff scans.
struct CutoffRow {
    std::string case_tag;
    double p = 2.0;
    double eps = 0.0;
    double rho_or_delta = 0.0;
    double renormalized = 0.0;
    double profile = 0.0;
    double bound = 0.0;
    bool pass = false;
    //! Lower envelope for window rows; not part of the CSV schema.
    double lower = 0.0;
};

struct CutoffReport {
    std::string case_tag;
    std::vector<double> eps_grid;
    std::vector<double> rho_grid;
    std::vector<CutoffRow> rows;
    //! Named checks beyond the per-row ones (trend tests, envelope positivity).
    std::vector<std::pair<std::string, bool>> checks;

    bool all_pass() const;
    static const char* csv_header();
    std::string to_csv(bool header = true) const;
    nlohmann::json to_json() const;
};

//! Decimal text with 17 significant digits.
std::string format_number(double x);

// ---- heat ----

double heat_cutoff_time(double eps, const HeatLeadingData& lead);
double heat_profile(double rho, const HeatLeadingData& lead);

/*!
 * Profile W_p(e^{-rho lambda_N} v_h + L_inf, L_inf). Exact for p = 2 with
 * Gaussian noise; otherwise v_h must live on one mode whose noise is
 * independent of the others, and the 1D estimator is used.
 * lhs is the estimate and rhs the explicit profile e^{-rho lambda_N}|v_h|.
 */
WassersteinReport heat_profile_abstract(double rho, const HeatLeadingData& lead, const NoiseSpec& noise, double p,
                                        std::size_t n, const StreamFactory& rng, unsigned threads = 1);

//! W2(X^eps_t(h), mu^eps)/eps for Gaussian noise, in closed form.
double renormalized_distance_heat(double t, const ModeCoefficients& h, double eps, const NoiseSpec& noise);

//! W2(X^1_t(h), mu^1) in closed form.
double heat_distance_unit_noise(double t, const ModeCoefficients& h, const NoiseSpec& noise);

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

//! W_p(X^eps_t(h), mu^eps)/eps^{1^p} by the 1D estimator on a one-mode system.
Estimate renormalized_distance_heat_empirical(double t, const ModeCoefficients& h, double eps, const NoiseSpec& noise,
                                              double p, std::size_t n, const StreamFactory& rng,
                                              unsigned threads = 1);

enum class BoundVariant {
    //! Exponents from the proof: C e^{-lambda_*(t_eps+rho)} M + e^{-lambda_N rho} e^{(lambda_N - lambda_N*)(t_eps+rho)} |h|.
    proof,
    //! eps^{lambda_*/lambda_N*} e^{-lambda_* rho} C M + eps^{1 - lambda_N/lambda_N*} e^{(lambda_N - lambda_N*) rho} |h|.
    printed,
};

/*!
 * Explicit bound on |renormalized - profile| at t_eps + rho. `moment` is
 * (E|L_inf|^p)^{1/p}. The second term vanishes when h has a single
 * eigenvalue in its support.
 */
double heat_error_bound(double rho, double eps, const HeatLeadingData& lead, const DecayConstants& decay,
                        double moment, BoundVariant variant = BoundVariant::proof);

/*!
 * Exact Gaussian p = 2 table over (eps, rho) with rows passing when the
 * residual stays under heat_error_bound; adds a check that the residual
 * decreases along the eps grid for each rho.
 */
CutoffReport heat_profile_report(const ModeCoefficients& h, const NoiseSpec& noise, const std::vector<double>& eps_grid,
                                 const std::vector<double>& rho_grid, BoundVariant variant = BoundVariant::proof,
                                 unsigned threads = 1);

/*!
 * Renormalized distance at delta t_eps. Rows pass when the value moves in
 * the predicted direction as eps decreases (up for delta < 1, down for delta > 1).
 */
CutoffReport simple_cutoff_scan(const std::vector<double>& delta_grid, const std::vector<double>& eps_grid,
                                const ModeCoefficients& h, const NoiseSpec& noise, unsigned threads = 1);

// ---- wave ----

double wave_cutoff_time_overdamped(double eps, const OverdampedLeader& leader);
double wave_cutoff_time_subcritical(double eps, double gamma);
double wave_profile_overdamped(double rho, const OverdampedLeader& leader);

//! W2(X^eps_t(z), mu^eps)/eps for velocity-forced Gaussian noise, in the energy norm.
double renormalized_distance_wave(double t, const WaveState& z, double eps, const NoiseSpec& noise);

//! W2 between the wave convolution at t and its invariant law.
double wave_convolution_gap(double t, const NoiseSpec& noise, const WaveSpectrum& spectrum);

/*!
 * Overdamped profile table; rows pass when the renormalized distance is
 * within `rel_tol` of the profile.
 */
CutoffReport wave_profile_report(const WaveState& z, const NoiseSpec& noise, const std::vector<double>& eps_grid,
                                 const std::vector<double>& rho_grid, double rel_tol = 0.1, unsigned threads = 1);

/*!
 * Window diagnostics for purely oscillatory spectra. Each row stores the
 * renormalized distance, profile = e^{-gamma rho/2} times the upper
 * envelope of |v(t,z)| and bound = the ergodic slack W2(L_t, L_inf); it passes
 * when the distance sits inside [lower envelope - slack, upper envelope + slack].
 * Extra checks: positive envelope, the t-grid min/max inside the analytic
 * envelope, and the ratio between the most negative and most positive rho
 * exceeding `ratio_threshold` at the smallest eps.
 */
CutoffReport wave_window_diagnostics(const std::vector<double>& rho_grid, const std::vector<double>& eps_grid,
                                     const WaveState& z, const NoiseSpec& noise, double ratio_threshold = 100.0,
                                     unsigned threads = 1);

struct EnvelopeScan {
    double grid_min = 0.0;
    double grid_max = 0.0;
};

//! min/max of |v(t,z)| over [t0, t0 + pi/theta_min] on `points` nodes, theta_min over modes present in z.
EnvelopeScan scan_subcritical_envelope(const WaveState& z, double t0, int points = 2000);

}  // namespace spcut
