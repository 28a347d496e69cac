// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
#include "spcut/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "spcut/error.hpp"
#include "spcut/parallel.hpp"

namespace spcut {

bool CutoffReport::all_pass() const
{
    for (const auto& r : rows) {
        if (!r.pass) return false;
    }
    for (const auto& c : checks) {
        if (!c.second) return false;
    }
    return true;
}

const char* CutoffReport::csv_header() { return "case,p,eps,rho_or_delta,renormalized,profile,bound,pass"; }

std::string format_number(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string CutoffReport::to_csv(bool header) const
{
    std::ostringstream out;
    if (header) out << csv_header() << '\n';
    for (const auto& r : rows) {
        out << r.case_tag << ',' << format_number(r.p) << ',' << format_number(r.eps) << ','
            << format_number(r.rho_or_delta) << ',' << format_number(r.renormalized) << ','
            << format_number(r.profile) << ',' << format_number(r.bound) << ',' << (r.pass ? "true" : "false")
            << '\n';
    }
    return out.str();
}

nlohmann::json CutoffReport::to_json() const
{
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"case", r.case_tag},
                             {"p", r.p},
                             {"eps", r.eps},
                             {"rho_or_delta", r.rho_or_delta},
                             {"renormalized", r.renormalized},
                             {"profile", r.profile},
                             {"bound", r.bound},
                             {"lower", r.lower},
                             {"pass", r.pass}});
    }
    nlohmann::json checks_json = nlohmann::json::object();
    for (const auto& [name, ok] : checks) checks_json[name] = ok;
    return {{"case", case_tag},   {"eps_grid", eps_grid}, {"rho_grid", rho_grid},
            {"rows", rows_json},  {"checks", checks_json}, {"pass", all_pass()}};
}

namespace {

void check_eps(double eps)
{
    require(eps > 0 && eps < 1, ErrorCode::invalid_argument, "eps must lie in (0, 1)");
}

void require_gaussian(const NoiseSpec& noise)
{
    require(!noise.has_jumps(), ErrorCode::unsupported, "closed-form distance needs Gaussian noise");
}

std::vector<double> values_of(const ModeCoefficients& c) { return {c.values().begin(), c.values().end()}; }

}  // namespace

// ---- heat ----

double heat_cutoff_time(double eps, const HeatLeadingData& lead)
{
    check_eps(eps);
    return -std::log(eps) / lead.lambda_leader();
}

double heat_profile(double rho, const HeatLeadingData& lead)
{
    return std::exp(-rho * lead.lambda_leader()) * lead.v_norm;
}

WassersteinReport heat_profile_abstract(double rho, const HeatLeadingData& lead, const NoiseSpec& noise, double p,
                                        std::size_t n, const StreamFactory& rng, unsigned threads)
{
    const EigenSystem& sys = *lead.v.system();
    const double explicit_profile = heat_profile(rho, lead);
    if (p == 2.0 && !noise.has_jumps()) {
        const auto var = heat_gaussian_convolution_law(kInfiniteTime, noise, sys);
        const std::vector<double> zeros(sys.size(), 0.0);
        auto shifted = values_of(lead.v.scaled(std::exp(-rho * lead.lambda_leader())));
        WassersteinReport rep;
        rep.lhs = w2_diag_gaussian(shifted, var, zeros, var);
        rep.rhs = explicit_profile;
        rep.lower = explicit_profile;
        rep.bound = 1e-12 * std::max(1.0, explicit_profile);
        rep.pass = std::abs(rep.lhs - rep.rhs) <= rep.bound;
        return rep;
    }
    require(lead.leading_modes.size() == 1, ErrorCode::unsupported,
            "empirical profile needs v_h on a single mode");
    const std::size_t k = lead.leader;
    const double u = std::exp(-rho * lead.lambda_leader()) * lead.v[k];
    auto law = mode_convolution_sampler(kInfiniteTime, noise, sys, k);
    return shift_linearity_check(u, law, p, n, rng, threads);
}

double renormalized_distance_heat(double t, const ModeCoefficients& h, double eps, const NoiseSpec& noise)
{
    require(eps > 0, ErrorCode::invalid_argument, "eps must be positive");
    require(t >= 0 && std::isfinite(t), ErrorCode::invalid_time, "time must be finite and nonnegative");
    require_gaussian(noise);
    const EigenSystem& sys = *h.system();
    const auto var_t = heat_gaussian_convolution_law(t, noise, sys);
    const auto var_inf = heat_gaussian_convolution_law(kInfiniteTime, noise, sys);
    const std::vector<double> zeros(sys.size(), 0.0);
    return w2_diag_gaussian(values_of(heat_apply_scaled(t, h, -std::log(eps))), var_t, zeros, var_inf);
}

double heat_distance_unit_noise(double t, const ModeCoefficients& h, const NoiseSpec& noise)
{
    require(t >= 0 && std::isfinite(t), ErrorCode::invalid_time, "time must be finite and nonnegative");
    require_gaussian(noise);
    const EigenSystem& sys = *h.system();
    const auto var_t = heat_gaussian_convolution_law(t, noise, sys);
    const auto var_inf = heat_gaussian_convolution_law(kInfiniteTime, noise, sys);
    const std::vector<double> zeros(sys.size(), 0.0);
    return w2_diag_gaussian(values_of(heat_apply(t, h)), var_t, zeros, var_inf);
}

Estimate renormalized_distance_heat_empirical(double t, const ModeCoefficients& h, double eps, const NoiseSpec& noise,
                                              double p, std::size_t n, const StreamFactory& rng, unsigned threads)
{
    const EigenSystem& sys = *h.system();
    require(sys.size() == 1, ErrorCode::unsupported, "empirical distance needs a one-mode system");
    require(eps > 0, ErrorCode::invalid_argument, "eps must be positive");
    require(t >= 0 && std::isfinite(t), ErrorCode::invalid_time, "time must be finite and nonnegative");
    require(n >= 2, ErrorCode::invalid_argument, "need at least two samples");
    const double shift = heat_apply_scaled(t, h, -std::log(eps))[0];
    auto law_t = mode_convolution_sampler(t, noise, sys, 0);
    auto law_inf = mode_convolution_sampler(kInfiniteTime, noise, sys, 0);
    auto reps = parallel_map(kRepetitions, threads, [&](std::size_t r) {
        auto x = draw_samples(law_t, n, rng, static_cast<std::uint32_t>(r), 0);
        auto y = draw_samples(law_inf, n, rng, static_cast<std::uint32_t>(r), 1);
        for (auto& v : x) v += shift;
        return wp_empirical_1d(std::move(x), std::move(y), p);
    });
    double m = 0.0;
    for (double x : reps) m += x;
    m /= kRepetitions;
    double v = 0.0;
    for (double x : reps) v += (x - m) * (x - m);
    return {m, std::sqrt(v / (kRepetitions - 1.0) / kRepetitions)};
}

double heat_error_bound(double rho, double eps, const HeatLeadingData& lead, const DecayConstants& decay,
                        double moment, BoundVariant variant)
{
    check_eps(eps);
    const double t = heat_cutoff_time(eps, lead) + rho;
    require(t >= 0, ErrorCode::invalid_time, "t_eps + rho must be nonnegative");
    const double lam = lead.lambda_leader();
    const auto next = lead.lambda_next();
    if (variant == BoundVariant::proof) {
        double out = decay.C_star * std::exp(-decay.lambda_star * t) * moment;
        if (next) out += std::exp(-lam * rho + (lam - *next) * t) * lead.h_norm;
        return out;
    }
    const double log_eps = std::log(eps);
    const double slow = next ? *next : lam;
    double out = std::exp(log_eps * decay.lambda_star / slow - decay.lambda_star * rho) * decay.C_star * moment;
    if (next) out += std::exp(log_eps * (1.0 - lam / *next) + (lam - *next) * rho) * lead.h_norm;
    return out;
}

namespace {

/*!
 * |renormalized - profile| written as (renormalized^2 - profile^2) / (renormalized + profile)
 * with the difference of squares summed term by term, so tiny residuals keep their digits.
 */
double heat_profile_residual(double t, double rho, const ModeCoefficients& h, double eps, const NoiseSpec& noise,
                             const HeatLeadingData& lead)
{
    const EigenSystem& sys = *h.system();
    const auto var_t = heat_gaussian_convolution_law(t, noise, sys);
    const auto var_inf = heat_gaussian_convolution_law(kInfiniteTime, noise, sys);
    const auto mean = heat_apply_scaled(t, h, -std::log(eps));
    const double decay = std::exp(-rho * lead.lambda_leader());
    double diff_sq = 0.0, ren_sq = 0.0;
    for (std::size_t k = 0; k < sys.size(); ++k) {
        const double gap = std::sqrt(var_t[k]) - std::sqrt(var_inf[k]);
        ren_sq += mean[k] * mean[k] + gap * gap;
        diff_sq += gap * gap;
        const double target = decay * lead.v[k];
        diff_sq += (mean[k] - target) * (mean[k] + target);
    }
    const double ren = std::sqrt(ren_sq);
    const double prof = heat_profile(rho, lead);
    if (ren + prof == 0.0) return 0.0;
    return std::abs(diff_sq) / (ren + prof);
}

}  // namespace

CutoffReport heat_profile_report(const ModeCoefficients& h, const NoiseSpec& noise, const std::vector<double>& eps_grid,
                                 const std::vector<double>& rho_grid, BoundVariant variant, unsigned threads)
{
    require_gaussian(noise);
    require(!eps_grid.empty() && !rho_grid.empty(), ErrorCode::invalid_argument, "empty grid");
    const EigenSystem& sys = *h.system();
    noise.validate(sys.size());
    const auto lead = heat_leading_data(h);
    const auto decay = heat_decay_constants(sys);
    const double moment = heat_gaussian_moment2(noise, sys);

    CutoffReport rep;
    rep.case_tag = "heat-profile";
    rep.eps_grid = eps_grid;
    rep.rho_grid = rho_grid;
    const std::size_t nr = rho_grid.size();
    struct Cell {
        CutoffRow row;
        double residual = 0.0;
    };
    auto cells = parallel_map(eps_grid.size() * nr, threads, [&](std::size_t i) {
        const double eps = eps_grid[i / nr], rho = rho_grid[i % nr];
        const double t = heat_cutoff_time(eps, lead) + rho;
        require(t >= 0, ErrorCode::invalid_time, "t_eps + rho must be nonnegative");
        Cell c;
        c.row.case_tag = rep.case_tag;
        c.row.eps = eps;
        c.row.rho_or_delta = rho;
        c.row.renormalized = renormalized_distance_heat(t, h, eps, noise);
        c.row.profile = heat_profile(rho, lead);
        c.row.bound = heat_error_bound(rho, eps, lead, decay, moment, variant);
        c.row.lower = c.row.profile;
        c.residual = heat_profile_residual(t, rho, h, eps, noise, lead);
        c.row.pass = c.residual <= c.row.bound;
        return c;
    });
    for (const auto& c : cells) rep.rows.push_back(c.row);

    std::vector<std::size_t> order(eps_grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return eps_grid[a] > eps_grid[b]; });
    bool decreasing = true;
    for (std::size_t j = 0; j < nr; ++j) {
        for (std::size_t i = 1; i < order.size(); ++i) {
            if (cells[order[i] * nr + j].residual > cells[order[i - 1] * nr + j].residual) decreasing = false;
        }
    }
    rep.checks.emplace_back("residual_decreases_with_eps", decreasing);
    return rep;
}

CutoffReport simple_cutoff_scan(const std::vector<double>& delta_grid, const std::vector<double>& eps_grid,
                                const ModeCoefficients& h, const NoiseSpec& noise, unsigned threads)
{
    require_gaussian(noise);
    require(!eps_grid.empty() && !delta_grid.empty(), ErrorCode::invalid_argument, "empty grid");
    for (double d : delta_grid) {
        require(d > 0 && d != 1.0, ErrorCode::invalid_argument, "delta must be positive and differ from 1");
    }
    const auto lead = heat_leading_data(h);
    std::vector<std::size_t> order(eps_grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return eps_grid[a] > eps_grid[b]; });

    CutoffReport rep;
    rep.case_tag = "simple-cutoff";
    rep.eps_grid = eps_grid;
    rep.rho_grid = delta_grid;
    const std::size_t ne = eps_grid.size();
    auto values = parallel_map(delta_grid.size() * ne, threads, [&](std::size_t i) {
        const double delta = delta_grid[i / ne], eps = eps_grid[order[i % ne]];
        return renormalized_distance_heat(delta * heat_cutoff_time(eps, lead), h, eps, noise);
    });
    for (std::size_t d = 0; d < delta_grid.size(); ++d) {
        for (std::size_t j = 0; j < ne; ++j) {
            CutoffRow row;
            row.case_tag = rep.case_tag;
            row.eps = eps_grid[order[j]];
            row.rho_or_delta = delta_grid[d];
            row.renormalized = values[d * ne + j];
            row.profile = delta_grid[d] < 1 ? std::numeric_limits<double>::infinity() : 0.0;
            row.pass = true;
            if (j > 0) {
                const double prev = values[d * ne + j - 1];
                row.pass = delta_grid[d] < 1 ? row.renormalized >= prev : row.renormalized <= prev;
            }
            rep.rows.push_back(row);
        }
    }
    return rep;
}

// ---- wave ----

double wave_cutoff_time_overdamped(double eps, const OverdampedLeader& leader)
{
    check_eps(eps);
    return -std::log(eps) / leader.omega_star;
}

double wave_cutoff_time_subcritical(double eps, double gamma)
{
    check_eps(eps);
    require(gamma > 0, ErrorCode::invalid_argument, "gamma must be positive");
    return -2.0 * std::log(eps) / gamma;
}

double wave_profile_overdamped(double rho, const OverdampedLeader& leader)
{
    return std::exp(-rho * leader.omega_star) * leader.v_of_z.norm();
}

namespace {

double wave_distance_scaled(double t, const WaveState& z, double log_scale, const NoiseSpec& noise)
{
    require(t >= 0 && std::isfinite(t), ErrorCode::invalid_time, "time must be finite and nonnegative");
    require_gaussian(noise);
    const WaveSpectrum& spec = *z.spectrum();
    const auto cov_t = wave_gaussian_convolution_law(t, noise, spec);
    const auto cov_inf = wave_gaussian_convolution_law(kInfiniteTime, noise, spec);
    const auto mean = wave_apply_scaled(t, z, log_scale);
    std::vector<double> d(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) {
        d[k] = w2_gaussian_2x2({mean.position()[k], mean.velocity()[k]}, cov_t[k], {0.0, 0.0}, cov_inf[k],
                               1.0 + spec.lambda(k));
    }
    return w2_product(d);
}

}  // namespace

double renormalized_distance_wave(double t, const WaveState& z, double eps, const NoiseSpec& noise)
{
    require(eps > 0, ErrorCode::invalid_argument, "eps must be positive");
    return wave_distance_scaled(t, z, -std::log(eps), noise);
}

double wave_convolution_gap(double t, const NoiseSpec& noise, const WaveSpectrum& spectrum)
{
    require(t >= 0, ErrorCode::invalid_time, "time must be nonnegative");
    require_gaussian(noise);
    if (std::isinf(t)) return 0.0;
    const auto cov_t = wave_gaussian_convolution_law(t, noise, spectrum);
    const auto cov_inf = wave_gaussian_convolution_law(kInfiniteTime, noise, spectrum);
    std::vector<double> d(spectrum.size());
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        d[k] = w2_gaussian_2x2({0.0, 0.0}, cov_t[k], {0.0, 0.0}, cov_inf[k], 1.0 + spectrum.lambda(k));
    }
    return w2_product(d);
}

CutoffReport wave_profile_report(const WaveState& z, const NoiseSpec& noise, const std::vector<double>& eps_grid,
                                 const std::vector<double>& rho_grid, double rel_tol, unsigned threads)
{
    require_gaussian(noise);
    require(!eps_grid.empty() && !rho_grid.empty(), ErrorCode::invalid_argument, "empty grid");
    require(rel_tol > 0, ErrorCode::invalid_argument, "rel_tol must be positive");
    noise.validate(z.size());
    const auto leader = wave_overdamped_leader(z);
    CutoffReport rep;
    rep.case_tag = "wave-profile";
    rep.eps_grid = eps_grid;
    rep.rho_grid = rho_grid;
    const std::size_t nr = rho_grid.size();
    rep.rows = parallel_map(eps_grid.size() * nr, threads, [&](std::size_t i) {
        const double eps = eps_grid[i / nr], rho = rho_grid[i % nr];
        const double t = wave_cutoff_time_overdamped(eps, leader) + rho;
        require(t >= 0, ErrorCode::invalid_time, "t_eps + rho must be nonnegative");
        CutoffRow row;
        row.case_tag = rep.case_tag;
        row.eps = eps;
        row.rho_or_delta = rho;
        row.renormalized = renormalized_distance_wave(t, z, eps, noise);
        row.profile = wave_profile_overdamped(rho, leader);
        row.bound = rel_tol * row.profile;
        row.lower = row.profile - row.bound;
        row.pass = std::abs(row.renormalized - row.profile) <= row.bound;
        return row;
    });
    return rep;
}

EnvelopeScan scan_subcritical_envelope(const WaveState& z, double t0, int points)
{
    require(points >= 2, ErrorCode::invalid_argument, "need at least two grid points");
    require(t0 >= 0 && std::isfinite(t0), ErrorCode::invalid_time, "t0 must be finite and nonnegative");
    const WaveSpectrum& spec = *z.spectrum();
    require(spec.j_star() == 0, ErrorCode::wrong_case, "spectrum has overdamped modes");
    double theta_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const auto& b = std::get<std::complex<double>>(z.modal(k));
        if (b != 0.0) theta_min = std::min(theta_min, std::get<ComplexPair>(spec.roots(k)).theta);
    }
    require(std::isfinite(theta_min), ErrorCode::zero_datum, "initial state is zero");
    const double period = M_PI / theta_min;
    EnvelopeScan out{std::numeric_limits<double>::infinity(), 0.0};
    for (int i = 0; i < points; ++i) {
        const double t = t0 + period * i / (points - 1);
        const double v = std::sqrt(std::max(0.0, wave_subcritical_norm_sq(t, z)));
        out.grid_min = std::min(out.grid_min, v);
        out.grid_max = std::max(out.grid_max, v);
    }
    return out;
}

CutoffReport wave_window_diagnostics(const std::vector<double>& rho_grid, const std::vector<double>& eps_grid,
                                     const WaveState& z, const NoiseSpec& noise, double ratio_threshold,
                                     unsigned threads)
{
    require_gaussian(noise);
    require(!eps_grid.empty() && !rho_grid.empty(), ErrorCode::invalid_argument, "empty grid");
    noise.validate(z.size());
    const WaveSpectrum& spec = *z.spectrum();
    const double gamma = spec.gamma();
    const auto env = wave_subcritical_envelope(z);
    const double lo = std::sqrt(std::max(0.0, env.lo_sq)), hi = std::sqrt(std::max(0.0, env.hi_sq));

    CutoffReport rep;
    rep.case_tag = "wave-window";
    rep.eps_grid = eps_grid;
    rep.rho_grid = rho_grid;
    const std::size_t nr = rho_grid.size();
    rep.rows = parallel_map(eps_grid.size() * nr, threads, [&](std::size_t i) {
        const double eps = eps_grid[i / nr], rho = rho_grid[i % nr];
        const double t = wave_cutoff_time_subcritical(eps, gamma) + rho;
        require(t >= 0, ErrorCode::invalid_time, "t_eps + rho must be nonnegative");
        const double scale = std::exp(-gamma * rho / 2.0);
        CutoffRow row;
        row.case_tag = rep.case_tag;
        row.eps = eps;
        row.rho_or_delta = rho;
        row.renormalized = renormalized_distance_wave(t, z, eps, noise);
        row.profile = scale * hi;
        row.lower = scale * lo;
        row.bound = wave_convolution_gap(t, noise, spec);
        const double tol = 1e-12 * std::max(1.0, row.profile);
        row.pass = row.renormalized >= row.lower - row.bound - tol && row.renormalized <= row.profile + row.bound + tol;
        return row;
    });

    rep.checks.emplace_back("envelope_positive", env.lo_sq > 0);
    const auto scan = scan_subcritical_envelope(z, 0.0);
    rep.checks.emplace_back("grid_within_envelope",
                            scan.grid_min > 0 && scan.grid_min >= lo * (1 - 1e-9) && scan.grid_max <= hi * (1 + 1e-9));
    const auto [rmin, rmax] = std::minmax_element(rho_grid.begin(), rho_grid.end());
    if (*rmin < 0 && *rmax > 0) {
        const std::size_t e = static_cast<std::size_t>(
            std::min_element(eps_grid.begin(), eps_grid.end()) - eps_grid.begin());
        const double early = rep.rows[e * nr + static_cast<std::size_t>(rmin - rho_grid.begin())].renormalized;
        const double late = rep.rows[e * nr + static_cast<std::size_t>(rmax - rho_grid.begin())].renormalized;
        rep.checks.emplace_back("window_ratio", late > 0 && early / late > ratio_threshold);
    }
    return rep;
}

}  // namespace spcut
