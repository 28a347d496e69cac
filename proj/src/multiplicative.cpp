// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
#include "spcut/multiplicative.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "spcut/error.hpp"
#include "spcut/parallel.hpp"

namespace spcut {

namespace {

void check_time(double t)
{
    require(t >= 0 && std::isfinite(t), ErrorCode::invalid_time, "time must be finite and nonnegative");
}

std::vector<double> number_array(const nlohmann::json& j, const std::string& at)
{
    require(j.is_array(), ErrorCode::config, at + " must be an array");
    std::vector<double> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        require(j[k].is_number(), ErrorCode::config, at + "/" + std::to_string(k) + " must be a number");
        out.push_back(j[k].get<double>());
    }
    return out;
}

double number_field(const nlohmann::json& j, const char* key)
{
    require(j.contains(key), ErrorCode::config, std::string("/") + key + " is required");
    require(j[key].is_number(), ErrorCode::config, std::string("/") + key + " must be a number");
    return j[key].get<double>();
}

}  // namespace

// ---- Brownian ----

double MultBrownianSpec::ito_correction(std::size_t j) const
{
    double s = 0.0;
    for (const auto& gi : g) {
        if (j < gi.size()) s += gi[j] * gi[j];
    }
    return 0.5 * eps * eps * s;
}

bool MultBrownianSpec::mean_square_stable(const EigenSystem& system) const
{
    for (std::size_t j = 0; j < system.size(); ++j) {
        if (-2.0 * system.lambda(j) + 2.0 * ito_correction(j) >= 0) return false;
    }
    return true;
}

void MultBrownianSpec::validate(std::size_t modes) const
{
    require(eps >= 0 && std::isfinite(eps), ErrorCode::config, "/eps must be finite and nonnegative");
    for (std::size_t i = 0; i < g.size(); ++i) {
        require(g[i].size() == modes, ErrorCode::dimension_mismatch,
                "/g/" + std::to_string(i) + " has " + std::to_string(g[i].size()) + " entries for " +
                    std::to_string(modes) + " modes");
        for (double x : g[i]) {
            require(std::isfinite(x), ErrorCode::config, "/g/" + std::to_string(i) + " holds a non-finite entry");
        }
    }
}

MultBrownianSpec MultBrownianSpec::with_eps(double e) const
{
    MultBrownianSpec out = *this;
    out.eps = e;
    return out;
}

nlohmann::json MultBrownianSpec::to_json() const { return {{"g", g}, {"eps", eps}}; }

MultBrownianSpec MultBrownianSpec::from_json(const nlohmann::json& j)
{
    require(j.is_object(), ErrorCode::config, "/: Brownian spec must be an object");
    MultBrownianSpec out;
    require(j.contains("g") && j["g"].is_array(), ErrorCode::config, "/g must be an array of arrays");
    for (std::size_t i = 0; i < j["g"].size(); ++i) out.g.push_back(number_array(j["g"][i], "/g/" + std::to_string(i)));
    if (j.contains("eps")) out.eps = number_field(j, "eps");
    return out;
}

ModeCoefficients mult_brownian_flow(double t, const ModeCoefficients& h, const MultBrownianSpec& spec,
                                    std::span<const double> brownian_at_t)
{
    check_time(t);
    const EigenSystem& sys = *h.system();
    spec.validate(sys.size());
    require(brownian_at_t.size() == spec.g.size(), ErrorCode::dimension_mismatch,
            "one Brownian value per operator is required");
    std::vector<double> out(sys.size());
    for (std::size_t j = 0; j < sys.size(); ++j) {
        double noise = 0.0;
        for (std::size_t i = 0; i < spec.g.size(); ++i) noise += spec.g[i][j] * brownian_at_t[i];
        out[j] = h[j] * std::exp((-sys.lambda(j) - spec.ito_correction(j)) * t + spec.eps * noise);
    }
    return ModeCoefficients(h.system(), std::move(out));
}

ModeCoefficients mult_brownian_flow_sample(double t, const ModeCoefficients& h, const MultBrownianSpec& spec,
                                           const StreamFactory& rng, std::uint32_t replicate)
{
    check_time(t);
    std::vector<double> b(spec.g.size(), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) {
        auto s = rng(replicate, static_cast<std::uint32_t>(i));
        if (t > 0) b[i] = std::normal_distribution<double>(0.0, std::sqrt(t))(s);
    }
    return mult_brownian_flow(t, h, spec, b);
}

namespace {

//! sum_j h_j^2 exp(2t(-lambda_j + c_j)) in log space.
double second_moment(double t, const ModeCoefficients& h, const std::vector<double>& growth)
{
    check_time(t);
    const EigenSystem& sys = *h.system();
    double s = 0.0;
    for (std::size_t j = 0; j < sys.size(); ++j) {
        if (h[j] == 0.0) continue;
        s += std::exp(2.0 * (std::log(std::abs(h[j])) + t * (growth[j] - sys.lambda(j))));
    }
    return s;
}

std::vector<double> brownian_growth(const MultBrownianSpec& spec, std::size_t modes)
{
    std::vector<double> c(modes);
    for (std::size_t j = 0; j < modes; ++j) c[j] = spec.ito_correction(j);
    return c;
}

std::vector<double> levy_growth(const MultLevySpec& spec, std::size_t modes)
{
    std::vector<double> c(modes);
    for (std::size_t j = 0; j < modes; ++j) c[j] = spec.moment_rate(j);
    return c;
}

}  // namespace

double mult_second_moment_exact(double t, const ModeCoefficients& h, const MultBrownianSpec& spec)
{
    spec.validate(h.size());
    return second_moment(t, h, brownian_growth(spec, h.size()));
}

// ---- Levy ----

double LevyMark::hs_norm() const
{
    double s = 0.0;
    for (double x : z) s += x * x;
    return std::sqrt(s);
}

double MultLevySpec::compensator(std::size_t j) const
{
    double s = 0.0;
    for (const auto& m : marks) {
        if (j < m.z.size()) s += m.rate * m.z[j];
    }
    return s;
}

double MultLevySpec::moment_rate(std::size_t j) const
{
    double s = 0.0;
    for (const auto& m : marks) {
        if (j < m.z.size()) s += m.rate * m.z[j] * m.z[j];
    }
    return 0.5 * eps * eps * s;
}

void MultLevySpec::validate(std::size_t modes) const
{
    require(eps > 0 && eps <= 1, ErrorCode::config, "/eps must lie in (0, 1]");
    require(eta > 0 && eta < 1, ErrorCode::config, "/eta must lie in (0, 1)");
    for (std::size_t m = 0; m < marks.size(); ++m) {
        const std::string at = "/marks/" + std::to_string(m);
        require(marks[m].z.size() == modes, ErrorCode::dimension_mismatch, at + "/z has the wrong length");
        require(marks[m].rate > 0 && std::isfinite(marks[m].rate), ErrorCode::config,
                at + "/rate must be finite and positive");
        for (double x : marks[m].z) {
            require(std::abs(x) < 1, ErrorCode::mark_out_of_range, at + "/z has an entry with |z_j| >= 1");
        }
        const double norm = marks[m].hs_norm();
        require(norm >= eta && norm < 1, ErrorCode::mark_out_of_range, at + "/z has norm outside [eta, 1)");
    }
}

MultLevySpec MultLevySpec::with_eps(double e) const
{
    MultLevySpec out = *this;
    out.eps = e;
    return out;
}

MultLevySpec MultLevySpec::truncated(double new_eta) const
{
    require(new_eta > 0 && new_eta < 1, ErrorCode::invalid_argument, "eta must lie in (0, 1)");
    MultLevySpec out;
    out.eta = new_eta;
    out.eps = eps;
    for (const auto& m : marks) {
        if (m.hs_norm() >= new_eta) out.marks.push_back(m);
    }
    return out;
}

nlohmann::json MultLevySpec::to_json() const
{
    nlohmann::json ms = nlohmann::json::array();
    for (const auto& m : marks) ms.push_back({{"z", m.z}, {"rate", m.rate}});
    return {{"marks", ms}, {"eta", eta}, {"eps", eps}};
}

MultLevySpec MultLevySpec::from_json(const nlohmann::json& j)
{
    require(j.is_object(), ErrorCode::config, "/: Levy spec must be an object");
    MultLevySpec out;
    require(j.contains("marks") && j["marks"].is_array(), ErrorCode::config, "/marks must be an array");
    for (std::size_t m = 0; m < j["marks"].size(); ++m) {
        const auto& jm = j["marks"][m];
        const std::string at = "/marks/" + std::to_string(m);
        require(jm.is_object() && jm.contains("z") && jm.contains("rate"), ErrorCode::config, at + " needs z and rate");
        require(jm["rate"].is_number(), ErrorCode::config, at + "/rate must be a number");
        out.marks.push_back({number_array(jm["z"], at + "/z"), jm["rate"].get<double>()});
    }
    out.eta = number_field(j, "eta");
    if (j.contains("eps")) out.eps = number_field(j, "eps");
    return out;
}

std::vector<Jump> sample_levy_marks(double t, const MultLevySpec& spec, const StreamFactory& rng,
                                    std::uint32_t replicate)
{
    check_time(t);
    std::vector<JumpMark> marks;
    marks.reserve(spec.marks.size());
    for (const auto& m : spec.marks) marks.push_back({m.z, m.rate});
    auto s = rng(replicate, kJumpStream);
    return sample_jumps(t, marks, s);
}

namespace {

void check_jumps(double t, const MultLevySpec& spec, const std::vector<Jump>& jumps)
{
    double prev = 0.0;
    for (const auto& j : jumps) {
        require(j.mark < spec.marks.size(), ErrorCode::invalid_index, "jump refers to an unknown mark");
        require(j.time >= prev && j.time <= t, ErrorCode::unordered_jumps, "jump times must be sorted within [0, t]");
        prev = j.time;
    }
}

template <class JumpLog>
ModeCoefficients exponential_form(double t, const ModeCoefficients& h, const MultLevySpec& spec,
                                  const std::vector<Jump>& jumps, JumpLog jump_log)
{
    check_time(t);
    const EigenSystem& sys = *h.system();
    spec.validate(sys.size());
    check_jumps(t, spec, jumps);
    std::vector<double> out(sys.size());
    for (std::size_t j = 0; j < sys.size(); ++j) {
        double theta = t * (-sys.lambda(j) - spec.eps * spec.compensator(j));
        for (const auto& jump : jumps) theta += jump_log(spec.marks[jump.mark].z[j]);
        out[j] = h[j] * std::exp(theta);
    }
    return ModeCoefficients(h.system(), std::move(out));
}

}  // namespace

ModeCoefficients levy_stochexp(double t, const ModeCoefficients& h, const MultLevySpec& spec,
                               const std::vector<Jump>& jumps)
{
    const double eps = spec.eps;
    return exponential_form(t, h, spec, jumps, [eps](double z) { return std::log1p(eps * z); });
}

ModeCoefficients levy_stochexp_sample(double t, const ModeCoefficients& h, const MultLevySpec& spec,
                                      const StreamFactory& rng, std::uint32_t replicate)
{
    return levy_stochexp(t, h, spec, sample_levy_marks(t, spec, rng, replicate));
}

ModeCoefficients levy_stochexp_eps_log(double t, const ModeCoefficients& h, const MultLevySpec& spec,
                                       const std::vector<Jump>& jumps)
{
    const double eps = spec.eps;
    return exponential_form(t, h, spec, jumps, [eps](double z) { return eps * std::log1p(z); });
}

ModeCoefficients levy_flow_oracle(double t, const ModeCoefficients& h, const MultLevySpec& spec,
                                  const std::vector<Jump>& jumps)
{
    check_time(t);
    const EigenSystem& sys = *h.system();
    spec.validate(sys.size());
    check_jumps(t, spec, jumps);
    std::vector<double> x(h.values().begin(), h.values().end());
    std::vector<double> rate(sys.size());
    for (std::size_t j = 0; j < sys.size(); ++j) rate[j] = -sys.lambda(j) - spec.eps * spec.compensator(j);
    double now = 0.0;
    for (const auto& jump : jumps) {
        const auto& z = spec.marks[jump.mark].z;
        for (std::size_t j = 0; j < x.size(); ++j) {
            x[j] *= std::exp(rate[j] * (jump.time - now));
            x[j] += spec.eps * z[j] * x[j];
        }
        now = jump.time;
    }
    for (std::size_t j = 0; j < x.size(); ++j) x[j] *= std::exp(rate[j] * (t - now));
    return ModeCoefficients(h.system(), std::move(x));
}

double levy_second_moment_exact(double t, const ModeCoefficients& h, const MultLevySpec& spec)
{
    spec.validate(h.size());
    return second_moment(t, h, levy_growth(spec, h.size()));
}

double levy_second_moment_campbell_form(double t, const ModeCoefficients& h, const MultLevySpec& spec)
{
    check_time(t);
    const EigenSystem& sys = *h.system();
    spec.validate(sys.size());
    const double te = t * spec.eps;
    double s = 0.0;
    for (std::size_t j = 0; j < sys.size(); ++j) {
        if (h[j] == 0.0) continue;
        double d = 0.0;
        for (const auto& m : spec.marks) {
            const double l = std::log1p(m.z[j]);
            d += te * m.rate * (l - m.z[j]);
            d += 0.5 * m.rate * (std::expm1(2.0 * te * l) - 2.0 * te * l);
        }
        s += std::exp(2.0 * (std::log(std::abs(h[j])) - sys.lambda(j) * t + d));
    }
    return s;
}

// ---- profiles ----

Schedule schedule_from_name(const std::string& name)
{
    if (name == "eps") return Schedule::eps;
    if (name == "sqrt-eps") return Schedule::sqrt_eps;
    if (name == "eps-squared") return Schedule::eps_squared;
    if (name == "exp-inv-eps") return Schedule::exp_inv_eps;
    if (name == "exp-inv-eps-squared") return Schedule::exp_inv_eps_squared;
    throw Error(ErrorCode::config, "unknown schedule '" + name + "'");
}

std::string schedule_name(Schedule s)
{
    switch (s) {
    case Schedule::eps:
        return "eps";
    case Schedule::sqrt_eps:
        return "sqrt-eps";
    case Schedule::eps_squared:
        return "eps-squared";
    case Schedule::exp_inv_eps:
        return "exp-inv-eps";
    case Schedule::exp_inv_eps_squared:
        return "exp-inv-eps-squared";
    }
    return "eps";
}

namespace {

//! ln a_eps, kept in log form so that exp(-1/eps^2) stays representable.
double log_schedule(Schedule s, double eps)
{
    require(eps > 0 && eps < 1, ErrorCode::invalid_argument, "eps must lie in (0, 1)");
    const double l = std::log(eps);
    switch (s) {
    case Schedule::eps:
        return l;
    case Schedule::sqrt_eps:
        return 0.5 * l;
    case Schedule::eps_squared:
        return 2.0 * l;
    case Schedule::exp_inv_eps:
        return -1.0 / eps;
    case Schedule::exp_inv_eps_squared:
        return -1.0 / (eps * eps);
    }
    return l;
}

std::vector<std::size_t> decreasing_order(const std::vector<double>& xs)
{
    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] > xs[b]; });
    return order;
}

}  // namespace

double schedule_value(Schedule s, double eps) { return std::exp(log_schedule(s, eps)); }

ScheduleCheck check_schedule(Schedule s, const std::vector<double>& eps_grid, int eps_power, double threshold)
{
    require(!eps_grid.empty(), ErrorCode::invalid_argument, "empty eps grid");
    ScheduleCheck out;
    for (std::size_t i : decreasing_order(eps_grid)) {
        const double e = eps_grid[i];
        out.values.push_back(std::pow(e, eps_power) * std::abs(log_schedule(s, e)));
    }
    out.decreasing = true;
    for (std::size_t i = 1; i < out.values.size(); ++i) {
        if (!(out.values[i] < out.values[i - 1])) out.decreasing = false;
    }
    out.below_threshold = out.values.back() < threshold;
    return out;
}

nlohmann::json MultProfileResult::to_json() const
{
    auto j = report.to_json();
    j["k_max"] = k_max;
    j["mean_square_stable"] = mean_square_stable;
    j["warnings"] = warnings;
    return j;
}

namespace {

using GrowthFn = std::function<std::vector<double>(double eps)>;

MultProfileResult profile_table(const std::string& tag, const ModeCoefficients& h, Schedule schedule, int eps_power,
                                const std::vector<double>& eps_grid, const std::vector<double>& rho_grid,
                                const GrowthFn& growth_of, unsigned threads)
{
    require(!eps_grid.empty() && !rho_grid.empty(), ErrorCode::invalid_argument, "empty grid");
    auto sched = check_schedule(schedule, eps_grid, eps_power);
    require(sched.pass(), ErrorCode::schedule_rejected,
            "schedule " + schedule_name(schedule) + " does not send eps^" + std::to_string(eps_power) +
                " |ln a_eps| to zero on the grid");
    const EigenSystem& sys = *h.system();
    const auto lead = heat_leading_data(h);
    const double lam = lead.lambda_leader();
    const auto next = lead.lambda_next();
    const double h_norm = h.norm();

    MultProfileResult res;
    res.report.case_tag = tag;
    res.report.eps_grid = eps_grid;
    res.report.rho_grid = rho_grid;
    const std::size_t nr = rho_grid.size();
    struct Cell {
        CutoffRow row;
        double residual = 0.0;
        double k = 0.0;
    };
    auto cells = parallel_map(eps_grid.size() * nr, threads, [&](std::size_t i) {
        const double eps = eps_grid[i / nr], rho = rho_grid[i % nr];
        const double log_a = log_schedule(schedule, eps);
        const double t = -log_a / lam + rho;
        require(t >= 0, ErrorCode::invalid_time, "t_eps + rho must be nonnegative");
        const auto c = growth_of(eps);
        const double c_max = *std::max_element(c.begin(), c.end());
        // renormalized^2 - profile^2 summed term by term
        double ren_sq = 0.0, diff_sq = 0.0;
        for (std::size_t j = 0; j < sys.size(); ++j) {
            if (h[j] == 0.0) continue;
            const double log_m = std::log(std::abs(h[j])) + t * (c[j] - sys.lambda(j)) - log_a;
            ren_sq += std::exp(2.0 * log_m);
            if (lead.v[j] != 0.0) {
                const double log_p = std::log(std::abs(lead.v[j])) - lam * rho;
                diff_sq += std::exp(2.0 * log_p) * std::expm1(2.0 * (log_m - log_p));
            } else {
                diff_sq += std::exp(2.0 * log_m);
            }
        }
        Cell cell;
        auto& row = cell.row;
        row.case_tag = tag;
        row.eps = eps;
        row.rho_or_delta = rho;
        row.renormalized = std::sqrt(ren_sq);
        row.profile = heat_profile(rho, lead);
        row.lower = row.profile;
        cell.residual = std::abs(diff_sq) / (row.renormalized + row.profile);
        const double grow = std::exp(t * c_max);
        double bound = std::expm1(t * c_max) * lead.v_norm;
        if (next) bound += grow * std::exp((lam - *next) * t) * h_norm;
        row.bound = std::exp(-lam * rho) * bound;
        if (next) cell.k = row.bound / (std::exp(log_a * (1.0 - lam / *next)) * h_norm);
        row.pass = cell.residual <= row.bound * (1 + 1e-12) + 1e-14 * row.profile;
        return cell;
    });
    for (const auto& c : cells) {
        res.report.rows.push_back(c.row);
        res.k_max = std::max(res.k_max, c.k);
    }

    const auto order = decreasing_order(eps_grid);
    bool decreasing = true;
    for (std::size_t j = 0; j < nr; ++j) {
        for (std::size_t i = 1; i < order.size(); ++i) {
            if (cells[order[i] * nr + j].residual > cells[order[i - 1] * nr + j].residual) decreasing = false;
        }
    }
    const auto rho_order = decreasing_order(rho_grid);
    bool monotone_rho = true;
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
        for (std::size_t i = 1; i < rho_order.size(); ++i) {
            if (cells[e * nr + rho_order[i]].row.renormalized < cells[e * nr + rho_order[i - 1]].row.renormalized)
                monotone_rho = false;
        }
    }
    res.report.checks.emplace_back("schedule_valid", sched.pass());
    res.report.checks.emplace_back("residual_decreases_with_eps", decreasing);
    res.report.checks.emplace_back("decreasing_in_rho", monotone_rho);
    for (double eps : eps_grid) {
        const auto c = growth_of(eps);
        for (std::size_t j = 0; j < sys.size(); ++j) {
            if (2.0 * (c[j] - sys.lambda(j)) >= 0) {
                res.mean_square_stable = false;
                res.warnings.push_back("mode " + std::to_string(j) + " is not mean-square stable at eps=" +
                                       format_number(eps));
            }
        }
    }
    return res;
}

}  // namespace

MultProfileResult mult_profile(const ModeCoefficients& h, const MultBrownianSpec& spec, Schedule schedule,
                               const std::vector<double>& eps_grid, const std::vector<double>& rho_grid,
                               unsigned threads)
{
    spec.validate(h.size());
    const std::size_t n = h.size();
    return profile_table(
        "mult-brownian", h, schedule, 2, eps_grid, rho_grid,
        [&](double eps) { return brownian_growth(spec.with_eps(eps), n); }, threads);
}

MultProfileResult levy_mult_profile(const ModeCoefficients& h, const MultLevySpec& spec, Schedule schedule,
                                    const std::vector<double>& eps_grid, const std::vector<double>& rho_grid,
                                    unsigned threads)
{
    const std::size_t n = h.size();
    for (double eps : eps_grid) spec.with_eps(eps).validate(n);
    return profile_table(
        "mult-levy", h, schedule, 1, eps_grid, rho_grid,
        [&](double eps) { return levy_growth(spec.with_eps(eps), n); }, threads);
}

MultLevySpec dyadic_mark_family(std::size_t modes, std::size_t mode, double scale, int levels, double eps)
{
    require(mode < modes, ErrorCode::invalid_index, "mode out of range");
    require(scale > 0 && scale < 1 && levels >= 1, ErrorCode::invalid_argument, "need 0 < scale < 1 and levels >= 1");
    MultLevySpec out;
    out.eps = eps;
    for (int n = 0; n < levels; ++n) {
        LevyMark m;
        m.z.assign(modes, 0.0);
        m.z[mode] = std::ldexp(scale, -n);
        m.rate = std::ldexp(1.0, n);
        out.marks.push_back(std::move(m));
    }
    out.eta = std::ldexp(scale, -(levels - 1));
    return out;
}

nlohmann::json EtaStudy::to_json() const
{
    return {{"etas", etas}, {"values", values}, {"monotone", monotone}, {"stabilizing", stabilizing}};
}

EtaStudy levy_eta_study(const ModeCoefficients& h, const MultLevySpec& full, const std::vector<double>& etas,
                        Schedule schedule, double rho)
{
    require(!etas.empty(), ErrorCode::invalid_argument, "empty eta grid");
    EtaStudy out;
    const auto lead = heat_leading_data(h);
    const double log_a = log_schedule(schedule, full.eps);
    const double t = -log_a / lead.lambda_leader() + rho;
    require(t >= 0, ErrorCode::invalid_time, "t_eps + rho must be nonnegative");
    for (std::size_t i : decreasing_order(etas)) {
        const auto spec = full.truncated(etas[i]);
        out.etas.push_back(etas[i]);
        out.values.push_back(std::sqrt(levy_second_moment_exact(t, h, spec)) / std::exp(log_a));
    }
    out.monotone = true;
    out.stabilizing = true;
    for (std::size_t i = 1; i < out.values.size(); ++i) {
        if (out.values[i] < out.values[i - 1]) out.monotone = false;
        if (i >= 2 && out.values[i] - out.values[i - 1] > out.values[i - 1] - out.values[i - 2]) out.stabilizing = false;
    }
    return out;
}

}  // namespace spcut
