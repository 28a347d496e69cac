// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
#include "spcut/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "spcut/error.hpp"

namespace spcut {

bool NoiseSpec::has_gaussian() const
{
    for (double q : gaussian_q) {
        if (q > 0) return true;
    }
    return false;
}

bool NoiseSpec::has_jumps() const { return total_rate() > 0; }

double NoiseSpec::total_rate() const
{
    double r = 0.0;
    for (const auto& m : jumps) r += m.rate;
    return r;
}

std::vector<double> NoiseSpec::mean_jump(std::size_t modes) const
{
    std::vector<double> c(modes, 0.0);
    for (const auto& m : jumps) {
        for (std::size_t k = 0; k < modes && k < m.mark.size(); ++k) c[k] += m.rate * m.mark[k];
    }
    return c;
}

void NoiseSpec::validate(std::size_t modes) const
{
    require(gaussian_q.empty() || gaussian_q.size() == modes, ErrorCode::dimension_mismatch,
            "gaussian_q has " + std::to_string(gaussian_q.size()) + " entries for " + std::to_string(modes) +
                " modes");
    for (std::size_t k = 0; k < gaussian_q.size(); ++k) {
        require(gaussian_q[k] >= 0 && std::isfinite(gaussian_q[k]), ErrorCode::config,
                "/gaussian_q/" + std::to_string(k) + " must be a finite nonnegative number");
    }
    for (std::size_t m = 0; m < jumps.size(); ++m) {
        require(jumps[m].mark.size() == modes, ErrorCode::dimension_mismatch,
                "/jumps/" + std::to_string(m) + "/mark has the wrong length");
        require(jumps[m].rate >= 0 && std::isfinite(jumps[m].rate), ErrorCode::config,
                "/jumps/" + std::to_string(m) + "/rate must be finite and nonnegative");
        for (double x : jumps[m].mark) {
            require(std::isfinite(x), ErrorCode::config, "/jumps/" + std::to_string(m) + "/mark is not finite");
        }
    }
}

NoiseSpec NoiseSpec::scaled(double c) const
{
    NoiseSpec out = *this;
    for (double& q : out.gaussian_q) q *= c * c;
    for (auto& m : out.jumps) {
        for (double& x : m.mark) x *= c;
    }
    return out;
}

nlohmann::json NoiseSpec::to_json() const
{
    nlohmann::json j;
    j["gaussian_q"] = gaussian_q;
    j["jumps"] = nlohmann::json::array();
    for (const auto& m : jumps) j["jumps"].push_back({{"mark", m.mark}, {"rate", m.rate}});
    j["compensated"] = compensated;
    return j;
}

NoiseSpec NoiseSpec::from_json(const nlohmann::json& j)
{
    require(j.is_object(), ErrorCode::config, "/: noise spec must be an object");
    NoiseSpec out;
    if (j.contains("gaussian_q")) {
        const auto& q = j.at("gaussian_q");
        require(q.is_array(), ErrorCode::config, "/gaussian_q must be an array");
        for (std::size_t k = 0; k < q.size(); ++k) {
            require(q[k].is_number(), ErrorCode::config, "/gaussian_q/" + std::to_string(k) + " must be a number");
            out.gaussian_q.push_back(q[k].get<double>());
        }
    }
    if (j.contains("jumps")) {
        const auto& js = j.at("jumps");
        require(js.is_array(), ErrorCode::config, "/jumps must be an array");
        for (std::size_t m = 0; m < js.size(); ++m) {
            const std::string at = "/jumps/" + std::to_string(m);
            require(js[m].is_object() && js[m].contains("mark") && js[m].contains("rate"), ErrorCode::config,
                    at + " needs mark and rate");
            require(js[m]["mark"].is_array(), ErrorCode::config, at + "/mark must be an array");
            require(js[m]["rate"].is_number(), ErrorCode::config, at + "/rate must be a number");
            JumpMark jm;
            for (const auto& x : js[m]["mark"]) {
                require(x.is_number(), ErrorCode::config, at + "/mark must hold numbers");
                jm.mark.push_back(x.get<double>());
            }
            jm.rate = js[m]["rate"].get<double>();
            out.jumps.push_back(std::move(jm));
        }
    }
    if (j.contains("compensated")) {
        require(j["compensated"].is_boolean(), ErrorCode::config, "/compensated must be a boolean");
        out.compensated = j["compensated"].get<bool>();
    }
    return out;
}

namespace {

void check_horizon(double t)
{
    require(t >= 0 && !std::isnan(t), ErrorCode::invalid_time, "time must be nonnegative");
}

//! (1 - exp(-x)) without cancellation.
double one_minus_exp(double x) { return -std::expm1(-x); }

}  // namespace

std::vector<double> heat_gaussian_convolution_law(double t, const NoiseSpec& spec, const EigenSystem& system)
{
    check_horizon(t);
    std::vector<double> var(system.size(), 0.0);
    for (std::size_t k = 0; k < system.size(); ++k) {
        const double q = spec.q(k), lam = system.lambda(k);
        if (q == 0.0) continue;
        var[k] = std::isinf(t) ? q / (2.0 * lam) : q * one_minus_exp(2.0 * lam * t) / (2.0 * lam);
    }
    return var;
}

Mat2 wave_stationary_covariance(double lambda, double gamma, double q)
{
    // A S + S A^T + q e2 e2^T = 0 in the unknowns (s11, s12, s22)
    const double m[3][3] = {{0.0, 2.0, 0.0}, {-lambda, -gamma, 1.0}, {0.0, -2.0 * lambda, -2.0 * gamma}};
    const double rhs[3] = {0.0, 0.0, -q};
    auto det3 = [](const double a[3][3]) {
        return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    };
    const double d = det3(m);
    require(d != 0.0, ErrorCode::invalid_argument, "singular Lyapunov system");
    double sol[3];
    for (int c = 0; c < 3; ++c) {
        double mc[3][3];
        for (int r = 0; r < 3; ++r) {
            for (int k = 0; k < 3; ++k) mc[r][k] = (k == c) ? rhs[r] : m[r][k];
        }
        sol[c] = det3(mc) / d;
    }
    return {sol[0], sol[1], sol[1], sol[2]};
}

std::vector<Mat2> wave_gaussian_convolution_law(double t, const NoiseSpec& spec, const WaveSpectrum& spectrum)
{
    check_horizon(t);
    std::vector<Mat2> cov(spectrum.size());
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const double q = spec.q(k);
        if (q == 0.0) continue;
        Mat2 inf = wave_stationary_covariance(spectrum.lambda(k), spectrum.gamma(), q);
        if (std::isinf(t)) {
            cov[k] = inf;
            continue;
        }
        Mat2 e = wave_mode_propagator(t, spectrum.lambda(k), spectrum.gamma());
        Mat2 tail = e * inf * e.transpose();
        cov[k] = {inf.a - tail.a, inf.b - tail.b, inf.c - tail.c, inf.d - tail.d};
        // symmetrize against rounding
        cov[k].b = cov[k].c = 0.5 * (cov[k].b + cov[k].c);
    }
    return cov;
}

ModeCoefficients sample_heat_gaussian(const std::vector<double>& variances, const EigenSystemPtr& system,
                                      const StreamFactory& rng, std::uint32_t replicate)
{
    require(variances.size() == system->size(), ErrorCode::dimension_mismatch, "variance count");
    std::vector<double> out(variances.size(), 0.0);
    for (std::size_t k = 0; k < variances.size(); ++k) {
        if (variances[k] <= 0.0) continue;
        auto stream = rng(replicate, static_cast<std::uint32_t>(k));
        std::normal_distribution<double> nd(0.0, std::sqrt(variances[k]));
        out[k] = nd(stream);
    }
    return ModeCoefficients(system, std::move(out));
}

WaveState sample_wave_gaussian(const std::vector<Mat2>& covariances, const WaveSpectrumPtr& spectrum,
                               const StreamFactory& rng, std::uint32_t replicate)
{
    const std::size_t n = spectrum->size();
    require(covariances.size() == n, ErrorCode::dimension_mismatch, "covariance count");
    std::vector<double> u(n, 0.0), w(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const Mat2& c = covariances[k];
        if (c.a <= 0.0 && c.d <= 0.0) continue;
        auto stream = rng(replicate, static_cast<std::uint32_t>(k));
        std::normal_distribution<double> nd;
        const double z1 = nd(stream), z2 = nd(stream);
        if (c.a > 0.0) {
            const double l11 = std::sqrt(c.a);
            const double l21 = c.b / l11;
            const double l22 = std::sqrt(std::max(0.0, c.d - l21 * l21));
            u[k] = l11 * z1;
            w[k] = l21 * z1 + l22 * z2;
        } else {
            w[k] = std::sqrt(c.d) * z2;
        }
    }
    return wave_decompose(std::move(u), std::move(w), spectrum);
}

ModeCoefficients sample_gaussian_convolution(double t, const NoiseSpec& spec, const EigenSystemPtr& system,
                                             const StreamFactory& rng, std::uint32_t replicate)
{
    return sample_heat_gaussian(heat_gaussian_convolution_law(t, spec, *system), system, rng, replicate);
}

WaveState sample_gaussian_convolution(double t, const NoiseSpec& spec, const WaveSpectrumPtr& spectrum,
                                      const StreamFactory& rng, std::uint32_t replicate)
{
    return sample_wave_gaussian(wave_gaussian_convolution_law(t, spec, *spectrum), spectrum, rng, replicate);
}

std::vector<Jump> sample_jumps(double t, const std::vector<JumpMark>& marks, PhiloxStream& stream)
{
    check_horizon(t);
    require(std::isfinite(t), ErrorCode::invalid_time, "jump sampling needs a finite horizon");
    double total = 0.0;
    for (const auto& m : marks) total += m.rate;
    std::vector<Jump> out;
    if (total <= 0.0 || t == 0.0) return out;
    std::poisson_distribution<long> count(total * t);
    const long n = count(stream);
    out.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        Jump j;
        j.time = t * stream.uniform();
        double pick = total * stream.uniform();
        j.mark = marks.size() - 1;
        for (std::size_t m = 0; m < marks.size(); ++m) {
            if (pick < marks[m].rate) {
                j.mark = m;
                break;
            }
            pick -= marks[m].rate;
        }
        out.push_back(j);
    }
    std::sort(out.begin(), out.end(), [](const Jump& a, const Jump& b) { return a.time < b.time; });
    return out;
}

double levy_stationary_horizon(double lambda_slowest)
{
    require(lambda_slowest > 0, ErrorCode::invalid_argument, "decay rate must be positive");
    return 40.0 / lambda_slowest;
}

namespace {

void check_levy(const NoiseSpec& spec, std::size_t modes)
{
    require(!(spec.compensated && spec.jumps.empty()), ErrorCode::degenerate_spec,
            "compensated jump noise needs at least one mark");
    spec.validate(modes);
}

}  // namespace

ModeCoefficients sample_levy_convolution(double t, const NoiseSpec& spec, const EigenSystemPtr& system,
                                         const StreamFactory& rng, std::uint32_t replicate)
{
    const std::size_t n = system->size();
    check_levy(spec, n);
    if (std::isinf(t)) t = levy_stationary_horizon(system->lambda(0));
    auto stream = rng(replicate, kJumpStream);
    auto jumps = sample_jumps(t, spec.jumps, stream);
    std::vector<double> out(n, 0.0);
    for (const auto& j : jumps) {
        const auto& mark = spec.jumps[j.mark].mark;
        for (std::size_t k = 0; k < n; ++k) {
            if (mark[k] != 0.0) out[k] += std::exp(-system->lambda(k) * (t - j.time)) * mark[k];
        }
    }
    if (spec.compensated) {
        auto c = spec.mean_jump(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double lam = system->lambda(k);
            out[k] -= c[k] * one_minus_exp(lam * t) / lam;
        }
    }
    return ModeCoefficients(system, std::move(out));
}

WaveState sample_levy_convolution(double t, const NoiseSpec& spec, const WaveSpectrumPtr& spectrum,
                                  const StreamFactory& rng, std::uint32_t replicate)
{
    const std::size_t n = spectrum->size();
    check_levy(spec, n);
    if (std::isinf(t)) t = levy_stationary_horizon(wave_decay_constants(*spectrum, 2).lambda_star);
    auto stream = rng(replicate, kJumpStream);
    auto jumps = sample_jumps(t, spec.jumps, stream);
    const double g = spectrum->gamma();
    std::vector<double> u(n, 0.0), w(n, 0.0);
    for (const auto& j : jumps) {
        const auto& mark = spec.jumps[j.mark].mark;
        for (std::size_t k = 0; k < n; ++k) {
            if (mark[k] == 0.0) continue;
            Mat2 e = wave_mode_propagator(t - j.time, spectrum->lambda(k), g);
            u[k] += e.b * mark[k];
            w[k] += e.d * mark[k];
        }
    }
    if (spec.compensated) {
        auto c = spec.mean_jump(n);
        for (std::size_t k = 0; k < n; ++k) {
            if (c[k] == 0.0) continue;
            // int_0^t exp(sA) e2 ds = A^{-1} (exp(tA) - I) e2
            const double lam = spectrum->lambda(k);
            Mat2 e = wave_mode_propagator(t, lam, g);
            const double x = e.b, y = e.d - 1.0;
            u[k] -= c[k] * (-g / lam * x - y / lam);
            w[k] -= c[k] * x;
        }
    }
    return wave_decompose(std::move(u), std::move(w), spectrum);
}

ModeCoefficients sample_convolution(double t, const NoiseSpec& spec, const EigenSystemPtr& system,
                                    const StreamFactory& rng, std::uint32_t replicate)
{
    std::vector<double> out(system->size(), 0.0);
    if (spec.has_gaussian()) {
        auto g = sample_gaussian_convolution(t, spec, system, rng, replicate);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += g[k];
    }
    if (!spec.jumps.empty()) {
        auto l = sample_levy_convolution(t, spec, system, rng, replicate);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += l[k];
    }
    return ModeCoefficients(system, std::move(out));
}

bool mode_is_independent(const NoiseSpec& spec, std::size_t k)
{
    for (const auto& m : spec.jumps) {
        if (m.rate == 0.0 || k >= m.mark.size() || m.mark[k] == 0.0) continue;
        for (std::size_t j = 0; j < m.mark.size(); ++j) {
            if (j != k && m.mark[j] != 0.0) return false;
        }
    }
    return true;
}

std::function<double(PhiloxStream&)> mode_convolution_sampler(double t, const NoiseSpec& spec,
                                                              const EigenSystem& system, std::size_t k)
{
    check_horizon(t);
    require(k < system.size(), ErrorCode::invalid_index, "mode out of range");
    require(mode_is_independent(spec, k), ErrorCode::unsupported, "mode is coupled to others by a jump mark");
    const double lam = system.lambda(k);
    const double q = spec.q(k);
    const double sd = q > 0 ? std::sqrt(std::isinf(t) ? q / (2 * lam) : q * one_minus_exp(2 * lam * t) / (2 * lam)) : 0.0;
    std::vector<JumpMark> marks;
    double mean = 0.0;
    for (const auto& m : spec.jumps) {
        if (m.rate > 0 && k < m.mark.size() && m.mark[k] != 0.0) {
            marks.push_back({{m.mark[k]}, m.rate});
            mean += m.rate * m.mark[k];
        }
    }
    const double horizon = std::isinf(t) ? levy_stationary_horizon(lam) : t;
    const double comp = spec.compensated ? mean * one_minus_exp(lam * horizon) / lam : 0.0;
    return [sd, marks, horizon, lam, comp](PhiloxStream& s) {
        double x = 0.0;
        if (sd > 0) x = std::normal_distribution<double>(0.0, sd)(s);
        if (!marks.empty()) {
            for (const auto& j : sample_jumps(horizon, marks, s)) {
                x += std::exp(-lam * (horizon - j.time)) * marks[j.mark].mark[0];
            }
            x -= comp;
        }
        return x;
    };
}

LogMomentReport log_moment_check(const NoiseSpec& spec)
{
    LogMomentReport r;
    for (const auto& m : spec.jumps) {
        double sq = 0.0;
        for (double x : m.mark) sq += x * x;
        const double norm = std::sqrt(sq);
        if (norm > 1.0) r.integral += m.rate * std::log(norm);
    }
    r.finite = std::isfinite(r.integral);
    return r;
}

}  // namespace spcut
