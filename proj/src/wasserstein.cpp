// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
#include "spcut/wasserstein.hpp"

#include <algorithm>
#include <cmath>

#include "spcut/error.hpp"
#include "spcut/parallel.hpp"

namespace spcut {

nlohmann::json WassersteinReport::to_json() const
{
    return {{"lhs", lhs}, {"rhs", rhs}, {"bound", bound}, {"lower", lower},
            {"n", n},     {"se", se},   {"pass", pass}};
}

double w2_diag_gaussian(std::span<const double> mean1, std::span<const double> vars1, std::span<const double> mean2,
                        std::span<const double> vars2)
{
    const std::size_t n = mean1.size();
    require(vars1.size() == n && mean2.size() == n && vars2.size() == n, ErrorCode::dimension_mismatch,
            "Gaussian laws have different mode counts");
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        require(vars1[k] >= 0 && vars2[k] >= 0, ErrorCode::not_psd, "negative variance");
        const double dm = mean1[k] - mean2[k];
        const double ds = std::sqrt(vars1[k]) - std::sqrt(vars2[k]);
        s += dm * dm + ds * ds;
    }
    return std::sqrt(s);
}

namespace {

void check_psd(const Mat2& c)
{
    const double scale = std::max({std::abs(c.a), std::abs(c.d), 1e-300});
    require(std::abs(c.b - c.c) <= 1e-12 * scale, ErrorCode::not_psd, "covariance is not symmetric");
    require(c.a >= -1e-14 * scale && c.d >= -1e-14 * scale && c.det() >= -1e-12 * scale * scale, ErrorCode::not_psd,
            "covariance is not positive semidefinite");
}

}  // namespace

double w2_gaussian_2x2(std::array<double, 2> mean1, const Mat2& cov1, std::array<double, 2> mean2, const Mat2& cov2,
                       double weight)
{
    require(weight > 0, ErrorCode::invalid_argument, "weight must be positive");
    check_psd(cov1);
    check_psd(cov2);
    const double r = std::sqrt(weight);
    auto rescale = [r, weight](const Mat2& c) { return Mat2{c.a * weight, c.b * r, c.c * r, c.d}; };
    const Mat2 c1 = rescale(cov1), c2 = rescale(cov2);
    const double du = r * (mean1[0] - mean2[0]), dw = mean1[1] - mean2[1];
    // tr sqrt(C2^{1/2} C1 C2^{1/2}) for 2x2 matrices
    const double cross = std::sqrt(std::max(0.0, (c1 * c2).trace() + 2.0 * std::sqrt(std::max(0.0, c1.det() * c2.det()))));
    const double sq = du * du + dw * dw + c1.trace() + c2.trace() - 2.0 * cross;
    return std::sqrt(std::max(0.0, sq));
}

double wp_empirical_1d(std::vector<double> samples1, std::vector<double> samples2, double p)
{
    require(p > 0 && p <= 4, ErrorCode::invalid_argument, "p must lie in (0, 4]");
    require(samples1.size() == samples2.size(), ErrorCode::dimension_mismatch, "sample counts differ");
    require(!samples1.empty(), ErrorCode::invalid_argument, "empty sample set");
    std::sort(samples1.begin(), samples1.end());
    std::sort(samples2.begin(), samples2.end());
    double s = 0.0;
    for (std::size_t i = 0; i < samples1.size(); ++i) s += std::pow(std::abs(samples1[i] - samples2[i]), p);
    s /= static_cast<double>(samples1.size());
    return p >= 1 ? std::pow(s, 1.0 / p) : s;
}

double w2_product(std::span<const double> mode_distances, double p)
{
    require(p == 2.0, ErrorCode::unsupported, "only W2 decomposes over independent coordinates");
    double s = 0.0;
    for (double d : mode_distances) s += d * d;
    return std::sqrt(s);
}

std::vector<double> draw_samples(const ScalarSampler& sampler, std::size_t n, const StreamFactory& rng,
                                 std::uint32_t replicate, std::uint32_t stream)
{
    auto s = rng(replicate, stream);
    std::vector<double> out(n);
    for (auto& x : out) x = sampler(s);
    return out;
}

namespace {

struct RepStats {
    double mean = 0.0;
    double se = 0.0;
};

RepStats rep_stats(const std::vector<double>& xs)
{
    const double n = static_cast<double>(xs.size());
    double m = 0.0;
    for (double x : xs) m += x;
    m /= n;
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    return {m, std::sqrt(v / (n - 1.0) / n)};
}

}  // namespace

WassersteinReport shift_linearity_check(double u, const ScalarSampler& law, double p, std::size_t n,
                                        const StreamFactory& rng, unsigned threads)
{
    require(n >= 1000, ErrorCode::invalid_argument, "shift check needs n >= 1000");
    require(p > 0 && p <= 4, ErrorCode::invalid_argument, "p must lie in (0, 4]");
    const double q = std::min(1.0, p);
    struct Rep {
        double est = 0.0;
        double abs_moment = 0.0;
        double coupling = 0.0;
    };
    auto reps = parallel_map(kRepetitions, threads, [&](std::size_t r) {
        auto x = draw_samples(law, n, rng, static_cast<std::uint32_t>(r), 0);
        auto y = draw_samples(law, n, rng, static_cast<std::uint32_t>(r), 1);
        Rep out;
        double m = 0.0, sync = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            m += std::pow(std::abs(y[i]), q);
            // synchronous coupling (x_i + u, x_i) moves every point by u
            sync += std::pow(std::abs((x[i] + u) - x[i]), p);
        }
        out.abs_moment = m / static_cast<double>(n);
        sync /= static_cast<double>(n);
        out.coupling = p >= 1 ? std::pow(sync, 1.0 / p) : sync;
        for (auto& xi : x) xi += u;
        out.est = wp_empirical_1d(std::move(x), std::move(y), p);
        return out;
    });
    std::vector<double> est, mom;
    double coupling_dev = 0.0;
    const double target = std::pow(std::abs(u), q);
    for (const auto& r : reps) {
        est.push_back(r.est);
        mom.push_back(r.abs_moment);
        coupling_dev = std::max(coupling_dev, std::abs(r.coupling - target));
    }
    auto st = rep_stats(est);
    WassersteinReport rep;
    rep.lhs = st.mean;
    rep.rhs = target;
    rep.n = n;
    rep.se = st.se;
    if (p >= 1) {
        rep.bound = 4.0 * st.se;
        rep.lower = target;
        rep.pass = std::abs(st.mean - target) <= rep.bound && coupling_dev <= 4 * 1e-16 * std::max(1.0, target);
    } else {
        const double moment = rep_stats(mom).mean;
        rep.lower = std::max(target - 2.0 * moment, 0.0);
        rep.bound = target;
        rep.pass = st.mean >= rep.lower - 4.0 * st.se && st.mean <= target + 4.0 * st.se;
    }
    return rep;
}

WassersteinReport homogeneity_check(double c, const ScalarSampler& law1, const ScalarSampler& law2, double p,
                                    std::size_t n, const StreamFactory& rng, unsigned threads)
{
    require(p > 0 && p <= 4, ErrorCode::invalid_argument, "p must lie in (0, 4]");
    const double factor = std::pow(std::abs(c), std::min(1.0, p));
    auto reps = parallel_map(2 * kRepetitions, threads, [&](std::size_t r) {
        auto x = draw_samples(law1, n, rng, static_cast<std::uint32_t>(r), 0);
        auto y = draw_samples(law2, n, rng, static_cast<std::uint32_t>(r), 1);
        if (r < static_cast<std::size_t>(kRepetitions)) {
            for (auto& v : x) v *= c;
            for (auto& v : y) v *= c;
            return wp_empirical_1d(std::move(x), std::move(y), p);
        }
        return factor * wp_empirical_1d(std::move(x), std::move(y), p);
    });
    auto lhs = rep_stats({reps.begin(), reps.begin() + kRepetitions});
    auto rhs = rep_stats({reps.begin() + kRepetitions, reps.end()});
    WassersteinReport rep;
    rep.lhs = lhs.mean;
    rep.rhs = rhs.mean;
    rep.n = n;
    rep.se = std::hypot(lhs.se, rhs.se);
    rep.bound = 4.0 * rep.se;
    rep.pass = std::abs(lhs.mean - rhs.mean) <= rep.bound;
    return rep;
}

double ergodic_bound_rhs(double t, double h_norm, double eps, const DecayConstants& decay, double p, double moment)
{
    require(t >= 0 && h_norm >= 0 && eps >= 0 && moment >= 0 && p > 0, ErrorCode::invalid_argument,
            "ergodic bound parameters must be nonnegative");
    if (std::isinf(t)) return 0.0;
    const double q = std::min(1.0, p);
    const double contraction = decay.C_star * std::exp(-decay.lambda_star * t);
    return std::pow(contraction * h_norm, q) + std::pow(eps * contraction, q) * moment;
}

double heat_gaussian_moment2(const NoiseSpec& spec, const EigenSystem& system)
{
    double s = 0.0;
    for (double v : heat_gaussian_convolution_law(kInfiniteTime, spec, system)) s += v;
    return std::sqrt(s);
}

WassersteinReport cutoff_inequality_gap(double t, const ModeCoefficients& h, double eps, const NoiseSpec& noise)
{
    require(eps > 0, ErrorCode::invalid_argument, "eps must be positive");
    const EigenSystem& sys = *h.system();
    const auto var_inf = heat_gaussian_convolution_law(kInfiniteTime, noise, sys);
    const auto var_t = heat_gaussian_convolution_law(t, noise, sys);
    const std::vector<double> zeros(sys.size(), 0.0);
    const double log_eps = std::log(eps);
    std::vector<double> drift;
    if (std::isinf(t)) {
        drift = zeros;
    } else {
        auto d = heat_apply_scaled(t, h, -log_eps);
        drift.assign(d.values().begin(), d.values().end());
    }
    // W2(S(t)h + eps L_t, eps L_inf) / eps in units of the unit-noise law
    const double renormalized = w2_diag_gaussian(drift, var_t, zeros, var_inf);
    double shift = 0.0;
    for (double x : drift) shift += x * x;
    shift = std::sqrt(shift);
    WassersteinReport rep;
    rep.lhs = std::abs(renormalized - shift);
    rep.rhs = w2_diag_gaussian(zeros, var_t, zeros, var_inf);
    rep.bound = rep.rhs * (1 + 1e-12) + 1e-300;
    rep.pass = rep.lhs <= rep.bound;
    return rep;
}

WassersteinReport cutoff_inequality_gap_levy(double t, const ModeCoefficients& h, double eps, const NoiseSpec& noise,
                                             std::size_t n, const StreamFactory& rng, unsigned threads)
{
    const EigenSystemPtr& sys = h.system();
    require(sys->size() == 1, ErrorCode::unsupported, "empirical gap check needs a one-mode law");
    require(eps > 0 && std::isfinite(t), ErrorCode::invalid_argument, "eps > 0 and finite t required");
    require(static_cast<std::size_t>(kRepetitions) * n < (1u << 28), ErrorCode::invalid_argument, "n too large");
    const double shift = heat_apply_scaled(t, h, -std::log(eps))[0];
    auto draw = [&](double horizon, std::uint32_t set, std::size_t rep) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto r = static_cast<std::uint32_t>((set << 28) | (rep * n + i));
            out[i] = sample_levy_convolution(horizon, noise, sys, rng, r)[0];
        }
        return out;
    };
    struct Rep {
        double lhs = 0.0;
        double rhs = 0.0;
    };
    auto reps = parallel_map(kRepetitions, threads, [&](std::size_t r) {
        auto lt = draw(t, 0, r);
        auto linf = draw(kInfiniteTime, 1, r);
        auto lt2 = draw(t, 2, r);
        auto linf2 = draw(kInfiniteTime, 3, r);
        for (auto& x : lt) x += shift;
        Rep out;
        out.lhs = std::abs(wp_empirical_1d(std::move(lt), std::move(linf), 1.0) - std::abs(shift));
        out.rhs = wp_empirical_1d(std::move(lt2), std::move(linf2), 1.0);
        return out;
    });
    std::vector<double> l, r;
    for (const auto& x : reps) {
        l.push_back(x.lhs);
        r.push_back(x.rhs);
    }
    auto ls = rep_stats(l), rs = rep_stats(r);
    WassersteinReport rep;
    rep.lhs = ls.mean;
    rep.rhs = rs.mean;
    rep.n = n;
    rep.se = std::hypot(ls.se, rs.se);
    rep.bound = rs.mean + 3.0 * rep.se;
    rep.pass = ls.mean <= rep.bound;
    return rep;
}

}  // namespace spcut
