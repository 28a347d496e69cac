// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
#include "spcut/semigroup.hpp"

#include <cmath>
#include <limits>

#include "spcut/error.hpp"

namespace spcut {

namespace {

void check_time(double t)
{
    require(t >= 0 && !std::isnan(t), ErrorCode::invalid_time, "time must be nonnegative");
}

//! Largest real part among the roots of mode k.
double slow_rate(const WaveSpectrum& s, std::size_t k)
{
    if (const auto* rp = std::get_if<RealPair>(&s.roots(k))) return rp->plus;
    return std::get<ComplexPair>(s.roots(k)).re;
}

ModalCoef scale_modal(const WaveSpectrum& s, std::size_t k, const ModalCoef& coef, double t,
                      double log_scale)
{
    if (const auto* rp = std::get_if<RealPair>(&s.roots(k))) {
        const auto& a = std::get<OverdampedCoef>(coef);
        return OverdampedCoef{a.a_plus == 0.0 ? 0.0 : a.a_plus * std::exp(rp->plus * t + log_scale),
                              a.a_minus == 0.0 ? 0.0 : a.a_minus * std::exp(rp->minus * t + log_scale)};
    }
    const auto cp = std::get<ComplexPair>(s.roots(k));
    const auto b = std::get<std::complex<double>>(coef);
    if (b == 0.0) return std::complex<double>{};
    return b * std::polar(std::exp(cp.re * t + log_scale), cp.theta * t);
}

}  // namespace

double spectral_norm(const Mat2& m)
{
    // singular values of a 2x2 from the Frobenius norm and |det|
    double f = m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d;
    double dt = std::abs(m.det());
    double disc = std::sqrt(std::max(0.0, f * f - 4.0 * dt * dt));
    return std::sqrt(0.5 * (f + disc));
}

ModeCoefficients heat_apply(double t, const ModeCoefficients& h) { return heat_apply_scaled(t, h, 0.0); }

ModeCoefficients heat_apply_scaled(double t, const ModeCoefficients& h, double log_scale)
{
    check_time(t);
    const EigenSystem& sys = *h.system();
    std::vector<double> out(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (h[k] == 0.0) continue;
        out[k] = std::copysign(std::exp(std::log(std::abs(h[k])) - sys.lambda(k) * t + log_scale), h[k]);
    }
    return ModeCoefficients(h.system(), std::move(out));
}

Mat2 wave_mode_propagator(double t, double lambda, double gamma)
{
    check_time(t);
    const double disc = gamma * gamma - 4.0 * lambda;
    const Mat2 gen{0.0, 1.0, -lambda, -gamma};
    if (disc > 0) {
        const double r2 = -0.5 * (gamma + std::sqrt(disc));
        const double r1 = lambda / r2;
        const double e1 = std::exp(r1 * t), e2 = std::exp(r2 * t);
        const double p = (e1 - e2) / (r1 - r2);
        const double q = (r1 * e2 - r2 * e1) / (r1 - r2);
        return {p * gen.a + q, p * gen.b, p * gen.c, p * gen.d + q};
    }
    require(disc < 0, ErrorCode::resonance, "gamma^2 = 4 lambda has a repeated root");
    const double theta = 0.5 * std::sqrt(-disc);
    const double decay = std::exp(-0.5 * gamma * t);
    const double c = std::cos(theta * t), s = std::sin(theta * t) / theta;
    // exp(-gamma t/2) [cos I + sin/theta (A + gamma/2 I)]
    return {decay * (c + s * 0.5 * gamma), decay * s, decay * s * gen.c,
            decay * (c + s * (gen.d + 0.5 * gamma))};
}

WaveState wave_apply(double t, const WaveState& z) { return wave_apply_scaled(t, z, 0.0); }

WaveState wave_apply_scaled(double t, const WaveState& z, double log_scale)
{
    check_time(t);
    const WaveSpectrum& s = *z.spectrum();
    std::vector<ModalCoef> modal;
    modal.reserve(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
        modal.push_back(scale_modal(s, k, z.modal(k), t, log_scale));
    }
    return WaveState::from_modal(z.spectrum(), std::move(modal));
}

double heat_leader_error(double t, const ModeCoefficients& h)
{
    check_time(t);
    auto lead = heat_leading_data(h);
    const EigenSystem& sys = *h.system();
    const double lam_n = lead.lambda_leader();
    double s = 0.0;
    for (std::size_t k : lead.support) {
        if (sys.same_eigenvalue(k, lead.leader)) continue;
        double term = std::exp(std::log(std::abs(h[k])) + (lam_n - sys.lambda(k)) * t);
        s += term * term;
    }
    return std::sqrt(s);
}

OverdampedLeader wave_overdamped_leader(const WaveState& z)
{
    const WaveSpectrumPtr& sp = z.spectrum();
    const WaveSpectrum& s = *sp;
    const std::size_t js = s.j_star();
    require(js >= 1, ErrorCode::subcritical_route, "no overdamped mode in the spectrum");

    std::optional<std::size_t> first_plus;
    std::optional<std::size_t> last_minus;
    bool oscillatory_content = false;
    for (std::size_t k = 0; k < z.size(); ++k) {
        if (k < js) {
            const auto& a = std::get<OverdampedCoef>(z.modal(k));
            if (a.a_plus != 0.0 && !first_plus) first_plus = k;
            if (a.a_minus != 0.0) last_minus = k;
        } else if (std::get<std::complex<double>>(z.modal(k)) != 0.0) {
            oscillatory_content = true;
        }
    }
    require(first_plus || last_minus, ErrorCode::subcritical_route,
            "z has no overdamped modal content");

    OverdampedLeader out{0.0, z, 0.0, 0.0, 'a', 0};
    std::vector<ModalCoef> lead_modal;
    lead_modal.reserve(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
        if (k < js) lead_modal.emplace_back(OverdampedCoef{});
        else lead_modal.emplace_back(std::complex<double>{});
    }
    // leading root and its coefficient
    double lead_root = 0.0;
    if (first_plus) {
        out.case_tag = 'a';
        out.mode = *first_plus;
        lead_root = std::get<RealPair>(s.roots(out.mode)).plus;
        lead_modal[out.mode] = OverdampedCoef{std::get<OverdampedCoef>(z.modal(out.mode)).a_plus, 0.0};
    } else {
        require(!oscillatory_content, ErrorCode::subcritical_route,
                "oscillatory modes decay slower than every fast overdamped root");
        out.case_tag = 'b';
        out.mode = *last_minus;
        lead_root = std::get<RealPair>(s.roots(out.mode)).minus;
        lead_modal[out.mode] = OverdampedCoef{0.0, std::get<OverdampedCoef>(z.modal(out.mode)).a_minus};
    }
    out.omega_star = -lead_root;
    out.v_of_z = WaveState::from_modal(sp, std::move(lead_modal));

    // slowest remaining term present in z, and the modal constant
    std::optional<double> second;
    auto consider = [&](double re, bool is_leader) {
        if (is_leader) return;
        if (!second || re > *second) second = re;
    };
    double c1 = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double lam = s.lambda(k);
        if (const auto* rp = std::get_if<RealPair>(&s.roots(k))) {
            const auto& a = std::get<OverdampedCoef>(z.modal(k));
            if (a.a_plus != 0.0) {
                consider(rp->plus, out.case_tag == 'a' && k == out.mode);
                c1 += std::abs(a.a_plus) * real_eigenvector_norm(lam, rp->plus);
            }
            if (a.a_minus != 0.0) {
                consider(rp->minus, out.case_tag == 'b' && k == out.mode);
                c1 += std::abs(a.a_minus) * real_eigenvector_norm(lam, rp->minus);
            }
        } else {
            const auto b = std::get<std::complex<double>>(z.modal(k));
            if (b != 0.0) {
                consider(std::get<ComplexPair>(s.roots(k)).re, false);
                c1 += 2.0 * std::abs(b) * complex_eigenvector_norm(lam);
            }
        }
    }
    if (!second) {
        // z is a pure eigenvector; any slower rate certifies the zero error
        double next = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < s.size(); ++k) {
            if (const auto* rp = std::get_if<RealPair>(&s.roots(k))) {
                if (rp->plus < lead_root) next = std::max(next, rp->plus);
                if (rp->minus < lead_root) next = std::max(next, rp->minus);
            } else {
                auto re = std::get<ComplexPair>(s.roots(k)).re;
                if (re < lead_root) next = std::max(next, re);
            }
        }
        second = std::isfinite(next) ? next : 2.0 * lead_root;
    }
    out.beta = out.omega_star + *second;
    out.C1 = c1;
    return out;
}

double wave_leader_error(double t, const WaveState& z, const OverdampedLeader& leader)
{
    auto scaled = wave_apply_scaled(t, z, leader.omega_star * t);
    const WaveSpectrum& s = *z.spectrum();
    double sq = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        ModalCoef diff = scaled.modal(k);
        if (k == leader.mode) {
            // the leading term is constant and equals v(z) exactly
            auto d = std::get<OverdampedCoef>(diff);
            if (leader.case_tag == 'a') d.a_plus = 0.0;
            else d.a_minus = 0.0;
            diff = d;
        }
        auto [u, w] = reconstruct_mode(s, k, diff);
        sq += (1.0 + s.lambda(k)) * u * u + w * w;
    }
    return std::sqrt(sq);
}

double wave_subcritical_norm_sq(double t, const WaveState& z)
{
    check_time(t);
    const WaveSpectrum& s = *z.spectrum();
    require(s.j_star() == 0, ErrorCode::wrong_case, "subcritical formula needs gamma^2 < 4 lambda_0");
    double sum = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        const auto b = std::get<std::complex<double>>(z.modal(k));
        if (b == 0.0) continue;
        const auto cp = std::get<ComplexPair>(s.roots(k));
        const double lam = s.lambda(k);
        const std::complex<double> w = cp.root();
        const std::complex<double> c = b * b * (1.0 + lam + w * w);
        sum += 2.0 * std::norm(b) * (1.0 + 2.0 * lam) +
               2.0 * (std::polar(1.0, 2.0 * cp.theta * t) * c).real();
    }
    return sum;
}

SubcriticalEnvelope wave_subcritical_envelope(const WaveState& z)
{
    const WaveSpectrum& s = *z.spectrum();
    require(s.j_star() == 0, ErrorCode::wrong_case, "subcritical envelope needs gamma^2 < 4 lambda_0");
    SubcriticalEnvelope env;
    for (std::size_t k = 0; k < z.size(); ++k) {
        const auto b = std::get<std::complex<double>>(z.modal(k));
        const double lam = s.lambda(k);
        const std::complex<double> w = std::get<ComplexPair>(s.roots(k)).root();
        const double base = 2.0 * std::norm(b) * (1.0 + 2.0 * lam);
        const double swing = 2.0 * std::abs(b * b * (1.0 + lam + w * w));
        env.lo_sq += base - swing;
        env.hi_sq += base + swing;
    }
    return env;
}

DecayConstants heat_decay_constants(const EigenSystem& system)
{
    require(system.size() > 0, ErrorCode::invalid_argument, "empty eigensystem");
    return {1.0, system.lambda(0)};
}

DecayConstants wave_decay_constants(const WaveSpectrum& spectrum, int grid_points)
{
    require(spectrum.size() > 0 && grid_points >= 2, ErrorCode::invalid_argument,
            "need modes and at least two grid points");
    double rate = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < spectrum.size(); ++k) rate = std::min(rate, -slow_rate(spectrum, k));
    DecayConstants out{1.0, rate};
    const double t_max = 20.0 / rate;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const double lam = spectrum.lambda(k);
        const double sq = std::sqrt(1.0 + lam);
        for (int i = 0; i < grid_points; ++i) {
            double t = t_max * i / (grid_points - 1);
            Mat2 m = wave_mode_propagator(t, lam, spectrum.gamma());
            // energy norm: position weighted by sqrt(1 + lambda)
            Mat2 w{m.a, m.b * sq, m.c / sq, m.d};
            out.C_star = std::max(out.C_star, std::exp(rate * t) * spectral_norm(w));
        }
    }
    return out;
}

}  // namespace spcut
