// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
#include "spcut/spectral.hpp"

#include <cmath>

#include "spcut/error.hpp"

namespace spcut {

HeatLeadingData heat_leading_data(const ModeCoefficients& h)
{
    require(!h.is_zero(), ErrorCode::zero_datum, "cutoff is undefined for h = 0");
    const EigenSystem& sys = *h.system();

    HeatLeadingData out{{}, 0, {}, std::nullopt, ModeCoefficients::zeros(h.system()), 0.0, 0.0};
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (h[k] != 0.0) out.support.push_back(k);
    }
    out.leader = out.support.front();
    double v_sq = 0.0;
    for (std::size_t k : out.support) {
        if (sys.same_eigenvalue(k, out.leader)) {
            out.leading_modes.push_back(k);
            out.v[k] = h[k];
            v_sq += h[k] * h[k];
        } else if (!out.next) {
            out.next = k;
        }
    }
    out.v_norm = std::sqrt(v_sq);
    out.h_norm = h.norm();
    return out;
}

WaveSpectrum::WaveSpectrum(double gamma, EigenSystemPtr system)
    : gamma_(gamma), system_(std::move(system))
{
    require(gamma_ > 0 && std::isfinite(gamma_), ErrorCode::invalid_argument,
            "damping gamma must be positive");
    require(system_ != nullptr, ErrorCode::invalid_argument, "null eigensystem");
    require(system_->is_simple(), ErrorCode::tied_spectrum,
            "the wave path requires a simple spectrum");
    const double g2 = gamma_ * gamma_;
    roots_.reserve(system_->size());
    for (std::size_t k = 0; k < system_->size(); ++k) {
        const double lam = system_->lambda(k);
        const double disc = g2 - 4.0 * lam;
        require(std::abs(disc) > 1e-12 * 4.0 * lam, ErrorCode::resonance,
                "gamma^2 = 4 lambda_k for mode " + std::to_string(k));
        if (disc > 0) {
            // minus root has no cancellation; plus root from the product lambda
            double minus = -0.5 * (gamma_ + std::sqrt(disc));
            roots_.emplace_back(RealPair{lam / minus, minus});
            ++j_star_;
        } else {
            roots_.emplace_back(ComplexPair{-0.5 * gamma_, 0.5 * std::sqrt(-disc)});
        }
    }
}

double WaveSpectrum::max_characteristic_residual() const
{
    double worst = 0.0;
    for (std::size_t k = 0; k < size(); ++k) {
        const double lam = lambda(k);
        auto check = [&](std::complex<double> w) {
            worst = std::max(worst, std::abs(w * w + gamma_ * w + lam) / lam);
        };
        if (const auto* rp = std::get_if<RealPair>(&roots_[k])) {
            check(rp->plus);
            check(rp->minus);
        } else {
            auto cp = std::get<ComplexPair>(roots_[k]);
            check(cp.root());
            check(std::conj(cp.root()));
        }
    }
    return worst;
}

WaveSpectrumPtr wave_spectrum(double gamma, EigenSystemPtr system)
{
    return std::make_shared<const WaveSpectrum>(gamma, std::move(system));
}

std::pair<double, double> reconstruct_mode(const WaveSpectrum& spectrum, std::size_t k,
                                           const ModalCoef& coef)
{
    if (const auto* rp = std::get_if<RealPair>(&spectrum.roots(k))) {
        const auto& a = std::get<OverdampedCoef>(coef);
        return {a.a_plus + a.a_minus, rp->plus * a.a_plus + rp->minus * a.a_minus};
    }
    const auto w = std::get<ComplexPair>(spectrum.roots(k)).root();
    const auto b = std::get<std::complex<double>>(coef);
    return {2.0 * b.real(), 2.0 * (b * w).real()};
}

WaveState::WaveState(WaveSpectrumPtr spectrum, std::vector<double> position,
                     std::vector<double> velocity, std::vector<ModalCoef> modal)
    : spectrum_(std::move(spectrum)), u_(std::move(position)), w_(std::move(velocity)),
      modal_(std::move(modal))
{
    require(spectrum_ != nullptr, ErrorCode::invalid_argument, "null spectrum");
    const std::size_t n = spectrum_->size();
    require(u_.size() == n && w_.size() == n && modal_.size() == n, ErrorCode::dimension_mismatch,
            "wave state size differs from mode count");
    for (std::size_t k = 0; k < n; ++k) {
        bool od = spectrum_->overdamped(k);
        require(od == std::holds_alternative<OverdampedCoef>(modal_[k]), ErrorCode::invalid_argument,
                "modal coefficient kind does not match the root type");
    }
}

WaveState WaveState::from_modal(WaveSpectrumPtr spectrum, std::vector<ModalCoef> modal)
{
    require(spectrum != nullptr, ErrorCode::invalid_argument, "null spectrum");
    require(modal.size() == spectrum->size(), ErrorCode::dimension_mismatch,
            "modal size differs from mode count");
    std::vector<double> u(modal.size());
    std::vector<double> w(modal.size());
    for (std::size_t k = 0; k < modal.size(); ++k) {
        std::tie(u[k], w[k]) = reconstruct_mode(*spectrum, k, modal[k]);
    }
    return WaveState(std::move(spectrum), std::move(u), std::move(w), std::move(modal));
}

double WaveState::norm_sq() const
{
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k) {
        s += (1.0 + spectrum_->lambda(k)) * u_[k] * u_[k] + w_[k] * w_[k];
    }
    return s;
}

double WaveState::norm() const { return std::sqrt(norm_sq()); }

bool WaveState::in_weighted_space() const
{
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k) {
        if (const auto* b = std::get_if<std::complex<double>>(&modal_[k])) {
            s += std::norm(*b) * spectrum_->lambda(k);
        }
    }
    return std::isfinite(s);
}

WaveState wave_decompose(std::vector<double> u, std::vector<double> w, WaveSpectrumPtr spectrum)
{
    require(spectrum != nullptr, ErrorCode::invalid_argument, "null spectrum");
    const std::size_t n = spectrum->size();
    require(u.size() == n && w.size() == n, ErrorCode::dimension_mismatch,
            "state size differs from mode count");
    std::vector<ModalCoef> modal;
    modal.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (const auto* rp = std::get_if<RealPair>(&spectrum->roots(k))) {
            double denom = rp->plus - rp->minus;
            double a_plus = (w[k] - rp->minus * u[k]) / denom;
            double a_minus = (rp->plus * u[k] - w[k]) / denom;
            modal.emplace_back(OverdampedCoef{a_plus, a_minus});
        } else {
            auto cp = std::get<ComplexPair>(spectrum->roots(k));
            std::complex<double> wk = cp.root();
            std::complex<double> b = (w[k] - std::conj(wk) * u[k]) / (wk - std::conj(wk));
            modal.emplace_back(b);
        }
    }
    return WaveState(std::move(spectrum), std::move(u), std::move(w), std::move(modal));
}

double real_eigenvector_norm(double lambda, double root)
{
    return std::sqrt(1.0 + lambda + root * root);
}

double complex_eigenvector_norm(double lambda) { return std::sqrt(1.0 + 2.0 * lambda); }

}  // namespace spcut
