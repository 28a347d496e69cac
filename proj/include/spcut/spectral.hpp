// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
//
// Leading-mode data for the heat datum and the damped-wave spectrum.
#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "spcut/eigensystem.hpp"

namespace spcut {

/*!
 * Leading-mode decomposition of a nonzero heat datum h.
 *
 * `support` holds every mode with a nonzero coefficient; `leader` is the
 * lowest of them and `leading_modes` are the support modes sharing its
 * eigenvalue. `next` is the lowest support mode with a strictly larger
 * eigenvalue, absent when the datum lives in a single eigenspace.
 */
struct HeatLeadingData {
    std::vector<std::size_t> support;
    std::size_t leader = 0;
    std::vector<std::size_t> leading_modes;
    std::optional<std::size_t> next;
    ModeCoefficients v;
    double v_norm = 0.0;
    double h_norm = 0.0;

    double lambda_leader() const { return v.system()->lambda(leader); }
    std::optional<double> lambda_next() const
    {
        if (!next) return std::nullopt;
        return v.system()->lambda(*next);
    }
};

HeatLeadingData heat_leading_data(const ModeCoefficients& h);

//! Roots -gamma/2 +- sqrt(gamma^2 - 4 lambda)/2 of an overdamped mode (plus > minus).
struct RealPair {
    double plus = 0.0;
    double minus = 0.0;
};

//! Roots -gamma/2 +- i theta of an oscillatory mode.
struct ComplexPair {
    double re = 0.0;
    double theta = 0.0;

    std::complex<double> root() const { return {re, theta}; }
};

using ModeRoots = std::variant<RealPair, ComplexPair>;

/*!
 * Spectrum of the damped wave generator [[0, 1], [-lambda_k, -gamma]] mode by
 * mode. Overdamped modes come first because the eigenvalues are sorted;
 * `j_star` counts them (0-based modes 0..j_star-1 are overdamped).
 */
class WaveSpectrum {
  public:
    WaveSpectrum(double gamma, EigenSystemPtr system);

    double gamma() const noexcept { return gamma_; }
    const EigenSystemPtr& system() const noexcept { return system_; }
    std::size_t size() const noexcept { return roots_.size(); }
    std::size_t j_star() const noexcept { return j_star_; }
    const ModeRoots& roots(std::size_t k) const { return roots_.at(k); }
    bool overdamped(std::size_t k) const { return std::holds_alternative<RealPair>(roots_.at(k)); }
    double lambda(std::size_t k) const { return system_->lambda(k); }

    //! Largest |root^2 + gamma root + lambda| / lambda over all roots.
    double max_characteristic_residual() const;

  private:
    double gamma_;
    EigenSystemPtr system_;
    std::vector<ModeRoots> roots_;
    std::size_t j_star_ = 0;
};

using WaveSpectrumPtr = std::shared_ptr<const WaveSpectrum>;

WaveSpectrumPtr wave_spectrum(double gamma, EigenSystemPtr system);

//! Coefficients of z against the real eigenvectors (e_j, w e_j) of an overdamped mode.
struct OverdampedCoef {
    double a_plus = 0.0;
    double a_minus = 0.0;
};

//! b_j of an oscillatory mode; the conjugate mode carries conj(b_j).
using ModalCoef = std::variant<OverdampedCoef, std::complex<double>>;

/*!
 * Truncated element of D((-Delta)^{1/2}) x H with its modal decomposition.
 *
 * The energy norm is |z|^2 = sum_k (1 + lambda_k) u_k^2 + w_k^2.
 */
class WaveState {
  public:
    WaveState(WaveSpectrumPtr spectrum, std::vector<double> position, std::vector<double> velocity,
              std::vector<ModalCoef> modal);

    static WaveState from_modal(WaveSpectrumPtr spectrum, std::vector<ModalCoef> modal);

    const WaveSpectrumPtr& spectrum() const noexcept { return spectrum_; }
    std::size_t size() const noexcept { return modal_.size(); }
    const std::vector<double>& position() const noexcept { return u_; }
    const std::vector<double>& velocity() const noexcept { return w_; }
    const ModalCoef& modal(std::size_t k) const { return modal_.at(k); }
    const std::vector<ModalCoef>& modal() const noexcept { return modal_; }

    double norm() const;
    double norm_sq() const;
    //! sum_j |b_j|^2 lambda_j is finite; always true in truncation.
    bool in_weighted_space() const;

  private:
    WaveSpectrumPtr spectrum_;
    std::vector<double> u_;
    std::vector<double> w_;
    std::vector<ModalCoef> modal_;
};

WaveState wave_decompose(std::vector<double> u, std::vector<double> w, WaveSpectrumPtr spectrum);

//! Position/velocity of one mode from its modal coefficient.
std::pair<double, double> reconstruct_mode(const WaveSpectrum& spectrum, std::size_t k,
                                           const ModalCoef& coef);

//! Energy norm of the eigenvector (e_k, r e_k) for a real root r.
double real_eigenvector_norm(double lambda, double root);
//! Energy norm of the complex eigenvector (e_k, w e_k), |w|^2 = lambda.
double complex_eigenvector_norm(double lambda);

}  // namespace spcut
