// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
//
// Closed-form and empirical Wasserstein distances and executable checks of
// their structural properties.
#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"
#include "spcut/noise.hpp"
#include "spcut/rng.hpp"
#include "spcut/semigroup.hpp"

namespace spcut {

//! Independent repetitions behind every empirical standard error.
inline constexpr int kRepetitions = 20;

struct WassersteinReport {
    double lhs = 0.0;
    double rhs = 0.0;
    //! Allowed deviation, or the threshold lhs must not exceed for inequality checks.
    double bound = 0.0;
    double lower = 0.0;
    std::size_t n = 0;
    double se = 0.0;
    bool pass = false;

    nlohmann::json to_json() const;
};

//! W2 between product Gaussians with diagonal covariances.
double w2_diag_gaussian(std::span<const double> mean1, std::span<const double> vars1, std::span<const double> mean2,
                        std::span<const double> vars2);

/*!
 * W2 between two Gaussians on R^2 in the energy norm: the position axis is
 * rescaled by sqrt(weight) with weight = 1 + lambda, then the Bures formula
 * applies. Throws ErrorCode::not_psd for invalid covariances.
 */
double w2_gaussian_2x2(std::array<double, 2> mean1, const Mat2& cov1, std::array<double, 2> mean2, const Mat2& cov2,
                       double weight = 1.0);

//! Sorted-sample estimator ((1/n) sum |x_(i) - y_(i)|^p)^{min(1, 1/p)}; p in (0, 4].
double wp_empirical_1d(std::vector<double> samples1, std::vector<double> samples2, double p);

//! sqrt(sum d_k^2) for independent coordinates; only p = 2 decomposes.
double w2_product(std::span<const double> mode_distances, double p = 2.0);

using ScalarSampler = std::function<double(PhiloxStream&)>;

//! n draws from `sampler` on stream (replicate, stream).
std::vector<double> draw_samples(const ScalarSampler& sampler, std::size_t n, const StreamFactory& rng,
                                 std::uint32_t replicate, std::uint32_t stream);

/*!
 * Empirical W_p(u + U, U) for a scalar law U. For p >= 1 the estimate must
 * match |u| within 4 standard errors and the synchronous coupling cost must
 * equal |u| exactly. For p < 1 it must lie in
 * [max(|u|^p - 2 E|U|^p, 0), |u|^p] up to 4 standard errors.
 */
WassersteinReport shift_linearity_check(double u, const ScalarSampler& law, double p, std::size_t n,
                                        const StreamFactory& rng, unsigned threads = 1);

//! Empirical W_p(cU1, cU2) against |c|^{min(1,p)} W_p(U1, U2) on independent draws.
WassersteinReport homogeneity_check(double c, const ScalarSampler& law1, const ScalarSampler& law2, double p,
                                    std::size_t n, const StreamFactory& rng, unsigned threads = 1);

/*!
 * (C e^{-lambda t}|h|)^{1 ^ p} + (eps C e^{-lambda t})^{1 ^ p} * moment.
 * For p >= 1 `moment` is (E|L_inf|^p)^{1/p}; for p < 1 it is E|L_inf|^p.
 * Pass t = kInfiniteTime for the limit.
 */
double ergodic_bound_rhs(double t, double h_norm, double eps, const DecayConstants& decay, double p,
                         double moment);

//! (E|L_inf|^2)^{1/2} = sqrt(sum_k q_k / (2 lambda_k)) for the heat Gaussian law.
double heat_gaussian_moment2(const NoiseSpec& spec, const EigenSystem& system);

/*!
 * Checks |W2(X^eps_t(h), mu^eps)/eps - W2(S(t)h/eps + L_inf, L_inf)| <= W2(L_t, L_inf)
 * with all three terms in closed form (heat, Gaussian noise, p = 2).
 * lhs is the left side, rhs the right side.
 */
WassersteinReport cutoff_inequality_gap(double t, const ModeCoefficients& h, double eps, const NoiseSpec& noise);

/*!
 * Same inequality for p = 1 and a one-mode system with jump noise, each
 * distance estimated empirically; passes within 3 standard errors.
 */
WassersteinReport cutoff_inequality_gap_levy(double t, const ModeCoefficients& h, double eps, const NoiseSpec& noise,
                                             std::size_t n, const StreamFactory& rng, unsigned threads = 1);

}  // namespace spcut
