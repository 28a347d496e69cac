// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exact laws and samplers for the stochastic convolution driven by diagonal
// Q-Wiener noise and finite-activity compound-Poisson noise. Wave forcing
// acts on the velocity component only.
#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "json.hpp"
#include "spcut/rng.hpp"
#include "spcut/semigroup.hpp"

namespace spcut {

inline constexpr double kInfiniteTime = std::numeric_limits<double>::infinity();

//! Stream id reserved for the jump process; Gaussian draws for mode k use stream k.
inline constexpr std::uint32_t kJumpStream = 0x80000000u;

struct JumpMark {
    std::vector<double> mark;
    double rate = 0.0;
};

struct NoiseSpec {
    std::vector<double> gaussian_q;
    std::vector<JumpMark> jumps;
    bool compensated = true;

    bool has_gaussian() const;
    bool has_jumps() const;
    double total_rate() const;
    //! sum_m rate_m mark_m, the mean jump intensity per mode.
    std::vector<double> mean_jump(std::size_t modes) const;
    //! q_k, zero when the Gaussian part is absent.
    double q(std::size_t k) const { return k < gaussian_q.size() ? gaussian_q[k] : 0.0; }

    //! Throws config/dimension errors for negative intensities, bad rates or wrong sizes.
    void validate(std::size_t modes) const;
    //! Copy with every intensity scaled so that the driving process becomes c L.
    NoiseSpec scaled(double c) const;

    nlohmann::json to_json() const;
    static NoiseSpec from_json(const nlohmann::json& j);
};

//! Per-mode variances q_k (1 - exp(-2 lambda_k t)) / (2 lambda_k); t may be kInfiniteTime.
std::vector<double> heat_gaussian_convolution_law(double t, const NoiseSpec& spec, const EigenSystem& system);

//! Stationary covariance of a velocity-forced mode, from the 3x3 Lyapunov system.
Mat2 wave_stationary_covariance(double lambda, double gamma, double q);

//! Per-mode position/velocity covariances of the wave convolution at time t.
std::vector<Mat2> wave_gaussian_convolution_law(double t, const NoiseSpec& spec, const WaveSpectrum& spectrum);

ModeCoefficients sample_heat_gaussian(const std::vector<double>& variances, const EigenSystemPtr& system,
                                      const StreamFactory& rng, std::uint32_t replicate);
WaveState sample_wave_gaussian(const std::vector<Mat2>& covariances, const WaveSpectrumPtr& spectrum,
                               const StreamFactory& rng, std::uint32_t replicate);

ModeCoefficients sample_gaussian_convolution(double t, const NoiseSpec& spec, const EigenSystemPtr& system,
                                             const StreamFactory& rng, std::uint32_t replicate);
WaveState sample_gaussian_convolution(double t, const NoiseSpec& spec, const WaveSpectrumPtr& spectrum,
                                      const StreamFactory& rng, std::uint32_t replicate);

//! One jump of the compound-Poisson driver.
struct Jump {
    double time = 0.0;
    std::size_t mark = 0;
};

/*!
 * Jumps on [0, t] in increasing time order: Poisson(R t) count, uniform
 * times, mark m chosen with probability rate_m / R.
 */
std::vector<Jump> sample_jumps(double t, const std::vector<JumpMark>& marks, PhiloxStream& stream);

/*!
 * Horizon used for samples of the invariant law: the convolution is
 * sampled at 40 / lambda_0, where the remaining transient is e^{-40}
 * relative to the mark size.
 */
double levy_stationary_horizon(double lambda_slowest);

ModeCoefficients sample_levy_convolution(double t, const NoiseSpec& spec, const EigenSystemPtr& system,
                                         const StreamFactory& rng, std::uint32_t replicate);
WaveState sample_levy_convolution(double t, const NoiseSpec& spec, const WaveSpectrumPtr& spectrum,
                                  const StreamFactory& rng, std::uint32_t replicate);

//! Gaussian plus jump parts with independent streams.
ModeCoefficients sample_convolution(double t, const NoiseSpec& spec, const EigenSystemPtr& system,
                                    const StreamFactory& rng, std::uint32_t replicate);

/*!
 * Sampler for mode k of the convolution at time t, valid when that mode is
 * independent of the others (its marks hit no other mode). Infinite t uses
 * levy_stationary_horizon for the jump part.
 */
std::function<double(PhiloxStream&)> mode_convolution_sampler(double t, const NoiseSpec& spec,
                                                              const EigenSystem& system, std::size_t k);

//! True when no jump mark couples mode k to another mode.
bool mode_is_independent(const NoiseSpec& spec, std::size_t k);

struct LogMomentReport {
    bool finite = true;
    //! sum over marks with |x| > 1 of rate * log|x|.
    double integral = 0.0;
};

LogMomentReport log_moment_check(const NoiseSpec& spec);

}  // namespace spcut
