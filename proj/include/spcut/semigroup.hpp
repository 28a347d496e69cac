// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
//
// Heat and damped-wave semigroups applied mode by mode, plus their
// leading-order asymptotics.
#pragma once

#include "spcut/spectral.hpp"

namespace spcut {

//! Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

    Mat2 operator*(const Mat2& o) const
    {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2 transpose() const { return {a, c, b, d}; }
    double trace() const { return a + d; }
    double det() const { return a * d - b * c; }
};

//! Spectral norm of a 2x2 matrix.
double spectral_norm(const Mat2& m);

ModeCoefficients heat_apply(double t, const ModeCoefficients& h);

//! exp(log_scale) * S(t) h, evaluated per mode in log space so that huge t does not underflow.
ModeCoefficients heat_apply_scaled(double t, const ModeCoefficients& h, double log_scale);

//! exp(t A) for A = [[0, 1], [-lambda, -gamma]] through the roots of the mode.
Mat2 wave_mode_propagator(double t, double lambda, double gamma);

WaveState wave_apply(double t, const WaveState& z);
//! exp(log_scale) * S_gamma(t) z with the growth factor folded into each modal exponent.
WaveState wave_apply_scaled(double t, const WaveState& z, double log_scale);

//! |exp(lambda_N t) S(t)h - v_h|.
double heat_leader_error(double t, const ModeCoefficients& h);

struct OverdampedLeader {
    double omega_star = 0.0;
    //! Single-mode state carrying the leading modal term.
    WaveState v_of_z;
    double beta = 0.0;
    double C1 = 0.0;
    char case_tag = 'a';
    std::size_t mode = 0;
};

/*!
 * Leading behaviour exp(-omega_star t) v(z) of S_gamma(t) z when an
 * overdamped mode carries the slowest root present in z.
 *
 * Case a: some slow root coefficient a_plus is nonzero; the lowest such
 * mode leads. Case b: every a_plus vanishes; the highest overdamped mode
 * with nonzero a_minus leads, which is only the slowest term when no
 * oscillatory content is present. Anything else is signalled as
 * ErrorCode::subcritical_route.
 */
OverdampedLeader wave_overdamped_leader(const WaveState& z);

//! |exp(omega_star t) S_gamma(t) z - v(z)| evaluated from the modal expansion.
double wave_leader_error(double t, const WaveState& z, const OverdampedLeader& leader);

//! |exp(gamma t/2) S_gamma(t) z|^2 for a purely oscillatory spectrum.
double wave_subcritical_norm_sq(double t, const WaveState& z);

/*!
 * Bounds sqrt(lo_sq) <= |exp(gamma t/2) S_gamma(t) z| <= sqrt(hi_sq) valid for all t,
 * from the per-mode constant part plus/minus the amplitude of its oscillation.
 */
struct SubcriticalEnvelope {
    double lo_sq = 0.0;
    double hi_sq = 0.0;
};

SubcriticalEnvelope wave_subcritical_envelope(const WaveState& z);

struct DecayConstants {
    double C_star = 1.0;
    double lambda_star = 0.0;
};

//! (1, lambda_0) for the self-adjoint heat semigroup.
DecayConstants heat_decay_constants(const EigenSystem& system);

/*!
 * Grid estimate of C_star with lambda_star the slowest decay rate:
 * max over modes and t in [0, 20/lambda_star] of exp(lambda_star t) times
 * the energy-norm operator norm of exp(t A_k).
 */
DecayConstants wave_decay_constants(const WaveSpectrum& spectrum, int grid_points = 2000);

}  // namespace spcut
