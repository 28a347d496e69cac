// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <numbers>
#include <random>

#include "spcut/error.hpp"
#include "spcut/wasserstein.hpp"
#include "test_util.hpp"

using namespace spcut;
using spcut::testing::lambda_table;
using spcut::testing::pi_interval;

namespace {

ScalarSampler gaussian(double mean, double sd)
{
    return [mean, sd](PhiloxStream& s) { return std::normal_distribution<double>(mean, sd)(s); };
}

Eigen::Matrix2d to_eigen(const Mat2& m)
{
    Eigen::Matrix2d e;
    e << m.a, m.b, m.c, m.d;
    return e;
}

Mat2 random_psd(std::mt19937_64& gen)
{
    std::normal_distribution<double> n01;
    Eigen::Matrix2d g;
    g << n01(gen), n01(gen), n01(gen), n01(gen);
    Eigen::Matrix2d c = g * g.transpose() + 0.05 * Eigen::Matrix2d::Identity();
    return {c(0, 0), c(0, 1), c(1, 0), c(1, 1)};
}

// Bures distance through Eigen's matrix square root.
double bures_oracle(const Eigen::Vector2d& m1, const Eigen::Matrix2d& c1, const Eigen::Vector2d& m2,
                    const Eigen::Matrix2d& c2)
{
    Eigen::Matrix2d r2 = c2.sqrt();
    Eigen::Matrix2d mid = (r2 * c1 * r2).sqrt();
    return std::sqrt((m1 - m2).squaredNorm() + (c1 + c2 - 2 * mid).trace());
}

}  // namespace

TEST_CASE("diagonal Gaussian distance")
{
    std::vector<double> m{0.5, -1.0}, v{1.0, 2.0};
    CHECK(w2_diag_gaussian(m, v, m, v) == 0.0);
    std::vector<double> z{0.0}, one{1.0}, four{4.0};
    CHECK(w2_diag_gaussian(z, one, z, four) == 1.0);
    std::vector<double> u{3.0, 4.0}, zz{0.0, 0.0};
    CHECK(w2_diag_gaussian(u, v, zz, v) == doctest::Approx(5.0));
    CHECK_THROWS_AS(w2_diag_gaussian(m, v, z, one), Error);

    // N(0,1) vs N(0,4) from sorted samples
    StreamFactory rng(1);
    auto a = draw_samples(gaussian(0, 1), 1000000, rng, 0, 0);
    auto b = draw_samples(gaussian(0, 2), 1000000, rng, 0, 1);
    CHECK(wp_empirical_1d(a, b, 2.0) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("2x2 Bures distance")
{
    Mat2 c{1.0, 0.3, 0.3, 2.0};
    CHECK(w2_gaussian_2x2({1, 2}, c, {1, 2}, c, 3.0) < 1e-7);

    // diagonal covariances reduce to the diagonal formula in rescaled coordinates
    Mat2 d1{0.5, 0, 0, 2.0}, d2{3.0, 0, 0, 0.25};
    const double wgt = 5.0;
    std::vector<double> m1{std::sqrt(wgt) * 0.2, -1.0}, m2{std::sqrt(wgt) * -0.1, 0.4};
    std::vector<double> v1{wgt * 0.5, 2.0}, v2{wgt * 3.0, 0.25};
    CHECK(w2_gaussian_2x2({0.2, -1.0}, d1, {-0.1, 0.4}, d2, wgt) ==
          doctest::Approx(w2_diag_gaussian(m1, v1, m2, v2)).epsilon(1e-13));

    std::mt19937_64 gen(4);
    std::normal_distribution<double> n01;
    for (int rep = 0; rep < 200; ++rep) {
        Mat2 a = random_psd(gen), b = random_psd(gen);
        std::array<double, 2> ma{n01(gen), n01(gen)}, mb{n01(gen), n01(gen)};
        double got = w2_gaussian_2x2(ma, a, mb, b);
        double ref = bures_oracle({ma[0], ma[1]}, to_eigen(a), {mb[0], mb[1]}, to_eigen(b));
        CHECK(got == doctest::Approx(ref).epsilon(1e-10));
    }
    CHECK_THROWS_AS(w2_gaussian_2x2({0, 0}, Mat2{1, 2, 2, 1}, {0, 0}, c), Error);
    CHECK_THROWS_AS(w2_gaussian_2x2({0, 0}, Mat2{-1, 0, 0, 1}, {0, 0}, c), Error);
}

TEST_CASE("2x2 Bures distance inside the sliced and coupling sandwich")
{
    std::mt19937_64 gen(8);
    Mat2 a = random_psd(gen), b = random_psd(gen);
    const double exact = w2_gaussian_2x2({0.3, 0.0}, a, {-0.2, 0.5}, b);
    Eigen::Matrix2d ca = to_eigen(a), cb = to_eigen(b);
    Eigen::Matrix2d la = ca.llt().matrixL();
    Eigen::Matrix2d ra = ca.sqrt(), ra_inv = ra.inverse();
    // optimal linear map between centred Gaussians, used as an explicit coupling
    Eigen::Matrix2d tmap = ra_inv * (ra * cb * ra).sqrt() * ra_inv;
    Eigen::Vector2d ma(0.3, 0.0), mb(-0.2, 0.5);
    const int n = 1000000;
    std::normal_distribution<double> n01;
    double coupling = 0.0;
    std::vector<Eigen::Vector2d> xs(n), ys(n);
    Eigen::Matrix2d lb = cb.llt().matrixL();
    for (int i = 0; i < n; ++i) {
        Eigen::Vector2d z(n01(gen), n01(gen));
        Eigen::Vector2d x = la * z;
        coupling += (ma + x - (mb + tmap * x)).squaredNorm();
        xs[i] = ma + x;
        ys[i] = mb + lb * Eigen::Vector2d(n01(gen), n01(gen));
    }
    const double upper = std::sqrt(coupling / n);
    double lower = 0.0;
    for (int k = 0; k < 64; ++k) {
        double ang = std::numbers::pi * k / 64;
        Eigen::Vector2d dir(std::cos(ang), std::sin(ang));
        std::vector<double> px(n), py(n);
        for (int i = 0; i < n; ++i) {
            px[i] = dir.dot(xs[i]);
            py[i] = dir.dot(ys[i]);
        }
        lower = std::max(lower, wp_empirical_1d(std::move(px), std::move(py), 2.0));
    }
    CHECK(lower <= exact * 1.01);
    CHECK(upper >= exact * 0.99);
    CHECK(upper == doctest::Approx(exact).epsilon(0.01));
}

TEST_CASE("empirical 1D estimator")
{
    std::vector<double> a{0.3, -1.0, 2.0, 0.7};
    CHECK(wp_empirical_1d(a, a, 2.0) == 0.0);
    auto b = a;
    for (auto& x : b) x += 1.25;
    CHECK(wp_empirical_1d(a, b, 1.0) == doctest::Approx(1.25));
    CHECK(wp_empirical_1d(a, b, 0.5) == doctest::Approx(std::sqrt(1.25)));
    CHECK_THROWS_AS(wp_empirical_1d(a, {1.0}, 1.0), Error);
    CHECK_THROWS_AS(wp_empirical_1d(a, b, 0.0), Error);
    CHECK_THROWS_AS(wp_empirical_1d(a, b, 5.0), Error);

    StreamFactory rng(2);
    for (std::uint32_t r = 0; r < 3; ++r) {
        auto x = draw_samples(gaussian(0, 1), 1000000, rng, r, 0);
        auto y = draw_samples(gaussian(0, 1), 1000000, rng, r, 1);
        CHECK(wp_empirical_1d(std::move(x), std::move(y), 2.0) <= 0.01);
    }
}

TEST_CASE("product decomposition")
{
    std::vector<double> one{0.0, 2.5, 0.0};
    CHECK(w2_product(one) == 2.5);
    std::vector<double> tri{3.0, 4.0};
    CHECK(w2_product(tri) == 5.0);
    CHECK_THROWS_AS(w2_product(tri, 1.0), Error);

    std::vector<double> m1{1, 2, 3}, v1{1, 0.5, 0.1}, m2{0, 2.5, 2}, v2{2, 0.5, 0.4};
    std::vector<double> per;
    for (int k = 0; k < 3; ++k) {
        per.push_back(w2_diag_gaussian(std::span(&m1[k], 1), std::span(&v1[k], 1), std::span(&m2[k], 1),
                                       std::span(&v2[k], 1)));
    }
    CHECK(w2_product(per) == doctest::Approx(w2_diag_gaussian(m1, v1, m2, v2)).epsilon(1e-15));
}

TEST_CASE("shift linearity")
{
    StreamFactory rng(10);
    auto zero = shift_linearity_check(0.0, gaussian(0, 1), 2.0, 1000, rng);
    CHECK(zero.rhs == 0.0);

    std::vector<double> zz{0.0}, one{1.0}, two{2.0};
    CHECK(w2_diag_gaussian(two, one, zz, one) == 2.0);
    auto r2 = shift_linearity_check(2.0, gaussian(0, 1), 2.0, 100000, rng);
    CHECK(r2.pass);
    CHECK(r2.rhs == 2.0);

    auto r1 = shift_linearity_check(-1.5, gaussian(0, 0.7), 1.0, 20000, rng);
    CHECK(r1.pass);

    // U = sigma Z with E|U|^{1/2} = 0.8
    const double unit = std::pow(2.0, 0.25) * std::tgamma(0.75) / std::sqrt(std::numbers::pi);
    const double sigma = std::pow(0.8 / unit, 2);
    auto rh = shift_linearity_check(3.0, gaussian(0, sigma), 0.5, 100000, rng);
    CHECK(rh.pass);
    CHECK(rh.lower == doctest::Approx(std::sqrt(3.0) - 1.6).epsilon(0.01));
    CHECK(rh.bound == doctest::Approx(std::sqrt(3.0)));
    CHECK(rh.lhs >= std::sqrt(3.0) - 1.6);
    CHECK(rh.lhs <= std::sqrt(3.0) + 4 * rh.se);
}

TEST_CASE("translation invariance")
{
    StreamFactory rng(12);
    const double u1 = 1.3, u2 = -0.4;
    std::vector<double> l, r;
    for (std::uint32_t rep = 0; rep < kRepetitions; ++rep) {
        auto a = draw_samples(gaussian(0, 1), 20000, rng, rep, 0);
        auto b = draw_samples(gaussian(0, 2), 20000, rng, rep, 1);
        auto a2 = a, b2 = b;
        for (auto& x : a) x += u1;
        for (auto& x : b) x += u2;
        for (auto& x : a2) x += u1 - u2;
        l.push_back(wp_empirical_1d(a, b, 1.5));
        r.push_back(wp_empirical_1d(a2, b2, 1.5));
    }
    for (std::size_t i = 0; i < l.size(); ++i) CHECK(l[i] == doctest::Approx(r[i]).epsilon(1e-12));
}

TEST_CASE("homogeneity")
{
    StreamFactory rng(14);
    auto id = homogeneity_check(1.0, gaussian(0, 1), gaussian(1, 2), 2.0, 5000, rng);
    CHECK(id.pass);
    auto z = homogeneity_check(0.0, gaussian(0, 1), gaussian(1, 2), 2.0, 5000, rng);
    CHECK(z.lhs == 0.0);
    CHECK(z.rhs == 0.0);
    CHECK(z.pass);
    auto two = homogeneity_check(2.0, gaussian(0, 1), gaussian(1, 2), 2.0, 20000, rng);
    CHECK(two.pass);
    CHECK(two.rhs == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(0.02));
    auto half = homogeneity_check(-3.0, gaussian(0, 1), gaussian(0.5, 1), 0.5, 20000, rng);
    CHECK(half.pass);

    // closed form: scaling both Gaussians by 2 scales W2 by 2
    std::vector<double> m1{0.0}, v1{1.0}, m2{1.0}, v2{4.0}, m1s{0.0}, v1s{4.0}, m2s{2.0}, v2s{16.0};
    CHECK(w2_diag_gaussian(m1s, v1s, m2s, v2s) == doctest::Approx(2 * w2_diag_gaussian(m1, v1, m2, v2)));
}

TEST_CASE("metric axioms on Gaussian laws")
{
    std::mt19937_64 gen(15);
    std::normal_distribution<double> n01;
    for (int rep = 0; rep < 200; ++rep) {
        Mat2 a = random_psd(gen), b = random_psd(gen), c = random_psd(gen);
        std::array<double, 2> ma{n01(gen), n01(gen)}, mb{n01(gen), n01(gen)}, mc{n01(gen), n01(gen)};
        double ab = w2_gaussian_2x2(ma, a, mb, b, 2.0), ba = w2_gaussian_2x2(mb, b, ma, a, 2.0);
        double ac = w2_gaussian_2x2(ma, a, mc, c, 2.0), cb = w2_gaussian_2x2(mc, c, mb, b, 2.0);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(ab <= ac + cb + 1e-12);
        CHECK(ab > 0);
    }
}

TEST_CASE("ergodic bound")
{
    auto sys = pi_interval(6);
    NoiseSpec spec;
    for (int k = 1; k <= 6; ++k) spec.gaussian_q.push_back(1.0 / (k * k));
    DecayConstants dc = heat_decay_constants(*sys);
    const double m2 = heat_gaussian_moment2(spec, *sys);
    CHECK(ergodic_bound_rhs(kInfiniteTime, 1.0, 0.1, dc, 2.0, m2) == 0.0);
    CHECK(ergodic_bound_rhs(1.0, 0.0, 0.0, dc, 2.0, m2) == 0.0);

    std::mt19937_64 gen(16);
    std::uniform_real_distribution<double> ut(0, 3), ue(-8, -0.5);
    std::normal_distribution<double> n01;
    auto inf = heat_gaussian_convolution_law(kInfiniteTime, spec, *sys);
    for (int rep = 0; rep < 200; ++rep) {
        double t = ut(gen), eps = std::pow(10.0, ue(gen));
        std::vector<double> h(6);
        for (auto& x : h) x = n01(gen);
        ModeCoefficients hc(sys, h);
        auto mean = heat_apply(t, hc);
        auto vt = heat_gaussian_convolution_law(t, spec, *sys);
        std::vector<double> vt_e, vi_e, zero(6, 0.0);
        for (int k = 0; k < 6; ++k) {
            vt_e.push_back(eps * eps * vt[k]);
            vi_e.push_back(eps * eps * inf[k]);
        }
        double exact = w2_diag_gaussian(mean.values(), vt_e, zero, vi_e);
        CHECK(exact <= ergodic_bound_rhs(t, hc.norm(), eps, dc, 2.0, m2) * (1 + 1e-12));
    }

    // with the first absolute moment the bound fails at h = 0, t = 0 for p = 2
    const double eps = 0.1;
    std::vector<double> zero(6, 0.0), vi_e;
    for (double v : inf) vi_e.push_back(eps * eps * v);
    const double exact0 = w2_diag_gaussian(zero, zero, zero, vi_e);
    StreamFactory rng(3);
    double abs_moment = 0.0;
    const int n = 200000;
    auto law = heat_gaussian_convolution_law(kInfiniteTime, spec, *sys);
    for (int i = 0; i < n; ++i) abs_moment += sample_heat_gaussian(law, sys, rng, i).norm();
    abs_moment /= n;
    CHECK(ergodic_bound_rhs(0.0, 0.0, eps, dc, 2.0, abs_moment) < exact0);
    CHECK(ergodic_bound_rhs(0.0, 0.0, eps, dc, 2.0, m2) >= exact0 * (1 - 1e-12));
}

TEST_CASE("cutoff inequality, Gaussian closed form")
{
    auto sys = pi_interval(8);
    NoiseSpec spec;
    for (int k = 1; k <= 8; ++k) spec.gaussian_q.push_back(1.0 / k);
    ModeCoefficients h(sys, {0.0, 1.0, 0.5, 0.0, -0.2, 0.0, 0.0, 0.1});
    auto at_inf = cutoff_inequality_gap(kInfiniteTime, h, 0.01, spec);
    CHECK(at_inf.rhs == 0.0);
    CHECK(at_inf.lhs == 0.0);
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> ut(0, 6), ue(-8, -1);
    for (int rep = 0; rep < 100; ++rep) {
        auto r = cutoff_inequality_gap(ut(gen), h, std::pow(10.0, ue(gen)), spec);
        CHECK(r.pass);
    }
}

TEST_CASE("cutoff inequality, Levy empirical")
{
    auto sys = lambda_table({1.5});
    NoiseSpec spec;
    spec.jumps = {{{0.7}, 2.0}, {{-0.3}, 1.0}};
    ModeCoefficients h(sys, {1.0});
    StreamFactory rng(22);
    auto r = cutoff_inequality_gap_levy(0.8, h, 0.05, spec, 2000, rng);
    CHECK(r.pass);
    CHECK(r.se > 0);
}
