// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <random>

#include "spcut/error.hpp"
#include "spcut/noise.hpp"
#include "test_util.hpp"

using namespace spcut;
using spcut::testing::lambda_table;
using spcut::testing::mean_se;
using spcut::testing::pi_interval;

TEST_CASE("philox known-answer vectors")
{
    auto a = philox4x32_10({0, 0, 0, 0}, {0, 0});
    CHECK(a == PhiloxBlock{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    auto b = philox4x32_10({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u});
    CHECK(b == PhiloxBlock{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    auto c = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    CHECK(c == PhiloxBlock{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are addressable and order independent")
{
    StreamFactory f(42);
    auto s1 = f(3, 7);
    std::vector<std::uint32_t> first;
    for (int i = 0; i < 10; ++i) first.push_back(s1());
    auto s2 = f(3, 7);
    for (int i = 0; i < 10; ++i) CHECK(s2() == first[i]);
    auto other = f(4, 7);
    CHECK(other() != first[0]);
    auto s3 = f(3, 7);
    s3.seek(1);
    CHECK(s3() == first[4]);
    for (int i = 0; i < 1000; ++i) {
        double u = s1.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("heat Gaussian law")
{
    auto sys = pi_interval(4);
    NoiseSpec spec;
    spec.gaussian_q = {2, 8, 18, 32};  // q = 2 lambda
    auto zero = heat_gaussian_convolution_law(0.0, spec, *sys);
    for (double v : zero) CHECK(v == 0.0);
    auto inf = heat_gaussian_convolution_law(kInfiniteTime, spec, *sys);
    for (double v : inf) CHECK(v == 1.0);
    auto mid = heat_gaussian_convolution_law(0.3, spec, *sys);
    for (std::size_t k = 0; k < 4; ++k) CHECK(mid[k] == doctest::Approx(1.0 - std::exp(-2 * sys->lambda(k) * 0.3)));
    CHECK_THROWS_AS(heat_gaussian_convolution_law(-1.0, spec, *sys), Error);
}

TEST_CASE("heat Gaussian law against Euler-Maruyama")
{
    const double lam = 2.0, q = 1.0, t = 0.5, dt = 1e-3;
    const int paths = 100000, steps = static_cast<int>(t / dt + 0.5);
    std::mt19937_64 gen(123);
    std::normal_distribution<double> n01;
    std::vector<double> sq(paths);
    for (int p = 0; p < paths; ++p) {
        double x = 0.0;
        for (int i = 0; i < steps; ++i) x += -lam * x * dt + std::sqrt(q * dt) * n01(gen);
        sq[p] = x * x;
    }
    auto ms = mean_se(sq);
    NoiseSpec spec;
    spec.gaussian_q = {q};
    auto law = heat_gaussian_convolution_law(t, spec, *lambda_table({lam}));
    CHECK(ms.within(law[0]));
}

TEST_CASE("wave stationary covariance")
{
    auto s = Mat2{};
    s = wave_stationary_covariance(1.0, 1.0, 1.0);
    CHECK(s.a == doctest::Approx(0.5));
    CHECK(std::abs(s.b) < 1e-15);
    CHECK(s.d == doctest::Approx(0.5));

    // quadrature of q int_0^T exp(sA) e2 e2^T exp(sA^T) ds
    for (auto [lam, g, q] : {std::tuple{1.0, 1.0, 1.0}, {2.0, 3.0, 0.7}, {9.0, 0.5, 2.0}}) {
        Eigen::Matrix2d a;
        a << 0, 1, -lam, -g;
        const double horizon = 60.0 / g, h = 1e-3;
        const int n = static_cast<int>(horizon / h);
        Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
        Eigen::Matrix2d step = (a * h).exp(), cur = Eigen::Matrix2d::Identity();
        for (int i = 0; i <= n; ++i) {
            Eigen::Vector2d c = cur.col(1);
            double wgt = (i == 0 || i == n) ? 0.5 : 1.0;
            acc += wgt * h * q * c * c.transpose();
            cur = step * cur;
        }
        auto inf = wave_stationary_covariance(lam, g, q);
        CHECK(inf.a == doctest::Approx(acc(0, 0)).epsilon(1e-5));
        CHECK(inf.d == doctest::Approx(acc(1, 1)).epsilon(1e-5));
        CHECK(std::abs(inf.b - acc(0, 1)) < 1e-6);
        CHECK(inf.a == doctest::Approx(q / (2 * g * lam)));
        CHECK(inf.d == doctest::Approx(q / (2 * g)));
    }
}

TEST_CASE("wave Gaussian law over time")
{
    auto s = wave_spectrum(1.5, pi_interval(6));
    NoiseSpec spec;
    spec.gaussian_q = {1, 0.5, 0.2, 0.1, 0.0, 0.3};
    auto zero = wave_gaussian_convolution_law(0.0, spec, *s);
    for (const auto& c : zero) {
        CHECK(std::abs(c.a) < 1e-15);
        CHECK(std::abs(c.d) < 1e-15);
    }
    auto inf = wave_gaussian_convolution_law(kInfiniteTime, spec, *s);
    std::vector<double> prev(6, 0.0);
    for (double t = 0.05; t < 30; t *= 1.3) {
        auto cov = wave_gaussian_convolution_law(t, spec, *s);
        for (std::size_t k = 0; k < 6; ++k) {
            CHECK(cov[k].a >= -1e-15);
            CHECK(cov[k].det() >= -1e-14);
            CHECK(cov[k].trace() >= prev[k] - 1e-14);
            CHECK(cov[k].trace() <= inf[k].trace() + 1e-14);
            prev[k] = cov[k].trace();
        }
    }
    for (std::size_t k = 0; k < 6; ++k) CHECK(prev[k] == doctest::Approx(inf[k].trace()).epsilon(1e-8));
}

TEST_CASE("Gaussian samplers")
{
    auto sys = pi_interval(5);
    NoiseSpec spec;
    spec.gaussian_q = {1.0, 0.0, 0.5, 0.25, 0.125};
    StreamFactory rng(7);
    auto a = sample_gaussian_convolution(1.0, spec, sys, rng, 11);
    auto b = sample_gaussian_convolution(1.0, spec, sys, rng, 11);
    for (std::size_t k = 0; k < 5; ++k) CHECK(a[k] == b[k]);
    CHECK(a[1] == 0.0);

    auto law = heat_gaussian_convolution_law(1.0, spec, *sys);
    std::vector<double> x0, sq2;
    for (std::uint32_t r = 0; r < 100000; ++r) {
        auto s = sample_heat_gaussian(law, sys, rng, r);
        x0.push_back(s[0]);
        sq2.push_back(s[2] * s[2]);
    }
    CHECK(mean_se(x0).within(0.0));
    CHECK(mean_se(sq2).within(law[2]));

    // pathwise scaling
    const double eps = 0.01;
    auto small = sample_gaussian_convolution(kInfiniteTime, spec.scaled(eps), sys, rng, 5);
    auto unit = sample_gaussian_convolution(kInfiniteTime, spec, sys, rng, 5);
    for (std::size_t k = 0; k < 5; ++k) CHECK(small[k] == doctest::Approx(eps * unit[k]).epsilon(1e-14));
}

TEST_CASE("wave Gaussian sampler covariance")
{
    auto s = wave_spectrum(1.5, pi_interval(3));
    NoiseSpec spec;
    spec.gaussian_q = {1.0, 0.5, 0.2};
    StreamFactory rng(99);
    auto law = wave_gaussian_convolution_law(0.8, spec, *s);
    std::vector<double> uu, uw, ww;
    for (std::uint32_t r = 0; r < 100000; ++r) {
        auto z = sample_wave_gaussian(law, s, rng, r);
        uu.push_back(z.position()[1] * z.position()[1]);
        uw.push_back(z.position()[1] * z.velocity()[1]);
        ww.push_back(z.velocity()[1] * z.velocity()[1]);
    }
    CHECK(mean_se(uu).within(law[1].a));
    CHECK(mean_se(uw).within(law[1].b));
    CHECK(mean_se(ww).within(law[1].d));
}

TEST_CASE("Levy convolution")
{
    auto sys = pi_interval(3);
    StreamFactory rng(2024);
    NoiseSpec zero_rate;
    zero_rate.jumps = {{{1.0, 0.5, 0.2}, 0.0}};
    auto z = sample_levy_convolution(2.0, zero_rate, sys, rng, 0);
    for (std::size_t k = 0; k < 3; ++k) CHECK(z[k] == 0.0);

    NoiseSpec degenerate;
    degenerate.compensated = true;
    try {
        sample_levy_convolution(1.0, degenerate, sys, rng, 0);
        FAIL("expected degenerate spec");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::degenerate_spec);
    }

    const double r = 3.0, t = 0.7;
    NoiseSpec spec;
    spec.jumps = {{{0.8, -0.4, 0.3}, r}};
    std::vector<double> x0, sq1;
    for (std::uint32_t rep = 0; rep < 100000; ++rep) {
        auto s = sample_levy_convolution(t, spec, sys, rng, rep);
        x0.push_back(s[0]);
        sq1.push_back(s[1] * s[1]);
    }
    CHECK(mean_se(x0).within(0.0));
    const double lam = sys->lambda(1), m = -0.4;
    CHECK(mean_se(sq1).within(r * m * m * (1 - std::exp(-2 * lam * t)) / (2 * lam)));
}

TEST_CASE("wave Levy convolution moments")
{
    auto s = wave_spectrum(1.5, pi_interval(2));
    StreamFactory rng(5);
    const double r = 2.0, t = 1.3;
    NoiseSpec spec;
    spec.jumps = {{{0.6, 0.3}, r}};
    spec.gaussian_q = {};
    std::vector<double> u0, ww;
    for (std::uint32_t rep = 0; rep < 100000; ++rep) {
        auto z = sample_levy_convolution(t, spec, s, rng, rep);
        u0.push_back(z.position()[0]);
        ww.push_back(z.velocity()[0] * z.velocity()[0]);
    }
    CHECK(mean_se(u0).within(0.0));
    // Campbell: second moment equals the Gaussian covariance with q = r m^2
    NoiseSpec g;
    g.gaussian_q = {r * 0.36, r * 0.09};
    auto cov = wave_gaussian_convolution_law(t, g, *s);
    CHECK(mean_se(ww).within(cov[0].d));
}

TEST_CASE("log moment check")
{
    NoiseSpec empty;
    auto e = log_moment_check(empty);
    CHECK(e.finite);
    CHECK(e.integral == 0.0);
    NoiseSpec small;
    small.jumps = {{{0.5, 0.5}, 4.0}};
    CHECK(log_moment_check(small).integral == 0.0);
    NoiseSpec big;
    big.jumps = {{{3.0, 4.0}, 2.0}};
    auto b = log_moment_check(big);
    CHECK(b.finite);
    CHECK(b.integral == doctest::Approx(2.0 * std::log(5.0)));
}

TEST_CASE("noise spec json")
{
    NoiseSpec spec;
    spec.gaussian_q = {1.0, 0.25};
    spec.jumps = {{{0.1, 0.2}, 3.0}};
    spec.compensated = false;
    auto back = NoiseSpec::from_json(spec.to_json());
    CHECK(back.gaussian_q == spec.gaussian_q);
    CHECK(back.jumps.size() == 1);
    CHECK(back.jumps[0].rate == 3.0);
    CHECK_FALSE(back.compensated);
    auto bad = nlohmann::json::parse(R"({"jumps":[{"mark":[1],"rate":"x"}]})");
    try {
        NoiseSpec::from_json(bad);
        FAIL("expected config error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("/jumps/0/rate") != std::string::npos);
    }
    NoiseSpec neg;
    neg.gaussian_q = {-1.0};
    CHECK_THROWS_AS(neg.validate(1), Error);
}
