// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <numbers>
#include <random>

#include "spcut/error.hpp"
#include "spcut/semigroup.hpp"

using namespace spcut;

namespace {

EigenSystemPtr table(std::vector<double> lambdas)
{
    std::vector<EigenSystem::MultiIndex> idx;
    for (std::size_t k = 0; k < lambdas.size(); ++k) idx.push_back({static_cast<int>(k + 1)});
    return std::make_shared<const EigenSystem>(
        std::vector<BoxAxis>{{1.0, static_cast<int>(lambdas.size())}}, std::move(lambdas), std::move(idx));
}

EigenSystemPtr pi_box(int modes) { return build_box_eigensystem({BoxAxis::pi_multiple({1, 1}, modes)}); }

Eigen::Matrix2d oracle_exp(double t, double lambda, double gamma)
{
    Eigen::Matrix2d a;
    a << 0.0, 1.0, -lambda, -gamma;
    return (a * t).exp();
}

// Energy norm of exp(t A_k) (u_k, w_k) summed over modes, through the matrix-exponential oracle.
double oracle_wave_norm_sq(double t, const WaveState& z)
{
    const auto& s = *z.spectrum();
    double sq = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        Eigen::Vector2d x(z.position()[k], z.velocity()[k]);
        Eigen::Vector2d y = oracle_exp(t, s.lambda(k), s.gamma()) * x;
        sq += (1.0 + s.lambda(k)) * y(0) * y(0) + y(1) * y(1);
    }
    return sq;
}

WaveState random_state(const WaveSpectrumPtr& s, std::mt19937_64& gen)
{
    std::normal_distribution<double> n01;
    std::vector<double> u(s->size()), w(s->size());
    for (auto& x : u) x = n01(gen);
    for (auto& x : w) x = n01(gen);
    return wave_decompose(u, w, s);
}

}  // namespace

TEST_CASE("heat semigroup examples")
{
    auto sys = pi_box(2);
    ModeCoefficients h(sys, {1.0, 1.0});
    auto same = heat_apply(0.0, h);
    CHECK(same[0] == 1.0);
    CHECK(same[1] == 1.0);
    auto half = heat_apply(std::log(2.0), h);
    CHECK(half[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(half[1] == doctest::Approx(1.0 / 16).epsilon(1e-15));
    CHECK_THROWS_AS(heat_apply(-1.0, h), Error);
}

TEST_CASE("heat semigroup against a dense matrix exponential")
{
    auto sys = pi_box(12);
    std::mt19937_64 gen(3);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> ut(0.0, 2.0);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(12, 12);
    for (int k = 0; k < 12; ++k) a(k, k) = -sys->lambda(k);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> v(12);
        for (auto& x : v) x = n01(gen);
        double t = ut(gen);
        Eigen::VectorXd ref = (a * t).exp() * Eigen::Map<Eigen::VectorXd>(v.data(), 12);
        auto got = heat_apply(t, ModeCoefficients(sys, v));
        for (int k = 0; k < 12; ++k) CHECK(std::abs(got[k] - ref(k)) <= 1e-13 * (1 + std::abs(ref(k))));
        CHECK(got.norm() <= std::exp(-sys->lambda(0) * t) * ModeCoefficients(sys, v).norm() * (1 + 1e-14));
    }
}

TEST_CASE("semigroup property")
{
    auto sys = pi_box(8);
    ModeCoefficients h(sys, {0.3, -1.0, 2.0, 0.0, 0.1, 0.5, -0.2, 1.0});
    auto a = heat_apply(0.4, heat_apply(0.7, h));
    auto b = heat_apply(1.1, h);
    for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-13 * std::abs(h[k]) + 1e-300);

    auto s = wave_spectrum(5.5, pi_box(8));
    std::mt19937_64 gen(5);
    auto z = random_state(s, gen);
    auto zz = wave_apply(0.4, wave_apply(0.7, z));
    auto z1 = wave_apply(1.1, z);
    for (std::size_t k = 0; k < 8; ++k) {
        CHECK(zz.position()[k] == doctest::Approx(z1.position()[k]).epsilon(1e-12));
        CHECK(zz.velocity()[k] == doctest::Approx(z1.velocity()[k]).epsilon(1e-12));
    }
}

TEST_CASE("log-space scaling survives huge times")
{
    auto sys = pi_box(3);
    ModeCoefficients h(sys, {0.0, 1.0, 0.5});
    double t = 1000.0;
    auto r = heat_apply_scaled(t, h, 4.0 * t);
    CHECK(r[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r[2] == 0.0);
    CHECK(heat_apply(t, h)[1] == 0.0);
}

TEST_CASE("wave propagator matches the matrix exponential")
{
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> ug(0.1, 8.0), ul(0.05, 40.0), ut(0.0, 6.0);
    for (int rep = 0; rep < 500; ++rep) {
        double g = ug(gen), lam = ul(gen), t = ut(gen);
        if (std::abs(g * g - 4 * lam) < 1e-3) continue;
        Mat2 m = wave_mode_propagator(t, lam, g);
        auto ref = oracle_exp(t, lam, g);
        double scale = ref.cwiseAbs().maxCoeff() + 1e-300;
        CHECK(std::abs(m.a - ref(0, 0)) <= 1e-10 * scale);
        CHECK(std::abs(m.b - ref(0, 1)) <= 1e-10 * scale);
        CHECK(std::abs(m.c - ref(1, 0)) <= 1e-10 * scale);
        CHECK(std::abs(m.d - ref(1, 1)) <= 1e-10 * scale);
    }
}

TEST_CASE("wave_apply agrees with per-mode matrix exponentials")
{
    auto s = wave_spectrum(6.3, pi_box(16));
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> ut(0.0, 5.0);
    for (int rep = 0; rep < 100; ++rep) {
        auto z = random_state(s, gen);
        double t = ut(gen);
        auto got = wave_apply(t, z);
        for (std::size_t k = 0; k < s->size(); ++k) {
            Eigen::Vector2d ref = oracle_exp(t, s->lambda(k), s->gamma()) *
                                  Eigen::Vector2d(z.position()[k], z.velocity()[k]);
            double scale = std::abs(z.position()[k]) + std::abs(z.velocity()[k]);
            CHECK(std::abs(got.position()[k] - ref(0)) <= 1e-10 * scale);
            CHECK(std::abs(got.velocity()[k] - ref(1)) <= 1e-10 * scale);
        }
    }
    auto z = random_state(s, gen);
    auto same = wave_apply(0.0, z);
    for (std::size_t k = 0; k < s->size(); ++k) {
        CHECK(same.position()[k] == doctest::Approx(z.position()[k]).epsilon(1e-14));
    }
    CHECK_THROWS_AS(wave_apply(-0.1, z), Error);
}

TEST_CASE("single oscillatory mode returns to its orbit every half period")
{
    // gamma = lambda = 1, z = (1, -1/2) is proportional to Re(v_1): b = 1/2
    auto s = wave_spectrum(1.0, table({1.0}));
    auto z = wave_decompose({1.0}, {-0.5}, s);
    auto b = std::get<std::complex<double>>(z.modal(0));
    CHECK(b.real() == doctest::Approx(0.5));
    CHECK(std::abs(b.imag()) < 1e-15);
    const double theta = std::sqrt(3.0) / 2;
    const double period = std::numbers::pi / theta;
    for (double t : {0.1, 0.7, 2.0}) {
        double n0 = std::exp(t) * oracle_wave_norm_sq(t, z);
        double n1 = std::exp(t + period) * oracle_wave_norm_sq(t + period, z);
        CHECK(n0 == doctest::Approx(n1).epsilon(1e-10));
        CHECK(wave_subcritical_norm_sq(t, z) == doctest::Approx(n0).epsilon(1e-10));
    }
}

TEST_CASE("heat leader error")
{
    auto sys = pi_box(2);
    CHECK(heat_leader_error(3.0, ModeCoefficients(sys, {0.0, 2.0})) == 0.0);
    CHECK(heat_leader_error(1.0, ModeCoefficients(sys, {1.0, 1.0})) == doctest::Approx(std::exp(-3.0)));
    ModeCoefficients h(pi_box(5), {0.5, -1.0, 0.2, 0.0, 3.0});
    double prev = heat_leader_error(0.0, h);
    for (double t = 0.1; t < 5; t += 0.1) {
        double cur = heat_leader_error(t, h);
        CHECK(cur <= prev);
        CHECK(cur <= std::exp((1.0 - 4.0) * t) * h.norm() * (1 + 1e-14));
        prev = cur;
    }
    CHECK_THROWS_AS(heat_leader_error(1.0, ModeCoefficients::zeros(sys)), Error);
}

TEST_CASE("overdamped leader examples")
{
    auto s = wave_spectrum(3.0, table({2.0}));
    auto z = wave_decompose({1.0}, {0.0}, s);
    auto lead = wave_overdamped_leader(z);
    CHECK(lead.case_tag == 'a');
    CHECK(lead.omega_star == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(lead.v_of_z.norm() == doctest::Approx(4.0).epsilon(1e-14));
    // numerically: exp(t) S(t) z -> v(z)
    double t = 30.0;
    Eigen::Vector2d y = std::exp(t) * oracle_exp(t, 2.0, 3.0) * Eigen::Vector2d(1.0, 0.0);
    CHECK(y(0) == doctest::Approx(lead.v_of_z.position()[0]).epsilon(1e-10));
    CHECK(y(1) == doctest::Approx(lead.v_of_z.velocity()[0]).epsilon(1e-10));

    auto zb = wave_decompose({1.0}, {-2.0}, s);  // a_plus = 0, a_minus = 1
    auto lb = wave_overdamped_leader(zb);
    CHECK(lb.case_tag == 'b');
    CHECK(lb.omega_star == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(lb.v_of_z.position()[0] == doctest::Approx(1.0));
    CHECK(lb.v_of_z.velocity()[0] == doctest::Approx(-2.0));
    CHECK(lb.beta < 0);

    auto ze = wave_decompose({1.0}, {-1.0}, s);
    auto le = wave_overdamped_leader(ze);
    for (double tt : {0.0, 1.0, 10.0}) CHECK(wave_leader_error(tt, ze, le) < 1e-14);
}

TEST_CASE("overdamped leader decay certificate on mixed data")
{
    auto s = wave_spectrum(10.5, pi_box(14));  // 5 overdamped, 9 oscillatory
    std::mt19937_64 gen(13);
    for (int rep = 0; rep < 30; ++rep) {
        auto z = random_state(s, gen);
        auto lead = wave_overdamped_leader(z);
        CHECK(lead.case_tag == 'a');
        CHECK(lead.mode == 0);
        CHECK(lead.beta < 0);
        for (double t = 0.0; t <= 40.0 / lead.omega_star; t += 0.05) {
            CHECK(wave_leader_error(t, z, lead) <= lead.C1 * std::exp(lead.beta * t) * (1 + 1e-12));
        }
        // error against the oracle at a moderate time
        double t = 2.0;
        auto scaled = wave_apply_scaled(t, z, lead.omega_star * t);
        double sq = 0.0;
        for (std::size_t k = 0; k < s->size(); ++k) {
            Eigen::Vector2d y = std::exp(lead.omega_star * t) * oracle_exp(t, s->lambda(k), s->gamma()) *
                                Eigen::Vector2d(z.position()[k], z.velocity()[k]);
            double du = y(0) - lead.v_of_z.position()[k], dw = y(1) - lead.v_of_z.velocity()[k];
            sq += (1 + s->lambda(k)) * du * du + dw * dw;
        }
        CHECK(std::sqrt(sq) == doctest::Approx(wave_leader_error(t, z, lead)).epsilon(1e-8));
    }
}

TEST_CASE("overdamped leader routes")
{
    auto s = wave_spectrum(10.5, pi_box(8));
    std::vector<double> u(8, 0.0), w(8, 0.0);
    u[6] = 1.0;  // oscillatory only
    CHECK_THROWS_AS(wave_overdamped_leader(wave_decompose(u, w, s)), Error);

    // case b with oscillatory content is not led by the overdamped term
    auto rp = std::get<RealPair>(s->roots(2));
    u.assign(8, 0.0);
    w.assign(8, 0.0);
    u[2] = 1.0;
    w[2] = rp.minus;
    u[7] = 0.3;
    try {
        wave_overdamped_leader(wave_decompose(u, w, s));
        FAIL("expected subcritical route");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::subcritical_route);
    }
    u[7] = 0.0;
    auto lb = wave_overdamped_leader(wave_decompose(u, w, s));
    CHECK(lb.case_tag == 'b');
    CHECK(lb.mode == 2);
    CHECK(lb.omega_star == doctest::Approx(-rp.minus));

    auto sub = wave_spectrum(1.0, pi_box(4));
    CHECK_THROWS_AS(wave_overdamped_leader(wave_decompose({1, 0, 0, 0}, {0, 0, 0, 0}, sub)), Error);
}

TEST_CASE("subcritical closed form")
{
    auto s = wave_spectrum(1.5, pi_box(10));
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> ut(0.0, 10.0);
    for (int rep = 0; rep < 200; ++rep) {
        auto z = random_state(s, gen);
        double t = ut(gen);
        double closed = wave_subcritical_norm_sq(t, z);
        double ref = std::exp(s->gamma() * t) * oracle_wave_norm_sq(t, z);
        CHECK(closed == doctest::Approx(ref).epsilon(1e-8));
        double cap = 0.0;
        for (std::size_t k = 0; k < z.size(); ++k) {
            cap += 6.0 * std::norm(std::get<std::complex<double>>(z.modal(k))) * (1 + s->lambda(k));
        }
        CHECK(closed <= cap);
        auto env = wave_subcritical_envelope(z);
        CHECK(env.lo_sq > 0);
        CHECK(closed >= env.lo_sq * (1 - 1e-12));
        CHECK(closed <= env.hi_sq * (1 + 1e-12));
    }
    auto zero = wave_decompose(std::vector<double>(10, 0.0), std::vector<double>(10, 0.0), s);
    CHECK(wave_subcritical_norm_sq(3.0, zero) == 0.0);
    auto over = wave_spectrum(3.0, table({2.0}));
    CHECK_THROWS_AS(wave_subcritical_norm_sq(1.0, wave_decompose({1.0}, {0.0}, over)), Error);
}

TEST_CASE("decay constants")
{
    auto h = heat_decay_constants(*pi_box(4));
    CHECK(h.C_star == 1.0);
    CHECK(h.lambda_star == 1.0);

    auto od = wave_decay_constants(*wave_spectrum(3.0, table({2.0})));
    CHECK(od.lambda_star == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(od.C_star >= 1.0);

    auto osc = wave_decay_constants(*wave_spectrum(1.5, pi_box(6)));
    CHECK(osc.lambda_star == 0.75);

    // certificate on sampled states and grid times
    auto s = wave_spectrum(10.5, pi_box(10));
    auto dc = wave_decay_constants(*s);
    std::mt19937_64 gen(19);
    for (int rep = 0; rep < 20; ++rep) {
        auto z = random_state(s, gen);
        for (int i = 0; i < 2000; i += 37) {
            double t = 20.0 / dc.lambda_star * i / 1999.0;
            CHECK(wave_apply(t, z).norm() <= dc.C_star * std::exp(-dc.lambda_star * t) * z.norm() * (1 + 1e-9));
        }
    }
}
