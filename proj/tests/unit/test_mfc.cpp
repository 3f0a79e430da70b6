/*
 * Copyright 2026 The imfc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "imfc/integrate.hpp"
#include "imfc/mfc.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace imfc;

namespace {

constexpr double kStep = 1.0 / 60.0;
constexpr double kTau = 0.5;
constexpr int kWindow = 30;

SignalHistory make_history(const std::vector<double>& y, const std::vector<double>& u,
                           const std::vector<double>& yrefdot = {},
                           const std::vector<double>& e = {})
{
    SignalHistory h(kWindow, kStep);
    for (std::size_t i = 0; i < y.size(); ++i) {
        h.push({y[i], i < u.size() ? u[i] : 0.0, i < yrefdot.size() ? yrefdot[i] : 0.0,
                i < e.size() ? e[i] : 0.0});
    }
    return h;
}

}  // namespace

TEST_CASE("algebraic estimator annihilates constants")
{
    std::vector<double> y(kWindow + 1, 3.7), u(kWindow + 1, 0.0);
    const SignalHistory h = make_history(y, u);
    CHECK(std::abs(estimate_f_algebraic(h, 2.0, kTau)) < 1e-12);
}

TEST_CASE("algebraic estimator recovers the slope of a ramp")
{
    const double a = 0.83;
    std::vector<double> y(kWindow + 1), u(kWindow + 1, 0.0);
    for (int i = 0; i <= kWindow; ++i) y[i] = a * i * kStep;
    const SignalHistory h = make_history(y, u);
    const double est = estimate_f_algebraic(h, 2.0, kTau);
    // the piecewise-linear signal model integrates a ramp exactly; the
    // tolerance below is the generic trapezoid-order bound
    const double tol = std::max(1e-12, a * (kStep / kTau) * (kStep / kTau));
    CHECK(std::abs(est - a) < tol);
    CHECK(std::abs(est - a) < 1e-10);
}

TEST_CASE("adding a constant offset leaves the algebraic estimate unchanged")
{
    std::mt19937_64 rng(3);
    auto unit = [&]() { return double(rng() >> 11) * 0x1.0p-53; };
    std::vector<double> y(kWindow + 1), u(kWindow + 1);
    for (int i = 0; i <= kWindow; ++i) {
        y[i] = std::sin(0.3 * i) + 0.2 * unit();
        u[i] = 0.5 * unit();
    }
    const double base = estimate_f_algebraic(make_history(y, u), 2.0, kTau);
    for (double& v : y) v += 17.25;
    const double shifted = estimate_f_algebraic(make_history(y, u), 2.0, kTau);
    CHECK(std::abs(base - shifted) < 1e-12);
}

TEST_CASE("both estimators recover a constant F on the scalar plant")
{
    // plant y' = F0 + alpha*u with a zero-order-hold input sequence
    const double f0 = 0.7, alpha = 2.0;
    std::mt19937_64 rng(9);
    auto unit = [&]() { return double(rng() >> 11) * 0x1.0p-53; };
    std::vector<double> y(kWindow + 1), u(kWindow + 1), ydot_ref(kWindow + 1), e(kWindow + 1, 0.0);
    y[0] = 0.4;
    for (int i = 0; i < kWindow; ++i) {
        u[i] = 0.3 * unit();
        y[i + 1] = y[i] + kStep * (f0 + alpha * u[i]);
    }
    u[kWindow] = 0.3 * unit();
    // reference chosen as the plant trajectory itself: e = 0, ydot* = y'
    for (int i = 0; i <= kWindow; ++i) ydot_ref[i] = f0 + alpha * u[i];
    const SignalHistory h = make_history(y, u, ydot_ref, e);

    const double alg = estimate_f_algebraic(h, alpha, kTau);
    CHECK(std::abs(alg - f0) < 1e-12);  // exact for the ZOH plant
    CHECK(std::abs(alg - f0) < 1e-4);

    const double cl = estimate_f_closedloop(h, alpha, 0.47, kTau);
    CHECK(std::abs(cl - f0) < 1e-4);
}

TEST_CASE("closed-loop estimator on constant integrand windows")
{
    std::vector<double> y(kWindow + 1, 0.0);
    SUBCASE("ydot* = c, u = 0, e = 0 gives c")
    {
        std::vector<double> ydr(kWindow + 1, 1.3), u(kWindow + 1, 0.0), e(kWindow + 1, 0.0);
        const SignalHistory h = make_history(y, u, ydr, e);
        CHECK(estimate_f_closedloop(h, 2.0, 0.47, kTau) == doctest::Approx(1.3).epsilon(1e-14));
    }
    SUBCASE("ydot* = 0, u = u0, e = 0 gives -alpha*u0")
    {
        std::vector<double> ydr(kWindow + 1, 0.0), u(kWindow + 1, 0.25), e(kWindow + 1, 0.0);
        const SignalHistory h = make_history(y, u, ydr, e);
        CHECK(estimate_f_closedloop(h, 2.0, 0.47, kTau) == doctest::Approx(-0.5).epsilon(1e-14));
    }
}

TEST_CASE("estimators require a full window")
{
    SignalHistory h(kWindow, kStep);
    h.push({0.0, 0.0, 0.0, 0.0});
    CHECK_THROWS_AS(estimate_f_algebraic(h, 2.0, kTau), DomainError);
    CHECK_THROWS_AS(estimate_f_closedloop(h, 2.0, 0.47, kTau), DomainError);
}

TEST_CASE("iP law substitution values")
{
    UltraLocalConfig cfg;
    cfg.alpha = 2.0;
    cfg.k_p = 0.47;
    const ControlOutput a = ip_control(0.0, 0.0, 1.0, cfg);
    CHECK(a.commanded == doctest::Approx(-0.235).epsilon(1e-15));
    CHECK(a.applied == 0.0);
    const ControlOutput b = ip_control(-1.0, 0.0, 0.0, cfg);
    CHECK(b.commanded == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(b.applied == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("applied equals commanded whenever commanded is nonnegative")
{
    UltraLocalConfig cfg;
    std::mt19937_64 rng(23);
    auto unit = [&]() { return 2.0 * (double(rng() >> 11) * 0x1.0p-53) - 1.0; };
    for (int i = 0; i < 300; ++i) {
        const ControlOutput o = ip_control(unit(), unit(), unit(), cfg);
        if (o.commanded >= 0.0)
            CHECK(o.applied == o.commanded);
        else
            CHECK(o.applied == 0.0);
    }
}

TEST_CASE("ip_control rejects non-finite input")
{
    UltraLocalConfig cfg;
    CHECK_THROWS_AS(ip_control(std::nan(""), 0.0, 0.0, cfg), DomainError);
}

TEST_CASE("config validation pins tau to the sample grid")
{
    UltraLocalConfig cfg;
    cfg.tau = 0.5;
    cfg.step = 1.0 / 60.0;
    CHECK_NOTHROW(cfg.validate());
    cfg.tau = 0.5 + 0.3 * cfg.step;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = UltraLocalConfig{};
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("exact-F error dynamics collapse to a first-order decay")
{
    // scalar plant y' = F(t) + alpha*u with the true F injected into the iP
    // law; the loop then imposes e' = -k_p e regardless of F
    const double alpha = 2.0, kp = 0.47, e0 = 0.8;
    auto f_true = [](double t) { return 0.3 * std::cos(0.2 * t) - 0.1; };
    auto y_ref = [](double t) { return 1.0 + 0.5 * std::sin(0.15 * t); };
    auto y_ref_dot = [](double t) { return 0.5 * 0.15 * std::cos(0.15 * t); };

    using V1 = Eigen::Matrix<double, 1, 1>;
    auto field = [&](double t, const V1& y) {
        const double e = y[0] - y_ref(t);
        const double u = -(f_true(t) - y_ref_dot(t) + kp * e) / alpha;
        return V1(V1::Constant(f_true(t) + alpha * u));
    };
    V1 y;
    y << y_ref(0.0) + e0;
    const double h = 1.0 / 60.0;
    const double t_end = 10.0 / kp;
    const long long n = llround(t_end / h);
    double worst = 0.0;
    for (long long i = 0; i < n; ++i) {
        y = rk4_step_generic(i * h, y, h, field);
        const double t = (i + 1) * h;
        const double e = y[0] - y_ref(t);
        worst = std::max(worst, std::abs(e - e0 * std::exp(-kp * t)));
    }
    CHECK(worst < 1e-6 * std::abs(e0));
}

TEST_CASE("measurement noise is strongly averaged by the algebraic window")
{
    // white noise of amplitude eps on y perturbs the estimate with a spread
    // on the eps/tau scale, far below the eps/step scale of a raw difference
    const double eps = 0.01, alpha = 2.0;
    std::mt19937_64 rng(71);
    auto sym = [&]() { return 2.0 * (double(rng() >> 11) * 0x1.0p-53) - 1.0; };
    std::vector<double> samples;
    for (int trial = 0; trial < 400; ++trial) {
        std::vector<double> y(kWindow + 1), u(kWindow + 1, 0.0);
        for (int i = 0; i <= kWindow; ++i) y[i] = 0.9 + eps * sym();
        samples.push_back(estimate_f_algebraic(make_history(y, u), alpha, kTau));
    }
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= samples.size();
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / samples.size());
    CHECK(sd > 0.0);
    CHECK(sd < 2.0 * eps / kTau);
    CHECK(sd < 0.1 * eps / kStep);
}

TEST_CASE("loop warm-up returns pure feedforward plus feedback")
{
    UltraLocalConfig cfg;
    IpLoop loop(cfg);
    // first tick: window empty, F estimate must be the warm-up zero
    loop.tick(0.2, 0.1, 0.05);
    CHECK(loop.state().f_est == 0.0);
    const double expected = -(0.0 - 0.05 + cfg.k_p * (0.2 - 0.1)) / cfg.alpha;
    CHECK(loop.state().commanded == doctest::Approx(expected).epsilon(1e-15));
}
