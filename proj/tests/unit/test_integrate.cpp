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

#include "imfc/cohort.hpp"
#include "imfc/integrate.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>

using namespace imfc;

TEST_CASE("classical RK4 value on y' = -y")
{
    using V1 = Eigen::Matrix<double, 1, 1>;
    V1 y;
    y << 1.0;
    y = rk4_step_generic(0.0, y, 0.1, [](double, const V1& v) { return V1(-v); });
    CHECK(y[0] == doctest::Approx(0.9048375).epsilon(1e-12));
    CHECK(std::abs(y[0] - std::exp(-0.1)) < 1e-6);
}

TEST_CASE("healthy equilibrium is a fixed point of the stepper")
{
    const PatientParameters p = table1_parameters();
    State s;
    s << 0.0, 0.0, 0.0, p.resting_ca();
    const State out = rk4_step(s, p, 0.0, 0.0, 1.0 / 60.0);
    for (int i = 0; i < 4; ++i) CHECK(out[i] == doctest::Approx(s[i]).epsilon(1e-14));
}

namespace {

State euler_fine(const State& s0, const PatientParameters& p, double t_end, double h)
{
    State s = s0;
    const long long n = llround(t_end / h);
    for (long long i = 0; i < n; ++i) {
        s += h * rhs(s, p, 0.0, 0.0);
        s = s.cwiseMax(0.0);
    }
    return s;
}

}  // namespace

TEST_CASE("one step from patient 1 matches a fine-step Euler oracle")
{
    const PatientParameters p = named_patient(NamedPatient::Patient1);
    const double h = 1.0 / 60.0;
    const State rk = rk4_step(p.initial, p, 0.0, 0.0, h);
    const State eu = euler_fine(p.initial, p, h, h / 1000.0);
    for (int i = 0; i < 4; ++i) {
        const double scale = std::max(std::abs(eu[i]), 1e-3);
        CHECK(std::abs(rk[i] - eu[i]) / scale < 1e-6);
    }
}

TEST_CASE("step halving shrinks the error like a fourth-order method")
{
    const PatientParameters p = named_patient(NamedPatient::Reference);
    const double t_end = 2.0;
    auto run = [&](double h) {
        State s = p.initial;
        const long long n = llround(t_end / h);
        for (long long i = 0; i < n; ++i) s = rk4_step(s, p, 0.0, 0.0, h);
        return s;
    };
    const State fine = run(1.0 / 7680.0);
    const State coarse = run(1.0 / 30.0);
    const State halved = run(1.0 / 60.0);
    const double e1 = (coarse - fine).norm();
    const double e2 = (halved - fine).norm();
    const double ratio = e1 / e2;
    CHECK(ratio > 8.0);
    CHECK(ratio < 32.0);
}

TEST_CASE("integration records every sample and stays nonnegative")
{
    const PatientParameters p = named_patient(NamedPatient::Patient2);
    IntegratorConfig cfg{1.0 / 60.0, 20.0};
    const Trajectory traj = integrate(p.initial, p, cfg);
    CHECK(traj.size() == std::size_t(cfg.sample_count() + 1));
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == doctest::Approx(20.0));
    for (std::size_t i = 0; i < traj.size(); ++i) {
        for (int c = 0; c < 4; ++c) CHECK(traj.states[i][c] >= 0.0);
        if (i) CHECK(traj.times[i] > traj.times[i - 1]);
    }
}

TEST_CASE("identical inputs give bit-identical trajectories")
{
    const PatientParameters p = named_patient(NamedPatient::Patient1);
    IntegratorConfig cfg{1.0 / 60.0, 30.0};
    const Trajectory a = integrate(p.initial, p, cfg);
    const Trajectory b = integrate(p.initial, p, cfg);
    REQUIRE(a.size() == b.size());
    CHECK(std::memcmp(a.states.data(), b.states.data(), a.size() * sizeof(State)) == 0);
}

TEST_CASE("death latch stops the run at the first D >= 17 sample")
{
    PatientParameters p = table1_parameters();
    State s0;
    s0 << 0.0, 2.0, 16.99, 0.125;  // damage production saturated, D about to cross
    p.initial = s0;
    IntegratorConfig cfg{1.0 / 60.0, 100.0};
    const Trajectory traj = integrate(s0, p, cfg);
    CHECK(traj.died());
    CHECK(traj.size() < std::size_t(cfg.sample_count() + 1));
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) CHECK(traj.states[i][2] < kDeathThreshold);
    CHECK(traj.states.back()[2] >= kDeathThreshold);
}

TEST_CASE("zero-control integration from the healthy equilibrium is constant")
{
    const PatientParameters p = named_patient(NamedPatient::HealthyEq);
    IntegratorConfig cfg{1.0 / 60.0, 5.0};
    const Trajectory traj = integrate(p.initial, p, cfg);
    for (const State& s : traj.states) {
        CHECK(std::abs(s[0]) < 1e-14);
        CHECK(std::abs(s[1]) < 1e-14);
        CHECK(std::abs(s[2]) < 1e-14);
        CHECK(s[3] == doctest::Approx(p.resting_ca()).epsilon(1e-13));
    }
}

TEST_CASE("config validation")
{
    const IntegratorConfig zero_step{0.0, 10.0};
    CHECK_THROWS_AS(zero_step.validate(), DomainError);
    const IntegratorConfig short_horizon{1.0, 0.5};
    CHECK_THROWS_AS(short_horizon.validate(), DomainError);
}
