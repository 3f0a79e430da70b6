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

#pragma once

#include "imfc/model.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace imfc {

struct IntegratorConfig {
    double step_size = 1.0 / 60.0;  // hours; one controller tick per step
    double horizon = 500.0;         // hours

    int sample_count() const { return static_cast<int>(std::llround(horizon / step_size)); }

    void validate() const
    {
        if (!(step_size > 0)) throw DomainError("step_size must be positive");
        if (!(horizon >= step_size)) throw DomainError("horizon shorter than one step");
    }
};

class IntegrationBlowup : public std::runtime_error {
public:
    IntegrationBlowup(double t, const std::string& what)
        : std::runtime_error(what + " at t=" + std::to_string(t)), time(t)
    {
    }
    double time;
};

/// Uniformly sampled trajectory; times[k] = k * step, states[k] the state at
/// that instant. Truncated early when the death threshold is reached.
struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;

    std::size_t size() const { return times.size(); }
    bool died() const { return !states.empty() && states.back()[2] >= kDeathThreshold; }
};

/// One classical RK4 step of the patient dynamics with controls held
/// constant over the step, followed by projection onto the nonnegative
/// orthant (the exact flow is positively invariant; the clip only removes
/// roundoff-scale excursions).
template <typename Scalar>
State4<Scalar> rk4_step(const State4<Scalar>& s, const PatientParams<Scalar>& p, Scalar u_p,
                        Scalar u_a, Scalar h)
{
    if (!(h > Scalar(0))) throw DomainError("rk4_step: step must be positive");
    const State4<Scalar> k1 = rhs(s, p, u_p, u_a);
    const State4<Scalar> k2 = rhs<Scalar>((s + Scalar(0.5) * h * k1).cwiseMax(Scalar(0)), p, u_p, u_a);
    const State4<Scalar> k3 = rhs<Scalar>((s + Scalar(0.5) * h * k2).cwiseMax(Scalar(0)), p, u_p, u_a);
    const State4<Scalar> k4 = rhs<Scalar>((s + h * k3).cwiseMax(Scalar(0)), p, u_p, u_a);
    State4<Scalar> out = s + (h / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
    return out.cwiseMax(Scalar(0));
}

/// Generic RK4 step for an arbitrary autonomous-in-form vector field
/// f(t, y); used by tests and by the scalar control experiments.
template <typename Vec, typename Rhs>
Vec rk4_step_generic(double t, const Vec& y, double h, Rhs&& f)
{
    const Vec k1 = f(t, y);
    const Vec k2 = f(t + 0.5 * h, Vec(y + 0.5 * h * k1));
    const Vec k3 = f(t + 0.5 * h, Vec(y + 0.5 * h * k2));
    const Vec k4 = f(t + h, Vec(y + h * k3));
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Per-sample dosing source: returns (u_p, u_a) applied over step k.
using ControlSource = std::function<std::pair<double, double>(int step, const State& s)>;

/// Fixed-step integration of one virtual patient. Records every sample,
/// halts at the first sample with D >= 17 (the death sample is recorded).
inline Trajectory integrate(const State& initial, const PatientParameters& params,
                            const ControlSource& control, const IntegratorConfig& config)
{
    config.validate();
    params.validate();
    const int n = config.sample_count();
    Trajectory traj;
    traj.times.reserve(n + 1);
    traj.states.reserve(n + 1);
    State s = initial;
    traj.times.push_back(0.0);
    traj.states.push_back(s);
    for (int k = 0; k < n; ++k) {
        double u_p = 0.0, u_a = 0.0;
        if (control) std::tie(u_p, u_a) = control(k, s);
        s = rk4_step(s, params, u_p, u_a, config.step_size);
        if (!s.allFinite()) throw IntegrationBlowup((k + 1) * config.step_size, "non-finite state");
        traj.times.push_back((k + 1) * config.step_size);
        traj.states.push_back(s);
        if (s[2] >= kDeathThreshold) break;
    }
    return traj;
}

inline Trajectory integrate(const State& initial, const PatientParameters& params,
                            const IntegratorConfig& config)
{
    return integrate(initial, params, ControlSource{}, config);
}

}  // namespace imfc
