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

#include "imfc/integrate.hpp"
#include "imfc/mfc.hpp"
#include "imfc/model.hpp"
#include "imfc/reference.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace imfc {

enum class Mode { OpenLoop, ClosedLoop };

/// The only plant information the controller ever sees: the two measured
/// channels. P and D are deliberately not representable here.
struct Measurement {
    double n;
    double ca;
};

struct ExperimentConfig {
    PatientParameters patient;
    Mode mode = Mode::ClosedLoop;
    double alpha_p = 2.0;
    double alpha_a = 2.0;
    double kp1 = 0.47;
    double kp2 = 0.47;
    double tau = 0.5;
    EstimatorKind estimator = EstimatorKind::Algebraic;
    IntegratorConfig grid;          // step 1/60 h, horizon 500 h
    double c1 = 4.0;
    double c2 = 1.0;
    double noise_amplitude = 0.0;   // uniform on [-a, a], N and Ca channels only
    std::uint64_t noise_seed = 0;
    double tol_zero = kTolZero;

    void validate() const;
};

/// Time-indexed log of one experiment. All series share the trajectory
/// grid; control/estimate entries at index k are the values applied over
/// [t_k, t_{k+1}) and the final entry is zero (nothing applied beyond the
/// horizon).
struct SimulationRecord {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<double> u_p, u_a;
    std::vector<double> f1, f2;
    std::vector<double> n_ref, ca_ref;
    Outcome outcome = Outcome::Healthy;
    bool dead_latched = false;
    double ca_rest = 0.125;
    double tol_zero = kTolZero;
};

struct Summary {
    Outcome outcome;
    std::optional<double> clearance_time_h;  // first t with P < tol through the horizon
    double peak_d;
    double dose_up, dose_ua;                 // integrals of the applied doses
    double peak_lag_h;                       // t(argmax u_a) - t(argmax u_p)
    double support_up_h, support_ua_h;       // time above 1% of the dose peak
};

/// Run one experiment. Closed loop: per tick, measure N and Ca (plus
/// optional noise), update both F estimates from history through the
/// previous tick, apply the clamped iP doses for one plant step.
SimulationRecord run(const ExperimentConfig& config, const ReferencePair* reference = nullptr);

Summary summarize(const SimulationRecord& record);

/// CSV with header `t,P,N,D,Ca,up,ua,Nref,Caref,F1,F2`.
void write_record_csv(const SimulationRecord& record, const std::string& path);
SimulationRecord read_record_csv(const std::string& path);

/// Trajectory-only CSV (header `t,P,N,D,Ca,up,ua,Nref,Caref`), reference and
/// control columns zero-filled for open loop.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

std::string summary_to_json(const Summary& s);
Summary summary_from_json(const std::string& text);

}  // namespace imfc
