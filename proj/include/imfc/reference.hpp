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
#include "imfc/model.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace imfc {

class InvalidReferencePatient : public std::runtime_error {
public:
    explicit InvalidReferencePatient(const std::string& what) : std::runtime_error(what) {}
};

/// Sampled reference trajectories N*(t), Ca*(t) and their grid derivatives,
/// shared read-only by every run of an experiment.
struct ReferencePair {
    std::vector<double> times;
    std::vector<double> n_star, ca_star;
    std::vector<double> n_star_dot, ca_star_dot;
    double c1 = 4.0;
    double c2 = 1.0;
    double ca_rest = 0.125;
};

/// Zero-control trajectory of the reference (healthy) patient over the full
/// horizon. Errors out unless the open-loop outcome really is Healthy.
Trajectory generate_free_response(const PatientParameters& healthy, const IntegratorConfig& config,
                                  double tol_zero = kTolZero);

/// N* = c1 * N_free, Ca* = (Ca_free - ca_rest) * c2 + ca_rest, derivatives
/// by central differences (first-order one-sided at the two ends, which
/// makes the trapezoid integral of the derivative telescope exactly).
ReferencePair scale_reference(const Trajectory& free, double c1, double c2, double ca_rest);

/// CSV with header `t,Nref,Caref,Nref_dot,Caref_dot`.
void write_reference_csv(const ReferencePair& ref, const std::string& path);
ReferencePair read_reference_csv(const std::string& path);

}  // namespace imfc
