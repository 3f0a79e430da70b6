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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace imfc {

enum class NamedPatient { Patient1, Patient2, Reference, HealthyEq };

/// Reference parameter set of the four-ODE model (the versioned copy lives
/// in data/reference_parameters.json; both must agree).
PatientParameters table1_parameters();

/// The published virtual-patient configurations plus the reference patient
/// and the healthy equilibrium.
PatientParameters named_patient(NamedPatient id);

/// Parse "patient1", "patient2", "reference", "healthy-eq".
NamedPatient parse_named_patient(const std::string& s);

struct Range {
    double lo, hi;
};

/// Sampling ranges for the varied parameters and initial conditions, with
/// the published variability table as defaults.
struct CohortSpec {
    int count = 1;
    std::uint64_t seed = 0;
    Range p0{0.0, 1.0};
    Range ca0{0.0938, 0.1563};
    Range k_pg{0.3, 0.6};
    Range k_cn{0.03, 0.05};
    Range k_nd{0.015, 0.025};
    Range k_np{0.075, 0.125};
    Range k_cnd{36.0, 60.0};
    Range k_nn{0.0075, 0.0125};

    void validate() const;
};

/// Draw `count` patients: varied parameters uniform and independent within
/// their ranges, everything else at the reference values, N(0) = D(0) = 0.
/// mt19937_64 seeded with spec.seed; per patient the draw order is
/// P0, Ca0, k_pg, k_cn, k_nd, k_np, k_cnd, k_nn, each mapped to [lo, hi)
/// via (x >> 11) * 2^-53, so cohorts replay exactly across platforms.
std::vector<PatientParameters> sample_cohort(const CohortSpec& spec);

/// Patient file IO: JSON object {params: {...}, initial: {P,N,D,Ca}, label}.
void write_patient_json(const PatientParameters& p, const std::string& label,
                        const std::string& path);
PatientParameters read_patient_json(const std::string& path, std::string* label = nullptr);

/// Cohort file IO: {spec: {...}, patients: [...]}.
void write_cohort_json(const std::vector<PatientParameters>& patients, const CohortSpec& spec,
                       const std::string& path);
std::vector<PatientParameters> read_cohort_json(const std::string& path,
                                                CohortSpec* spec = nullptr);

/// Flat symbol->value map of the reference parameters (the External
/// Interface format of the reference-parameter file).
void write_reference_parameters_json(const PatientParameters& p, const std::string& path);
PatientParameters read_reference_parameters_json(const std::string& path);

}  // namespace imfc
