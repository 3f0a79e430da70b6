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

#include "imfc/io.hpp"

#include <json.hpp>

#include <fstream>
#include <random>

namespace imfc {

PatientParameters table1_parameters()
{
    PatientParameters p{};
    p.k_pg = 0.6;
    p.k_pm = 0.6;
    p.s_m = 0.005;
    p.mu_m = 0.002;
    p.k_mp = 0.01;
    p.k_pn = 1.4;
    p.p_inf = 20.0;
    p.s_nr = 0.21;
    p.mu_nr = 0.04;
    p.mu_n = 0.07;
    p.k_np = 0.1;
    p.k_nn = 0.01;
    p.k_nd = 0.02;
    p.k_dn = 0.52;
    p.x_dn = 0.21;
    p.mu_d = 0.03;
    p.s_c = 0.00875;
    p.k_cn = 0.04;
    p.k_cnd = 48.0;
    p.mu_c = 0.07;
    p.c_inf = 0.28;
    p.initial << 0.0, 0.0, 0.0, p.resting_ca();
    return p;
}

PatientParameters named_patient(NamedPatient id)
{
    PatientParameters p = table1_parameters();
    switch (id) {
        case NamedPatient::Patient1:
            p.k_pg = 0.47846;
            p.k_cn = 0.0409;
            p.k_nd = 0.0242;
            p.k_np = 0.1211;
            p.k_cnd = 49.1243;
            p.k_nn = 0.012;
            p.initial << 0.47360, 0.0660, 0.0477, 0.1635;
            return p;
        case NamedPatient::Patient2:
            p.k_pg = 0.4746;
            p.k_cn = 0.0386;
            p.k_nd = 0.0223;
            p.k_np = 0.1116;
            p.k_cnd = 46.3367;
            p.k_nn = 0.0112;
            p.initial << 1.0017, 0.0711, 0.0732, 0.1314;
            return p;
        case NamedPatient::Reference:
            p.initial << 0.3, 0.0, 0.0, p.resting_ca();
            return p;
        case NamedPatient::HealthyEq:
            p.initial << 0.0, 0.0, 0.0, p.resting_ca();
            return p;
    }
    throw DomainError("unknown named patient");
}

NamedPatient parse_named_patient(const std::string& s)
{
    if (s == "patient1") return NamedPatient::Patient1;
    if (s == "patient2") return NamedPatient::Patient2;
    if (s == "reference") return NamedPatient::Reference;
    if (s == "healthy-eq") return NamedPatient::HealthyEq;
    throw DomainError("unknown patient id '" + s + "' (expected patient1, patient2, reference or healthy-eq)");
}

void CohortSpec::validate() const
{
    if (count < 1) throw DomainError("cohort count must be >= 1");
    for (const Range& r : {p0, ca0, k_pg, k_cn, k_nd, k_np, k_cnd, k_nn})
        if (!(r.lo <= r.hi)) throw DomainError("cohort range with lo > hi");
}

namespace {

double unit_from(std::mt19937_64& rng)
{
    // 53-bit mantissa draw; fixed mapping so cohorts replay across platforms
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double draw(std::mt19937_64& rng, const Range& r)
{
    return r.lo + (r.hi - r.lo) * unit_from(rng);
}

}  // namespace

std::vector<PatientParameters> sample_cohort(const CohortSpec& spec)
{
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::vector<PatientParameters> out;
    out.reserve(spec.count);
    for (int i = 0; i < spec.count; ++i) {
        PatientParameters p = table1_parameters();
        const double p0 = draw(rng, spec.p0);
        const double ca0 = draw(rng, spec.ca0);
        p.k_pg = draw(rng, spec.k_pg);
        p.k_cn = draw(rng, spec.k_cn);
        p.k_nd = draw(rng, spec.k_nd);
        p.k_np = draw(rng, spec.k_np);
        p.k_cnd = draw(rng, spec.k_cnd);
        p.k_nn = draw(rng, spec.k_nn);
        p.initial << p0, 0.0, 0.0, ca0;
        out.push_back(p);
    }
    return out;
}

namespace {

using nlohmann::json;

json params_to_json(const PatientParameters& p)
{
    return json{{"k_pg", p.k_pg},   {"k_pm", p.k_pm}, {"s_m", p.s_m},   {"mu_m", p.mu_m},
                {"k_mp", p.k_mp},   {"k_pn", p.k_pn}, {"p_inf", p.p_inf}, {"s_nr", p.s_nr},
                {"mu_nr", p.mu_nr}, {"mu_n", p.mu_n}, {"k_np", p.k_np}, {"k_nn", p.k_nn},
                {"k_nd", p.k_nd},   {"k_dn", p.k_dn}, {"x_dn", p.x_dn}, {"mu_d", p.mu_d},
                {"s_c", p.s_c},     {"k_cn", p.k_cn}, {"k_cnd", p.k_cnd}, {"mu_c", p.mu_c},
                {"c_inf", p.c_inf}};
}

void params_from_json(const json& j, PatientParameters& p)
{
    p.k_pg = j.at("k_pg");
    p.k_pm = j.at("k_pm");
    p.s_m = j.at("s_m");
    p.mu_m = j.at("mu_m");
    p.k_mp = j.at("k_mp");
    p.k_pn = j.at("k_pn");
    p.p_inf = j.at("p_inf");
    p.s_nr = j.at("s_nr");
    p.mu_nr = j.at("mu_nr");
    p.mu_n = j.at("mu_n");
    p.k_np = j.at("k_np");
    p.k_nn = j.at("k_nn");
    p.k_nd = j.at("k_nd");
    p.k_dn = j.at("k_dn");
    p.x_dn = j.at("x_dn");
    p.mu_d = j.at("mu_d");
    p.s_c = j.at("s_c");
    p.k_cn = j.at("k_cn");
    p.k_cnd = j.at("k_cnd");
    p.mu_c = j.at("mu_c");
    p.c_inf = j.at("c_inf");
}

json patient_to_json(const PatientParameters& p, const std::string& label)
{
    json j;
    j["params"] = params_to_json(p);
    j["initial"] = {{"P", p.initial[0]}, {"N", p.initial[1]}, {"D", p.initial[2]}, {"Ca", p.initial[3]}};
    j["label"] = label;
    return j;
}

PatientParameters patient_from_json(const json& j, std::string* label)
{
    PatientParameters p{};
    params_from_json(j.at("params"), p);
    const json& ini = j.at("initial");
    p.initial << ini.at("P").get<double>(), ini.at("N").get<double>(), ini.at("D").get<double>(),
        ini.at("Ca").get<double>();
    if (label && j.contains("label")) *label = j.at("label").get<std::string>();
    p.validate();
    return p;
}

}  // namespace

void write_patient_json(const PatientParameters& p, const std::string& label,
                        const std::string& path)
{
    write_file(path, patient_to_json(p, label).dump(2) + "\n");
}

PatientParameters read_patient_json(const std::string& path, std::string* label)
{
    const json j = json::parse(read_file(path));
    try {
        return patient_from_json(j, label);
    }
    catch (const json::exception& e) {
        throw DomainError("patient file " + path + ": " + e.what());
    }
}

void write_cohort_json(const std::vector<PatientParameters>& patients, const CohortSpec& spec,
                       const std::string& path)
{
    json j;
    j["spec"] = {{"count", spec.count},
                 {"seed", spec.seed},
                 {"P0", {spec.p0.lo, spec.p0.hi}},
                 {"CA0", {spec.ca0.lo, spec.ca0.hi}},
                 {"k_pg", {spec.k_pg.lo, spec.k_pg.hi}},
                 {"k_cn", {spec.k_cn.lo, spec.k_cn.hi}},
                 {"k_nd", {spec.k_nd.lo, spec.k_nd.hi}},
                 {"k_np", {spec.k_np.lo, spec.k_np.hi}},
                 {"k_cnd", {spec.k_cnd.lo, spec.k_cnd.hi}},
                 {"k_nn", {spec.k_nn.lo, spec.k_nn.hi}}};
    j["patients"] = json::array();
    for (std::size_t i = 0; i < patients.size(); ++i)
        j["patients"].push_back(patient_to_json(patients[i], "cohort-" + std::to_string(i)));
    write_file(path, j.dump(2) + "\n");
}

std::vector<PatientParameters> read_cohort_json(const std::string& path, CohortSpec* spec)
{
    const json j = json::parse(read_file(path));
    try {
        if (spec && j.contains("spec")) {
            const json& s = j.at("spec");
            spec->count = s.at("count");
            spec->seed = s.at("seed");
            auto range = [&](const char* key) {
                return Range{s.at(key).at(0).get<double>(), s.at(key).at(1).get<double>()};
            };
            spec->p0 = range("P0");
            spec->ca0 = range("CA0");
            spec->k_pg = range("k_pg");
            spec->k_cn = range("k_cn");
            spec->k_nd = range("k_nd");
            spec->k_np = range("k_np");
            spec->k_cnd = range("k_cnd");
            spec->k_nn = range("k_nn");
        }
        std::vector<PatientParameters> out;
        for (const json& pj : j.at("patients")) out.push_back(patient_from_json(pj, nullptr));
        return out;
    }
    catch (const json::exception& e) {
        throw DomainError("cohort file " + path + ": " + e.what());
    }
}

void write_reference_parameters_json(const PatientParameters& p, const std::string& path)
{
    write_file(path, params_to_json(p).dump(2) + "\n");
}

PatientParameters read_reference_parameters_json(const std::string& path)
{
    const json j = json::parse(read_file(path));
    PatientParameters p = table1_parameters();
    try {
        params_from_json(j, p);
    }
    catch (const json::exception& e) {
        throw DomainError("reference parameter file " + path + ": " + e.what());
    }
    p.initial << 0.0, 0.0, 0.0, p.resting_ca();
    p.validate();
    return p;
}

}  // namespace imfc
