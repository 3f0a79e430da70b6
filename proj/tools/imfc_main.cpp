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
#include "imfc/harness.hpp"
#include "imfc/io.hpp"
#include "imfc/manifest.hpp"
#include "imfc/reference.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <thread>

namespace {

using namespace imfc;
namespace fs = std::filesystem;
using nlohmann::ordered_json;

int outcome_exit_code(Outcome o)
{
    switch (o) {
        case Outcome::Healthy: return 0;
        case Outcome::Septic: return 2;
        case Outcome::Aseptic: return 3;
        case Outcome::Dead: return 4;
    }
    return 1;
}

struct GlobalOptions {
    double step = 1.0 / 60.0;
    double horizon = 500.0;
    double tau = 0.5;
    std::string estimator = "algebraic";
    double alpha_p = 2.0;
    double alpha_a = 2.0;
    double kp1 = 0.47;
    double kp2 = 0.47;
    double noise = 0.0;
    std::uint64_t seed = 0;
    int jobs = 0;
    std::string out = ".";
};

EstimatorKind parse_estimator(const std::string& s)
{
    if (s == "algebraic") return EstimatorKind::Algebraic;
    if (s == "closedloop") return EstimatorKind::ClosedLoop;
    throw DomainError("unknown estimator '" + s + "' (expected algebraic or closedloop)");
}

ordered_json config_snapshot(const GlobalOptions& g)
{
    return ordered_json{{"step", g.step},     {"horizon", g.horizon}, {"tau", g.tau},
                        {"estimator", g.estimator}, {"alpha_p", g.alpha_p}, {"alpha_a", g.alpha_a},
                        {"kp1", g.kp1},       {"kp2", g.kp2},         {"noise", g.noise},
                        {"seed", g.seed},     {"jobs", g.jobs},       {"out", g.out}};
}

ExperimentConfig make_experiment(const GlobalOptions& g, const PatientParameters& patient,
                                 Mode mode)
{
    ExperimentConfig cfg;
    cfg.patient = patient;
    cfg.mode = mode;
    cfg.alpha_p = g.alpha_p;
    cfg.alpha_a = g.alpha_a;
    cfg.kp1 = g.kp1;
    cfg.kp2 = g.kp2;
    cfg.tau = g.tau;
    cfg.estimator = parse_estimator(g.estimator);
    cfg.grid.step_size = g.step;
    cfg.grid.horizon = g.horizon;
    cfg.noise_amplitude = g.noise;
    cfg.noise_seed = g.seed;
    return cfg;
}

ReferencePair build_reference(const GlobalOptions& g, const std::string& ref_csv, double c1,
                              double c2)
{
    if (!ref_csv.empty()) return read_reference_csv(ref_csv);
    PatientParameters healthy = named_patient(NamedPatient::Reference);
    IntegratorConfig grid{g.step, g.horizon};
    Trajectory free = generate_free_response(healthy, grid);
    return scale_reference(free, c1, c2, healthy.resting_ca());
}

PatientParameters resolve_patient(const std::string& spec_str)
{
    if (fs::exists(spec_str) && fs::is_regular_file(spec_str)) return read_patient_json(spec_str);
    return named_patient(parse_named_patient(spec_str));
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

std::string join_args(int argc, char** argv)
{
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

int cmd_simulate(const GlobalOptions& g, const std::string& cmdline, const std::string& patient_arg,
                 const std::string& mode_arg, const std::string& ref_csv, double c1, double c2)
{
    Timer timer;
    fs::create_directories(g.out);
    PatientParameters patient = resolve_patient(patient_arg);
    const Mode mode = mode_arg == "open" ? Mode::OpenLoop : Mode::ClosedLoop;

    SimulationRecord rec;
    if (mode == Mode::ClosedLoop) {
        ReferencePair ref = build_reference(g, ref_csv, c1, c2);
        rec = run(make_experiment(g, patient, mode), &ref);
    }
    else {
        rec = run(make_experiment(g, patient, mode));
    }
    const Summary sum = summarize(rec);

    const std::string record_path = g.out + "/record.csv";
    const std::string summary_path = g.out + "/summary.json";
    write_record_csv(rec, record_path);
    write_file(summary_path, summary_to_json(sum));

    RunManifest man;
    man.command = cmdline;
    ordered_json cfg = config_snapshot(g);
    cfg["patient"] = patient_arg;
    cfg["mode"] = mode_arg;
    cfg["c1"] = c1;
    cfg["c2"] = c2;
    man.config_json = cfg.dump();
    if (fs::exists(patient_arg) && fs::is_regular_file(patient_arg))
        man.inputs.emplace_back(patient_arg, fnv1a64_file_digest(patient_arg));
    if (!ref_csv.empty()) man.inputs.emplace_back(ref_csv, fnv1a64_file_digest(ref_csv));
    man.outputs = {record_path, summary_path};
    man.duration_s = timer.seconds();
    append_manifest(g.out, man);

    std::cout << summary_to_json(sum);
    return outcome_exit_code(sum.outcome);
}

int cmd_reference(const GlobalOptions& g, const std::string& cmdline, double c1, double c2)
{
    Timer timer;
    fs::create_directories(g.out);
    ReferencePair ref = build_reference(g, "", c1, c2);
    const std::string path = g.out + "/reference.csv";
    write_reference_csv(ref, path);

    RunManifest man;
    man.command = cmdline;
    ordered_json cfg = config_snapshot(g);
    cfg["c1"] = c1;
    cfg["c2"] = c2;
    man.config_json = cfg.dump();
    man.outputs = {path};
    man.duration_s = timer.seconds();
    append_manifest(g.out, man);
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_cohort(const GlobalOptions& g, const std::string& cmdline, int count,
               const std::string& ranges_file)
{
    Timer timer;
    fs::create_directories(g.out);
    CohortSpec spec;
    spec.count = count;
    spec.seed = g.seed;
    if (!ranges_file.empty()) {
        const nlohmann::json j = nlohmann::json::parse(read_file(ranges_file));
        auto range = [&](const char* key, Range fallback) {
            if (!j.contains(key)) return fallback;
            return Range{j.at(key).at(0).get<double>(), j.at(key).at(1).get<double>()};
        };
        spec.p0 = range("P0", spec.p0);
        spec.ca0 = range("CA0", spec.ca0);
        spec.k_pg = range("k_pg", spec.k_pg);
        spec.k_cn = range("k_cn", spec.k_cn);
        spec.k_nd = range("k_nd", spec.k_nd);
        spec.k_np = range("k_np", spec.k_np);
        spec.k_cnd = range("k_cnd", spec.k_cnd);
        spec.k_nn = range("k_nn", spec.k_nn);
    }
    const std::vector<PatientParameters> cohort = sample_cohort(spec);
    const std::string path = g.out + "/cohort.json";
    write_cohort_json(cohort, spec, path);

    RunManifest man;
    man.command = cmdline;
    ordered_json cfg = config_snapshot(g);
    cfg["count"] = count;
    man.config_json = cfg.dump();
    if (!ranges_file.empty()) man.inputs.emplace_back(ranges_file, fnv1a64_file_digest(ranges_file));
    man.outputs = {path};
    man.duration_s = timer.seconds();
    append_manifest(g.out, man);
    std::cout << "wrote " << path << "\n";
    return 0;
}

struct BatchRow {
    std::string outcome;
    double clearance = -1.0;
    double dose_up = 0.0;
    double dose_ua = 0.0;
    double peak_d = 0.0;
};

int cmd_batch(const GlobalOptions& g, const std::string& cmdline, const std::string& cohort_file,
              const std::string& mode_arg, const std::string& ref_csv, double c1, double c2)
{
    Timer timer;
    fs::create_directories(g.out);
    const std::vector<PatientParameters> cohort = read_cohort_json(cohort_file);
    const Mode mode = mode_arg == "open" ? Mode::OpenLoop : Mode::ClosedLoop;
    ReferencePair ref;
    if (mode == Mode::ClosedLoop) ref = build_reference(g, ref_csv, c1, c2);

    std::vector<BatchRow> rows(cohort.size());
    const unsigned hw = std::thread::hardware_concurrency();
    const unsigned jobs = g.jobs > 0 ? static_cast<unsigned>(g.jobs) : (hw ? hw : 1u);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cohort.size()) return;
            ExperimentConfig cfg = make_experiment(g, cohort[i], mode);
            SimulationRecord rec = run(cfg, mode == Mode::ClosedLoop ? &ref : nullptr);
            const Summary s = summarize(rec);
            rows[i] = {to_string(s.outcome), s.clearance_time_h.value_or(-1.0), s.dose_up,
                       s.dose_ua, s.peak_d};
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t + 1 < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::ostringstream os;
    os << "patient_id,outcome,clearance_time_h,dose_up,dose_ua,peak_D\n";
    std::size_t healthy = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        os << i << ',' << rows[i].outcome << ',' << format_double(rows[i].clearance) << ','
           << format_double(rows[i].dose_up) << ',' << format_double(rows[i].dose_ua) << ','
           << format_double(rows[i].peak_d) << '\n';
        if (rows[i].outcome == "healthy") ++healthy;
    }
    const std::string path = g.out + "/batch.csv";
    write_file(path, os.str());

    RunManifest man;
    man.command = cmdline;
    ordered_json cfg = config_snapshot(g);
    cfg["cohort"] = cohort_file;
    cfg["mode"] = mode_arg;
    man.config_json = cfg.dump();
    man.inputs.emplace_back(cohort_file, fnv1a64_file_digest(cohort_file));
    if (!ref_csv.empty()) man.inputs.emplace_back(ref_csv, fnv1a64_file_digest(ref_csv));
    man.outputs = {path};
    man.duration_s = timer.seconds();
    append_manifest(g.out, man);

    std::cout << "wrote " << path << " ; healthy fraction " << healthy << "/" << rows.size()
              << "\n";
    return 0;
}

int cmd_figures(const GlobalOptions& g, const std::string& cmdline)
{
    Timer timer;
    fs::create_directories(g.out);
    ReferencePair ref = build_reference(g, "", 4.0, 1.0);

    auto record = [&](NamedPatient id, Mode mode) {
        return run(make_experiment(g, named_patient(id), mode),
                   mode == Mode::ClosedLoop ? &ref : nullptr);
    };
    const SimulationRecord o1 = record(NamedPatient::Patient1, Mode::OpenLoop);
    const SimulationRecord o2 = record(NamedPatient::Patient2, Mode::OpenLoop);
    const SimulationRecord c1 = record(NamedPatient::Patient1, Mode::ClosedLoop);
    const SimulationRecord c2 = record(NamedPatient::Patient2, Mode::ClosedLoop);

    auto emit = [&](const std::string& name, const std::vector<std::string>& header,
                    auto&& row_of) {
        std::size_t rows = std::min({o1.times.size(), o2.times.size(), c1.times.size(),
                                     c2.times.size(), ref.times.size()});
        std::ostringstream os;
        for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
        os << '\n';
        for (std::size_t i = 0; i < rows; ++i) {
            const std::vector<double> row = row_of(i);
            for (std::size_t c = 0; c < row.size(); ++c)
                os << (c ? "," : "") << format_double(row[c]);
            os << '\n';
        }
        const std::string path = g.out + "/" + name;
        write_file(path, os.str());
        return path;
    };

    std::vector<std::string> outputs;
    outputs.push_back(emit("fig1.csv",
                           {"t", "P1_P", "P1_N", "P1_D", "P1_Ca", "P2_P", "P2_N", "P2_D", "P2_Ca"},
                           [&](std::size_t i) {
                               return std::vector<double>{
                                   o1.times[i], o1.states[i][0], o1.states[i][1], o1.states[i][2],
                                   o1.states[i][3], o2.states[i][0], o2.states[i][1],
                                   o2.states[i][2], o2.states[i][3]};
                           }));
    outputs.push_back(emit("fig2a.csv", {"t", "Caref", "P1_Ca", "P2_Ca"}, [&](std::size_t i) {
        return std::vector<double>{c1.times[i], ref.ca_star[i], c1.states[i][3], c2.states[i][3]};
    }));
    outputs.push_back(emit("fig2b.csv", {"t", "Nref", "P1_N", "P2_N"}, [&](std::size_t i) {
        return std::vector<double>{c1.times[i], ref.n_star[i], c1.states[i][1], c2.states[i][1]};
    }));
    outputs.push_back(emit("fig4a.csv", {"t", "P1_P", "P1_D", "P2_P", "P2_D"}, [&](std::size_t i) {
        return std::vector<double>{c1.times[i], c1.states[i][0], c1.states[i][2], c2.states[i][0],
                                   c2.states[i][2]};
    }));
    outputs.push_back(emit("fig4b.csv", {"t", "P1_up", "P1_ua", "P2_up", "P2_ua"},
                           [&](std::size_t i) {
                               return std::vector<double>{c1.times[i], c1.u_p[i], c1.u_a[i],
                                                          c2.u_p[i], c2.u_a[i]};
                           }));

    RunManifest man;
    man.command = cmdline;
    man.config_json = config_snapshot(g).dump();
    man.outputs = outputs;
    man.duration_s = timer.seconds();
    append_manifest(g.out, man);
    std::cout << "wrote " << outputs.size() << " figure data files under " << g.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acute-inflammation virtual patients with model-free dosing control"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--step", g.step, "integrator/controller step, hours");
    app.add_option("--horizon", g.horizon, "simulation horizon, hours");
    app.add_option("--tau", g.tau, "estimator window, hours");
    app.add_option("--estimator", g.estimator, "algebraic | closedloop");
    app.add_option("--alpha-p", g.alpha_p, "input gain of the N loop");
    app.add_option("--alpha-a", g.alpha_a, "input gain of the Ca loop");
    app.add_option("--kp1", g.kp1, "proportional gain of the N loop");
    app.add_option("--kp2", g.kp2, "proportional gain of the Ca loop");
    app.add_option("--noise", g.noise, "measurement noise amplitude");
    app.add_option("--seed", g.seed, "seed for noise/cohort sampling");
    app.add_option("--jobs", g.jobs, "parallel runs for batch (0 = hardware)");
    app.add_option("--out", g.out, "output directory");

    auto* sim = app.add_subcommand("simulate", "run one patient open or closed loop");
    std::string patient_arg = "patient1", mode_arg = "closed", ref_csv;
    double c1 = 4.0, c2 = 1.0;
    sim->add_option("--patient", patient_arg, "patient1|patient2|reference|healthy-eq or JSON file");
    sim->add_option("--mode", mode_arg, "open | closed")
        ->check(CLI::IsMember({"open", "closed"}));
    sim->add_option("--reference-csv", ref_csv, "pin a previously generated reference");
    sim->add_option("--c1", c1, "N* scaling");
    sim->add_option("--c2", c2, "Ca* scaling");

    auto* refcmd = app.add_subcommand("reference", "generate the reference trajectories");
    double rc1 = 4.0, rc2 = 1.0;
    refcmd->add_option("--c1", rc1, "N* scaling");
    refcmd->add_option("--c2", rc2, "Ca* scaling");

    auto* coh = app.add_subcommand("cohort", "sample a virtual-patient cohort");
    int count = 100;
    std::string ranges_file;
    coh->add_option("--count", count, "number of patients");
    coh->add_option("--ranges", ranges_file, "JSON file overriding sampling ranges");

    auto* figs = app.add_subcommand("figures", "emit plot-ready CSV panels for the named patients");

    auto* batch = app.add_subcommand("batch", "run a cohort file and aggregate outcomes");
    std::string cohort_file, bmode = "closed", bref_csv;
    double bc1 = 4.0, bc2 = 1.0;
    batch->add_option("--cohort", cohort_file, "cohort JSON file")->required();
    batch->add_option("--mode", bmode, "open | closed")->check(CLI::IsMember({"open", "closed"}));
    batch->add_option("--reference-csv", bref_csv, "pin a previously generated reference");
    batch->add_option("--c1", bc1, "N* scaling");
    batch->add_option("--c2", bc2, "Ca* scaling");

    CLI11_PARSE(app, argc, argv);

    const std::string cmdline = join_args(argc, argv);
    try {
        if (sim->parsed()) return cmd_simulate(g, cmdline, patient_arg, mode_arg, ref_csv, c1, c2);
        if (refcmd->parsed()) return cmd_reference(g, cmdline, rc1, rc2);
        if (coh->parsed()) return cmd_cohort(g, cmdline, count, ranges_file);
        if (figs->parsed()) return cmd_figures(g, cmdline);
        if (batch->parsed()) return cmd_batch(g, cmdline, cohort_file, bmode, bref_csv, bc1, bc2);
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
