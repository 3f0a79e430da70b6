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

#include "imfc/harness.hpp"

#include "imfc/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <random>
#include <sstream>

namespace imfc {

void ExperimentConfig::validate() const
{
    patient.validate();
    grid.validate();
    if (!(alpha_p != 0.0) || !(alpha_a != 0.0)) throw DomainError("alpha gains must be nonzero");
    if (!(kp1 > 0) || !(kp2 > 0)) throw DomainError("proportional gains must be positive");
    if (!(tau > 0)) throw DomainError("tau must be positive");
    if (noise_amplitude < 0) throw DomainError("noise amplitude must be nonnegative");
    if (!(tol_zero > 0)) throw DomainError("tol_zero must be positive");
}

namespace {

/// Additive measurement noise on the two sensed channels, one (N, Ca) pair
/// per tick in that order.
class MeasurementNoise {
public:
    MeasurementNoise(double amplitude, std::uint64_t seed) : amp_(amplitude), rng_(seed) {}

    Measurement apply(Measurement m)
    {
        if (amp_ > 0.0) {
            m.n += amp_ * symmetric_unit();
            m.ca += amp_ * symmetric_unit();
        }
        return m;
    }

private:
    double symmetric_unit() { return 2.0 * (static_cast<double>(rng_() >> 11) * 0x1.0p-53) - 1.0; }

    double amp_;
    std::mt19937_64 rng_;
};

/// The controller tick. Takes only the two-channel measurement; the state
/// vector is not visible from here.
std::pair<double, double> controller_tick(IpLoop& loop_n, IpLoop& loop_ca, const Measurement& m,
                                          double n_ref, double n_ref_dot, double ca_ref,
                                          double ca_ref_dot)
{
    const double u_p = loop_n.tick(m.n, n_ref, n_ref_dot);
    const double u_a = loop_ca.tick(m.ca, ca_ref, ca_ref_dot);
    return {u_p, u_a};
}

}  // namespace

SimulationRecord run(const ExperimentConfig& config, const ReferencePair* reference)
{
    config.validate();
    const int n = config.grid.sample_count();
    const double h = config.grid.step_size;

    ReferencePair generated;
    const ReferencePair* ref = reference;
    if (config.mode == Mode::ClosedLoop && ref == nullptr) {
        throw DomainError("closed-loop run requires a reference");
    }
    if (ref && static_cast<int>(ref->times.size()) < n + 1)
        throw DomainError("reference shorter than the simulation horizon");

    SimulationRecord rec;
    rec.ca_rest = config.patient.resting_ca();
    rec.tol_zero = config.tol_zero;
    rec.times.reserve(n + 1);
    rec.states.reserve(n + 1);

    UltraLocalConfig cfg_n{config.alpha_p, config.kp1, config.tau, h, config.estimator};
    UltraLocalConfig cfg_ca{config.alpha_a, config.kp2, config.tau, h, config.estimator};
    IpLoop loop_n(cfg_n), loop_ca(cfg_ca);
    MeasurementNoise noise(config.noise_amplitude, config.noise_seed);

    State s = config.patient.initial;
    rec.times.push_back(0.0);
    rec.states.push_back(s);

    for (int k = 0; k < n; ++k) {
        double u_p = 0.0, u_a = 0.0, f1 = 0.0, f2 = 0.0;
        double n_ref = 0.0, ca_ref = 0.0;
        if (config.mode == Mode::ClosedLoop) {
            n_ref = ref->n_star[k];
            ca_ref = ref->ca_star[k];
            Measurement m = noise.apply({std::max(0.0, s[1]), std::max(0.0, s[3])});
            std::tie(u_p, u_a) = controller_tick(loop_n, loop_ca, m, n_ref, ref->n_star_dot[k],
                                                 ca_ref, ref->ca_star_dot[k]);
            f1 = loop_n.state().f_est;
            f2 = loop_ca.state().f_est;
        }
        rec.u_p.push_back(u_p);
        rec.u_a.push_back(u_a);
        rec.f1.push_back(f1);
        rec.f2.push_back(f2);
        rec.n_ref.push_back(n_ref);
        rec.ca_ref.push_back(ca_ref);

        s = rk4_step(s, config.patient, u_p, u_a, h);
        if (!s.allFinite()) throw IntegrationBlowup((k + 1) * h, "non-finite state");
        rec.times.push_back((k + 1) * h);
        rec.states.push_back(s);
        if (s[2] >= kDeathThreshold) {
            rec.dead_latched = true;
            break;
        }
    }
    // pad the per-step series to the grid length; nothing is applied at the
    // final sample
    const std::size_t m = rec.times.size();
    rec.u_p.resize(m, 0.0);
    rec.u_a.resize(m, 0.0);
    rec.f1.resize(m, 0.0);
    rec.f2.resize(m, 0.0);
    if (config.mode == Mode::ClosedLoop) {
        rec.n_ref.push_back(ref->n_star[m - 1]);
        rec.ca_ref.push_back(ref->ca_star[m - 1]);
    }
    else {
        rec.n_ref.resize(m, 0.0);
        rec.ca_ref.resize(m, 0.0);
    }
    rec.outcome = classify(rec.states.back(), config.tol_zero, config.patient, rec.dead_latched);
    return rec;
}

namespace {

/// First time from which the series stays below tol through the horizon.
std::optional<double> persistent_clearance(const std::vector<double>& t,
                                           const std::vector<double>& v, double tol)
{
    std::size_t i = v.size();
    while (i > 0 && v[i - 1] < tol) --i;
    if (i == v.size()) return std::nullopt;
    return t[i];
}

double support_length(const std::vector<double>& u, double h)
{
    const double peak = u.empty() ? 0.0 : *std::max_element(u.begin(), u.end());
    if (!(peak > 0.0)) return 0.0;
    std::size_t count = 0;
    for (double v : u)
        if (v > 0.01 * peak) ++count;
    return h * static_cast<double>(count);
}

}  // namespace

Summary summarize(const SimulationRecord& rec)
{
    if (rec.times.size() < 2) throw DomainError("summarize: record too short");
    const double h = rec.times[1] - rec.times[0];
    Summary s{};
    s.outcome = rec.outcome;

    std::vector<double> pathogen(rec.states.size());
    double peak_d = 0.0;
    for (std::size_t i = 0; i < rec.states.size(); ++i) {
        pathogen[i] = rec.states[i][0];
        peak_d = std::max(peak_d, rec.states[i][2]);
    }
    s.clearance_time_h = persistent_clearance(rec.times, pathogen, rec.tol_zero);
    s.peak_d = peak_d;

    // doses are zero-order holds; the final padded sample carries none
    double dose_up = 0.0, dose_ua = 0.0;
    for (std::size_t k = 0; k + 1 < rec.times.size(); ++k) {
        dose_up += rec.u_p[k] * h;
        dose_ua += rec.u_a[k] * h;
    }
    s.dose_up = dose_up;
    s.dose_ua = dose_ua;

    const auto peak_index = [](const std::vector<double>& u) {
        return static_cast<std::size_t>(
            std::distance(u.begin(), std::max_element(u.begin(), u.end())));
    };
    s.peak_lag_h = rec.times[peak_index(rec.u_a)] - rec.times[peak_index(rec.u_p)];
    s.support_up_h = support_length(rec.u_p, h);
    s.support_ua_h = support_length(rec.u_a, h);
    return s;
}

void write_record_csv(const SimulationRecord& rec, const std::string& path)
{
    std::ostringstream os;
    os << "t,P,N,D,Ca,up,ua,Nref,Caref,F1,F2\n";
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        const State& x = rec.states[i];
        os << format_double(rec.times[i]) << ',' << format_double(x[0]) << ','
           << format_double(x[1]) << ',' << format_double(x[2]) << ',' << format_double(x[3])
           << ',' << format_double(rec.u_p[i]) << ',' << format_double(rec.u_a[i]) << ','
           << format_double(rec.n_ref[i]) << ',' << format_double(rec.ca_ref[i]) << ','
           << format_double(rec.f1[i]) << ',' << format_double(rec.f2[i]) << '\n';
    }
    write_file(path, os.str());
}

SimulationRecord read_record_csv(const std::string& path)
{
    const std::string text = read_file(path);
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "t,P,N,D,Ca,up,ua,Nref,Caref,F1,F2")
        throw DomainError("record csv " + path + ": bad header");
    SimulationRecord rec;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::array<double, 11> v{};
        std::size_t pos = 0;
        for (int col = 0; col < 11; ++col) {
            const std::size_t next = col == 10 ? line.size() : line.find(',', pos);
            if (next == std::string::npos) throw DomainError("record csv " + path + ": short row");
            v[col] = parse_double(std::string_view(line).substr(pos, next - pos));
            pos = next + 1;
        }
        rec.times.push_back(v[0]);
        rec.states.push_back(State(v[1], v[2], v[3], v[4]));
        rec.u_p.push_back(v[5]);
        rec.u_a.push_back(v[6]);
        rec.n_ref.push_back(v[7]);
        rec.ca_ref.push_back(v[8]);
        rec.f1.push_back(v[9]);
        rec.f2.push_back(v[10]);
    }
    if (rec.times.size() < 2) throw DomainError("record csv " + path + ": too few rows");
    rec.dead_latched = rec.states.back()[2] >= kDeathThreshold;
    // resting level and tolerance are not part of the file format; the
    // defaults apply (s_c and mu_c are never varied across patients)
    rec.ca_rest = 0.125;
    rec.tol_zero = kTolZero;
    const State& last = rec.states.back();
    if (rec.dead_latched)
        rec.outcome = Outcome::Dead;
    else if (last[0] < rec.tol_zero && last[1] < rec.tol_zero && last[2] < rec.tol_zero)
        rec.outcome = Outcome::Healthy;
    else if (last[0] < rec.tol_zero && (last[1] >= rec.tol_zero || last[2] >= rec.tol_zero ||
                                        last[3] >= rec.ca_rest + rec.tol_zero))
        rec.outcome = Outcome::Aseptic;
    else
        rec.outcome = Outcome::Septic;
    return rec;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path)
{
    std::ostringstream os;
    os << "t,P,N,D,Ca,up,ua,Nref,Caref\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const State& x = traj.states[i];
        os << format_double(traj.times[i]) << ',' << format_double(x[0]) << ','
           << format_double(x[1]) << ',' << format_double(x[2]) << ',' << format_double(x[3])
           << ",0,0,0,0\n";
    }
    write_file(path, os.str());
}

std::string summary_to_json(const Summary& s)
{
    nlohmann::ordered_json j;
    j["outcome"] = to_string(s.outcome);
    if (s.clearance_time_h)
        j["clearance_time_h"] = *s.clearance_time_h;
    else
        j["clearance_time_h"] = nullptr;
    j["peak_D"] = s.peak_d;
    j["dose_up"] = s.dose_up;
    j["dose_ua"] = s.dose_ua;
    j["peak_lag_h"] = s.peak_lag_h;
    return j.dump(2) + "\n";
}

Summary summary_from_json(const std::string& text)
{
    const nlohmann::json j = nlohmann::json::parse(text);
    Summary s{};
    const std::string o = j.at("outcome");
    if (o == "healthy") s.outcome = Outcome::Healthy;
    else if (o == "septic") s.outcome = Outcome::Septic;
    else if (o == "aseptic") s.outcome = Outcome::Aseptic;
    else if (o == "dead") s.outcome = Outcome::Dead;
    else throw DomainError("summary: unknown outcome '" + o + "'");
    if (!j.at("clearance_time_h").is_null()) s.clearance_time_h = j.at("clearance_time_h").get<double>();
    s.peak_d = j.at("peak_D");
    s.dose_up = j.at("dose_up");
    s.dose_ua = j.at("dose_ua");
    s.peak_lag_h = j.at("peak_lag_h");
    return s;
}

}  // namespace imfc
