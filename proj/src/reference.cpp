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

#include "imfc/reference.hpp"

#include "imfc/io.hpp"

#include <sstream>

namespace imfc {

Trajectory generate_free_response(const PatientParameters& healthy, const IntegratorConfig& config,
                                  double tol_zero)
{
    // verify health over at least the standard horizon even when the run
    // itself is shorter; a mid-episode snapshot would classify aseptic
    IntegratorConfig extended = config;
    extended.horizon = std::max(config.horizon, 500.0);
    Trajectory traj = integrate(healthy.initial, healthy, extended);
    const Outcome o = classify(traj.states.back(), tol_zero, healthy, traj.died());
    if (o != Outcome::Healthy)
        throw InvalidReferencePatient(std::string("reference patient open loop is ") + to_string(o));
    const std::size_t want = static_cast<std::size_t>(config.sample_count()) + 1;
    if (traj.size() > want) {
        traj.times.resize(want);
        traj.states.resize(want);
    }
    return traj;
}

namespace {

std::vector<double> grid_derivative(const std::vector<double>& y, double h)
{
    const std::size_t n = y.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    d[0] = (y[1] - y[0]) / h;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
    d[n - 1] = (y[n - 1] - y[n - 2]) / h;
    return d;
}

}  // namespace

ReferencePair scale_reference(const Trajectory& free, double c1, double c2, double ca_rest)
{
    if (c1 < 0 || c2 < 0) throw DomainError("reference scaling constants must be nonnegative");
    if (free.size() < 2) throw DomainError("free trajectory too short");
    ReferencePair ref;
    ref.c1 = c1;
    ref.c2 = c2;
    ref.ca_rest = ca_rest;
    ref.times = free.times;
    const std::size_t n = free.size();
    ref.n_star.resize(n);
    ref.ca_star.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ref.n_star[i] = c1 * free.states[i][1];
        ref.ca_star[i] = (free.states[i][3] - ca_rest) * c2 + ca_rest;
    }
    const double h = free.times[1] - free.times[0];
    ref.n_star_dot = grid_derivative(ref.n_star, h);
    ref.ca_star_dot = grid_derivative(ref.ca_star, h);
    return ref;
}

void write_reference_csv(const ReferencePair& ref, const std::string& path)
{
    std::ostringstream os;
    os << "t,Nref,Caref,Nref_dot,Caref_dot\n";
    for (std::size_t i = 0; i < ref.times.size(); ++i) {
        os << format_double(ref.times[i]) << ',' << format_double(ref.n_star[i]) << ','
           << format_double(ref.ca_star[i]) << ',' << format_double(ref.n_star_dot[i]) << ','
           << format_double(ref.ca_star_dot[i]) << '\n';
    }
    write_file(path, os.str());
}

ReferencePair read_reference_csv(const std::string& path)
{
    const std::string text = read_file(path);
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "t,Nref,Caref,Nref_dot,Caref_dot")
        throw DomainError("reference csv " + path + ": bad header");
    ReferencePair ref;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::array<double, 5> v{};
        std::size_t pos = 0;
        for (int col = 0; col < 5; ++col) {
            const std::size_t next = col == 4 ? line.size() : line.find(',', pos);
            if (next == std::string::npos) throw DomainError("reference csv " + path + ": short row");
            v[col] = parse_double(std::string_view(line).substr(pos, next - pos));
            pos = next + 1;
        }
        ref.times.push_back(v[0]);
        ref.n_star.push_back(v[1]);
        ref.ca_star.push_back(v[2]);
        ref.n_star_dot.push_back(v[3]);
        ref.ca_star_dot.push_back(v[4]);
    }
    if (ref.times.size() < 2) throw DomainError("reference csv " + path + ": too few rows");
    return ref;
}

}  // namespace imfc
