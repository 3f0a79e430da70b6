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

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace imfc {

/// Four-state vector (P, N, D, Ca): pathogen, activated phagocytes,
/// tissue damage, anti-inflammatory mediator. Nondimensional units.
template <typename Scalar>
using State4 = Eigen::Matrix<Scalar, 4, 1>;

using State = State4<double>;

enum class Outcome { Healthy, Septic, Aseptic, Dead };

inline const char* to_string(Outcome o)
{
    switch (o) {
        case Outcome::Healthy: return "healthy";
        case Outcome::Septic: return "septic";
        case Outcome::Aseptic: return "aseptic";
        case Outcome::Dead: return "dead";
    }
    return "unknown";
}

class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Rate and saturation constants of the four-ODE acute-inflammation model,
/// plus the initial state of the virtual patient they describe.
template <typename Scalar>
struct PatientParams {
    Scalar k_pg, k_pm, s_m, mu_m, k_mp, k_pn, p_inf;
    Scalar s_nr, mu_nr, mu_n, k_np, k_nn, k_nd;
    Scalar k_dn, x_dn, mu_d;
    Scalar s_c, k_cn, k_cnd, mu_c, c_inf;
    State4<Scalar> initial = State4<Scalar>::Zero();

    Scalar resting_ca() const { return s_c / mu_c; }

    void validate() const
    {
        const Scalar vals[] = {k_pg, k_pm, s_m,  mu_m, k_mp, k_pn, p_inf, s_nr, mu_nr, mu_n, k_np,
                               k_nn, k_nd, k_dn, x_dn, mu_d, s_c,  k_cn,  k_cnd, mu_c,  c_inf};
        for (Scalar v : vals) {
            if (!(v >= Scalar(0)) || !std::isfinite(double(v)))
                throw DomainError("patient parameter negative or non-finite");
        }
        if (!(p_inf > Scalar(0)) || !(mu_c > Scalar(0)) || !(c_inf > Scalar(0)) || !(x_dn > Scalar(0)))
            throw DomainError("p_inf, mu_c, c_inf and x_dn must be positive");
        for (int i = 0; i < 4; ++i) {
            if (!(initial[i] >= Scalar(0)))
                throw DomainError("initial state component negative");
        }
    }
};

using PatientParameters = PatientParams<double>;

/// Hill-type inhibition f(x) = x / (1 + (Ca/c_inf)^2). Monotone increasing
/// in x, decreasing in ca.
template <typename Scalar>
Scalar hill_f(Scalar x, Scalar ca, Scalar c_inf)
{
    if (!(c_inf > Scalar(0))) throw DomainError("hill_f: c_inf must be positive");
    if (x < Scalar(0) || ca < Scalar(0)) throw DomainError("hill_f: negative input");
    const Scalar r = ca / c_inf;
    return x / (Scalar(1) + r * r);
}

/// Time derivatives of (P, N, D, Ca) with the dosing inputs u_p (added to
/// dN/dt) and u_a (added to dCa/dt) held constant.
template <typename Scalar>
State4<Scalar> rhs(const State4<Scalar>& s, const PatientParams<Scalar>& p, Scalar u_p, Scalar u_a)
{
    if (u_p < Scalar(0) || u_a < Scalar(0)) throw DomainError("rhs: negative control");
    for (int i = 0; i < 4; ++i)
        if (s[i] < Scalar(0)) throw DomainError("rhs: negative state component");

    const Scalar P = s[0], N = s[1], D = s[2], Ca = s[3];
    const Scalar fN = hill_f(N, Ca, p.c_inf);
    const Scalar r_arg = p.k_np * P + p.k_nn * N + p.k_nd * D;
    const Scalar R = hill_f(r_arg, Ca, p.c_inf);

    State4<Scalar> d;
    d[0] = p.k_pg * P * (Scalar(1) - P / p.p_inf) - p.k_pm * p.s_m * P / (p.mu_m + p.k_mp * P) -
           p.k_pn * fN * P;
    d[1] = p.s_nr * R / (p.mu_nr + R) - p.mu_n * N + u_p;
    const Scalar f6 = fN * fN * fN * fN * fN * fN;
    const Scalar x6 = p.x_dn * p.x_dn * p.x_dn * p.x_dn * p.x_dn * p.x_dn;
    d[2] = p.k_dn * f6 / (x6 + f6) - p.mu_d * D;
    const Scalar f2 = hill_f(N + p.k_cnd * D, Ca, p.c_inf);
    d[3] = p.s_c + p.k_cn * f2 / (Scalar(1) + f2) - p.mu_c * Ca + u_a;
    return d;
}

/// Tissue-damage level at and above which the patient counts as dead.
inline constexpr double kDeathThreshold = 17.0;

/// Classify a state. `dead_latched` marks that D >= 17 was seen earlier in
/// the run; death is irreversible. Otherwise: Healthy when P, N, D are all
/// below tol_zero; Aseptic when the pathogen is gone but N, D or Ca stay
/// elevated (Ca measured against the resting level s_c/mu_c); Septic when
/// the pathogen persists.
template <typename Scalar>
Outcome classify(const State4<Scalar>& s, Scalar tol_zero, const PatientParams<Scalar>& p,
                 bool dead_latched = false)
{
    if (!(tol_zero > Scalar(0))) throw DomainError("classify: tol_zero must be positive");
    if (dead_latched || s[2] >= Scalar(kDeathThreshold)) return Outcome::Dead;
    const Scalar ca_rest = p.resting_ca();
    if (s[0] < tol_zero && s[1] < tol_zero && s[2] < tol_zero) return Outcome::Healthy;
    if (s[0] < tol_zero &&
        (s[1] >= tol_zero || s[2] >= tol_zero || s[3] >= ca_rest + tol_zero))
        return Outcome::Aseptic;
    return Outcome::Septic;
}

/// Default zero tolerance for outcome classification, in model units.
inline constexpr double kTolZero = 1e-3;

}  // namespace imfc
