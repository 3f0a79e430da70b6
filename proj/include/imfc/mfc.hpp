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
#include <cstddef>
#include <deque>
#include <stdexcept>
#include <vector>

namespace imfc {

enum class EstimatorKind { Algebraic, ClosedLoop };

inline const char* to_string(EstimatorKind k)
{
    return k == EstimatorKind::Algebraic ? "algebraic" : "closedloop";
}

/// Ultra-local loop configuration: y' = F + alpha*u closed by the
/// intelligent proportional law u = -(F_est - y_ref' + k_p*e)/alpha.
struct UltraLocalConfig {
    double alpha = 2.0;
    double k_p = 0.47;
    double tau = 0.5;              // estimator window length, hours
    double step = 1.0 / 60.0;      // sample spacing, hours
    EstimatorKind estimator = EstimatorKind::Algebraic;

    int window_samples() const { return static_cast<int>(std::llround(tau / step)); }

    void validate() const
    {
        if (alpha == 0.0) throw DomainError("alpha must be nonzero");
        if (!(k_p > 0)) throw DomainError("k_p must be positive");
        if (!(tau > 0) || !(step > 0)) throw DomainError("tau and step must be positive");
        const double w = tau / step;
        if (std::abs(w - std::llround(w)) > 1e-9 * w)
            throw DomainError("tau must be an integer multiple of the step");
    }
};

/// Fixed-capacity window of the last window_samples()+1 controller samples,
/// uniformly spaced at the controller period.
class SignalHistory {
public:
    struct Sample {
        double y;          // measured output
        double u;          // applied (post-clamp) control, held over [t, t+step)
        double y_ref_dot;  // reference derivative at the sample instant
        double e;          // tracking error y - y_ref
    };

    SignalHistory(int window_samples, double step)
        : capacity_(static_cast<std::size_t>(window_samples) + 1), step_(step)
    {
        if (window_samples < 1) throw DomainError("history window needs at least one step");
        if (!(step > 0)) throw DomainError("history step must be positive");
    }

    void push(const Sample& s)
    {
        if (buf_.size() == capacity_) buf_.pop_front();
        buf_.push_back(s);
    }

    bool full() const { return buf_.size() == capacity_; }
    std::size_t size() const { return buf_.size(); }
    std::size_t capacity() const { return capacity_; }
    double step() const { return step_; }
    double span() const { return step_ * static_cast<double>(capacity_ - 1); }
    const Sample& operator[](std::size_t i) const { return buf_[i]; }

private:
    std::deque<Sample> buf_;
    std::size_t capacity_;
    double step_;
};

namespace detail {

/// Quadrature weights for the algebraic window integral over local time
/// sigma in [0, tau]: the y kernel (tau - 2 sigma) is integrated against a
/// piecewise-linear signal model, the u kernel alpha*sigma*(tau - sigma)
/// against the zero-order hold. Per-interval two-point Gauss is exact for
/// the cubic products involved.
struct AlgebraicWeights {
    std::vector<double> wy;
    std::vector<double> wu;
    double tau;

    AlgebraicWeights(int window, double h, double alpha)
        : wy(static_cast<std::size_t>(window) + 1, 0.0),
          wu(static_cast<std::size_t>(window) + 1, 0.0),
          tau(window * h)
    {
        const double g = 0.57735026918962576451;  // 1/sqrt(3)
        for (int i = 0; i < window; ++i) {
            const double a = i * h;
            for (double node : {-g, g}) {
                const double sig = a + 0.5 * h * (1.0 + node);
                const double w = 0.5 * h;
                const double lam = (sig - a) / h;
                const double ky = tau - 2.0 * sig;
                wy[i] += w * ky * (1.0 - lam);
                wy[i + 1] += w * ky * lam;
                wu[i] += w * alpha * sig * (tau - sig);
            }
        }
    }
};

}  // namespace detail

/// Algebraic F estimator: -(6/tau^3) * integral over the trailing window of
/// (tau - 2 sigma) y + alpha sigma (tau - sigma) u, sigma being local window
/// time. Annihilates constant y exactly and returns the slope of a ramp.
inline double estimate_f_algebraic(const SignalHistory& h, double alpha, double tau)
{
    if (!h.full()) throw DomainError("estimate_f_algebraic: window not yet full");
    if (std::abs(h.span() - tau) > 1e-9 * tau)
        throw DomainError("estimate_f_algebraic: tau does not match history span");
    const int window = static_cast<int>(h.capacity()) - 1;
    const detail::AlgebraicWeights w(window, h.step(), alpha);
    double acc = 0.0;
    for (std::size_t i = 0; i < h.capacity(); ++i) acc += w.wy[i] * h[i].y + w.wu[i] * h[i].u;
    return -6.0 / (tau * tau * tau) * acc;
}

/// Closed-loop F estimator: (1/tau) * integral over the trailing window of
/// (y_ref' - alpha u - k_p e), composite trapezoid on the sample grid with
/// the applied control in the u channel.
inline double estimate_f_closedloop(const SignalHistory& h, double alpha, double k_p, double tau)
{
    if (!h.full()) throw DomainError("estimate_f_closedloop: window not yet full");
    if (std::abs(h.span() - tau) > 1e-9 * tau)
        throw DomainError("estimate_f_closedloop: tau does not match history span");
    const std::size_t n = h.capacity();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        acc += w * (h[i].y_ref_dot - alpha * h[i].u - k_p * h[i].e);
    }
    return acc * h.step() / tau;
}

struct ControlOutput {
    double commanded;  // raw iP law value
    double applied;    // clamped to the plant's nonnegative input range
};

/// Intelligent proportional law u = -(F_est - y_ref' + k_p e)/alpha, with
/// the nonnegativity clamp of the dosing inputs.
inline ControlOutput ip_control(double f_est, double y_ref_dot, double e,
                                const UltraLocalConfig& cfg)
{
    cfg.validate();
    if (!std::isfinite(f_est) || !std::isfinite(y_ref_dot) || !std::isfinite(e))
        throw DomainError("ip_control: non-finite input");
    const double commanded = -(f_est - y_ref_dot + cfg.k_p * e) / cfg.alpha;
    return {commanded, commanded > 0.0 ? commanded : 0.0};
}

/// Current loop internals, exposed for logging.
struct LoopState {
    double f_est = 0.0;
    double commanded = 0.0;
    double applied = 0.0;
};

/// One ultra-local control loop. Per tick: estimate F from the samples
/// recorded through the previous tick (zero during warm-up), apply the iP
/// law to the fresh measurement, then record the sample that the estimator
/// will see next tick.
class IpLoop {
public:
    explicit IpLoop(const UltraLocalConfig& cfg)
        : cfg_(cfg), history_(cfg.window_samples(), cfg.step)
    {
        cfg_.validate();
    }

    double tick(double y, double y_ref, double y_ref_dot)
    {
        double f = 0.0;  // warm-up value while the window fills
        if (history_.full()) {
            f = cfg_.estimator == EstimatorKind::Algebraic
                    ? estimate_f_algebraic(history_, cfg_.alpha, cfg_.tau)
                    : estimate_f_closedloop(history_, cfg_.alpha, cfg_.k_p, cfg_.tau);
        }
        const double e = y - y_ref;
        const ControlOutput u = ip_control(f, y_ref_dot, e, cfg_);
        history_.push({y, u.applied, y_ref_dot, e});
        state_ = {f, u.commanded, u.applied};
        return u.applied;
    }

    const LoopState& state() const { return state_; }
    const UltraLocalConfig& config() const { return cfg_; }

private:
    UltraLocalConfig cfg_;
    SignalHistory history_;
    LoopState state_;
};

}  // namespace imfc
