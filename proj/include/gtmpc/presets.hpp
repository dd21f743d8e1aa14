/*
 Copyright 2026 The gtmpc authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef GTMPC_PRESETS_HPP
#define GTMPC_PRESETS_HPP

#include <cmath>
#include <optional>
#include <string>

#include "gtmpc/common.hpp"
#include "gtmpc/constraints.hpp"
#include "gtmpc/costs.hpp"
#include "gtmpc/model.hpp"

namespace gtmpc {

/// A named benchmark system: model, stage cost and constraint sets.
struct Preset {
    std::string name;
    Model model;
    StageCost cost;
    ConstraintSet state_set;
    ConstraintSet input_set;
    std::optional<ContinuousModel> continuous;
    double sample_time = 0.0;  // 0 when the model is natively discrete-time
};

/// Norm regulation cost ||x||_2 + ||u||_2. Nonsmooth at the origin; the
/// solver sees the regularized form sqrt(s^2 + mu^2) - mu with mu = 1e-8,
/// whose error is bounded by mu per norm term.
inline StageCost make_norm_cost(int n, int m) {
    auto cost = StageCost::analytic(
        n, m, "lq-norm",
        [](const Vec& x, const Vec& u) { return x.norm() + u.norm(); },
        [](const Vec& x, const Vec& u) {
            auto dir = [](const Vec& v) {
                const double nv = v.norm();
                return nv > 0.0 ? Vec(v / nv) : Vec(Vec::Zero(v.size()));
            };
            return std::make_pair(dir(x), dir(u));
        });
    constexpr double mu = 1e-8;
    cost.set_solver_surrogate(
        [](const Vec& x, const Vec& u) {
            return std::sqrt(x.squaredNorm() + mu * mu) - mu +
                   std::sqrt(u.squaredNorm() + mu * mu) - mu;
        },
        [](const Vec& x, const Vec& u) {
            return std::make_pair(Vec(x / std::sqrt(x.squaredNorm() + mu * mu)),
                                  Vec(u / std::sqrt(u.squaredNorm() + mu * mu)));
        });
    cost.set_gradient_norm_bound(std::sqrt(2.0));
    return cost;
}

/// Isothermal CSTR economic cost 30 - (2 u x2 - u/2).
inline StageCost make_cstr_cost() {
    return StageCost::analytic(
        2, 1, "cstr-econ",
        [](const Vec& x, const Vec& u) { return 30.0 - (2.0 * u[0] * x[1] - 0.5 * u[0]); },
        [](const Vec& x, const Vec& u) {
            Vec gx(2), gu(1);
            gx << 0.0, -2.0 * u[0];
            gu << -2.0 * x[1] + 0.5;
            return std::make_pair(gx, gu);
        });
}

/// Pendulum swing-up cost 225 sin^2(x1/2) + x2^2 + u^2. The sin(x1/2) term
/// makes the cost 2*pi-periodic in the (unwrapped) angle.
inline StageCost make_pendulum_cost() {
    return StageCost::analytic(
        2, 1, "pendulum",
        [](const Vec& x, const Vec& u) {
            const double s = std::sin(0.5 * x[0]);
            return 225.0 * s * s + x[1] * x[1] + u[0] * u[0];
        },
        [](const Vec& x, const Vec& u) {
            Vec gx(2), gu(1);
            gx << 112.5 * std::sin(x[0]), 2.0 * x[1];
            gu << 2.0 * u[0];
            return std::make_pair(gx, gu);
        });
}

/// Continuous CSTR model. The product balance uses (c_Df - x2); the steady
/// state (0.5, 0.5) at u = 12 is an exact equilibrium of this form. The
/// rate constant is 1.2 1/min (first-order reaction).
inline ContinuousModel make_cstr_continuous() {
    constexpr double v_r = 10.0;   // reactor volume [l]
    constexpr double c_cf = 1.0;   // feed concentration of C [mol/l]
    constexpr double c_df = 0.0;   // feed concentration of D [mol/l]
    constexpr double k_r = 1.2;    // rate constant [1/min]
    ContinuousModel cm;
    cm.n = 2;
    cm.m = 1;
    cm.rhs = [=](const Vec& x, const Vec& u) {
        Vec dx(2);
        dx[0] = (u[0] / v_r) * (c_cf - x[0]) - k_r * x[0];
        dx[1] = (u[0] / v_r) * (c_df - x[1]) + k_r * x[0];
        return dx;
    };
    return cm;
}

inline ContinuousModel make_pendulum_continuous() {
    ContinuousModel cm;
    cm.n = 2;
    cm.m = 1;
    cm.rhs = [](const Vec& x, const Vec& u) {
        Vec dx(2);
        dx[0] = x[1];
        dx[1] = std::sin(x[0]) - u[0] * std::cos(x[0]);
        return dx;
    };
    return cm;
}

/// Builds one of the named presets:
///   "lq-double-integrator"  planar linear system, norm cost, boxes 10 / 2
///   "cstr"                  economic CSTR, RK4 discretization, T_s = 0.5 min
///   "pendulum"              swing-up model, forward Euler, T_s = 0.05 s
inline Preset make_preset(const std::string& name) {
    if (name == "lq-double-integrator") {
        Mat A(2, 2), B(2, 2);
        A << 1, 1, 0, 1;
        B << 1, -1, -1, 1;
        return Preset{name,
                      Model::linear(A, B),
                      make_norm_cost(2, 2),
                      ConstraintSet::inf_box(2, 10.0),
                      ConstraintSet::inf_box(2, 2.0),
                      std::nullopt,
                      0.0};
    }
    if (name == "cstr") {
        ContinuousModel cm = make_cstr_continuous();
        const double t_s = 0.5;
        Model md = discretize(cm, t_s, DiscretizeMethod::Rk4, 4);
        Vec xlo(2), xhi(2), ulo(1), uhi(1);
        xlo << 0.0, 0.0;
        xhi << 1.0, 1.0;
        ulo << 0.0;
        uhi << 20.0;
        return Preset{name,
                      md,
                      make_cstr_cost(),
                      ConstraintSet::box(xlo, xhi),
                      ConstraintSet::box(ulo, uhi),
                      cm,
                      t_s};
    }
    if (name == "pendulum") {
        ContinuousModel cm = make_pendulum_continuous();
        const double t_s = 0.05;
        Model md = discretize(cm, t_s, DiscretizeMethod::ForwardEuler);
        Vec ulo(1), uhi(1);
        ulo << -0.5;
        uhi << 0.5;
        // The strict paper bound |u| < 0.5 is realized as the closed set
        // |u| <= 0.5 for solver well-posedness.
        return Preset{name,
                      md,
                      make_pendulum_cost(),
                      ConstraintSet::unbounded(2),
                      ConstraintSet::box(ulo, uhi),
                      cm,
                      t_s};
    }
    throw std::invalid_argument("unknown preset: " + name);
}

}  // namespace gtmpc

#endif  // GTMPC_PRESETS_HPP
