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
#ifndef GTMPC_COSTS_HPP
#define GTMPC_COSTS_HPP

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "gtmpc/common.hpp"
#include "gtmpc/model.hpp"

namespace gtmpc {

/// Stage cost l(x, u).
///
/// `eval` reports the true value; `solver_eval`, when set, is a smooth
/// surrogate used only inside the optimizer (e.g. regularized norms).
/// Gradients fall back to central finite differences when not supplied.
class StageCost {
public:
    using EvalFn = std::function<double(const Vec&, const Vec&)>;
    using GradFn = std::function<std::pair<Vec, Vec>(const Vec&, const Vec&)>;

    enum class Kind { QuadraticTracking, Analytic };

    static StageCost quadratic_tracking(Mat Q, Mat R, Vec x_s, Vec u_s) {
        const int n = static_cast<int>(x_s.size());
        const int m = static_cast<int>(u_s.size());
        if (Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m) {
            throw std::invalid_argument("quadratic_tracking: weight shape mismatch");
        }
        StageCost c;
        c.kind_ = Kind::QuadraticTracking;
        c.name_ = "tracking";
        c.n_ = n;
        c.m_ = m;
        c.eval_ = [Q, R, x_s, u_s](const Vec& x, const Vec& u) {
            const Vec dx = x - x_s;
            const Vec du = u - u_s;
            return dx.dot(Q * dx) + du.dot(R * du);
        };
        c.grad_ = [Q, R, x_s, u_s](const Vec& x, const Vec& u) {
            return std::make_pair(Vec(2.0 * (Q * (x - x_s))), Vec(2.0 * (R * (u - u_s))));
        };
        return c;
    }

    static StageCost analytic(int n, int m, std::string name, EvalFn eval,
                              GradFn grad = nullptr) {
        StageCost c;
        c.kind_ = Kind::Analytic;
        c.name_ = std::move(name);
        c.n_ = n;
        c.m_ = m;
        c.eval_ = std::move(eval);
        c.grad_ = std::move(grad);
        return c;
    }

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    int n() const { return n_; }
    int m() const { return m_; }

    double eval(const Vec& x, const Vec& u) const {
        check_dim(x, n_, "StageCost::eval x");
        check_dim(u, m_, "StageCost::eval u");
        return eval_(x, u);
    }

    std::pair<Vec, Vec> grad(const Vec& x, const Vec& u) const {
        if (grad_) return grad_(x, u);
        return fd_grad(eval_, x, u);
    }

    /// Value seen by the optimizer (smoothed surrogate if present).
    double solver_eval(const Vec& x, const Vec& u) const {
        return solver_eval_ ? solver_eval_(x, u) : eval(x, u);
    }

    std::pair<Vec, Vec> solver_grad(const Vec& x, const Vec& u) const {
        if (solver_grad_) return solver_grad_(x, u);
        if (solver_eval_) return fd_grad(solver_eval_, x, u);
        return grad(x, u);
    }

    void set_solver_surrogate(EvalFn eval, GradFn grad) {
        solver_eval_ = std::move(eval);
        solver_grad_ = std::move(grad);
    }

    /// Global bound on the gradient norm, when one exists (analysis gains).
    std::optional<double> gradient_norm_bound() const { return grad_bound_; }
    void set_gradient_norm_bound(double b) { grad_bound_ = b; }

private:
    static std::pair<Vec, Vec> fd_grad(const EvalFn& f, const Vec& x, const Vec& u) {
        Vec gx(x.size()), gu(u.size());
        Vec xp = x, xm = x, up = u, um = u;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
            xp[i] = x[i] + h;
            xm[i] = x[i] - h;
            gx[i] = (f(xp, u) - f(xm, u)) / (2.0 * h);
            xp[i] = x[i];
            xm[i] = x[i];
        }
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            const double h = 1e-6 * std::max(1.0, std::abs(u[i]));
            up[i] = u[i] + h;
            um[i] = u[i] - h;
            gu[i] = (f(x, up) - f(x, um)) / (2.0 * h);
            up[i] = u[i];
            um[i] = u[i];
        }
        return {gx, gu};
    }

    Kind kind_ = Kind::Analytic;
    std::string name_;
    int n_ = 0;
    int m_ = 0;
    EvalFn eval_;
    GradFn grad_;
    EvalFn solver_eval_;
    GradFn solver_grad_;
    std::optional<double> grad_bound_;
};

/// Horizon length and terminal stage weight of the generalized cost.
struct HorizonWeights {
    int N = 1;
    double beta = 0.0;

    HorizonWeights(int horizon, double terminal_weight)
        : N(horizon), beta(terminal_weight) {
        if (N < 1) throw std::invalid_argument("HorizonWeights: N must be >= 1");
        if (beta < 0.0) throw std::invalid_argument("HorizonWeights: beta must be >= 0");
    }
};

/// Running cost of the fixed-terminal problem: sum of the N stage terms.
/// The terminal state enters no cost term.
inline double horizon_cost_s(const StageCost& l, const Trajectory& traj) {
    if (traj.states.size() != traj.inputs.size() + 1) {
        throw std::invalid_argument("horizon_cost_s: need N inputs and N+1 states");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < traj.inputs.size(); ++j) {
        total += l.eval(traj.states[j], traj.inputs[j]);
    }
    return total;
}

/// Generalized cost: N running terms plus beta times the terminal stage
/// term l(x(N), v(N)).
inline double horizon_cost_gen(const StageCost& l, const HorizonWeights& w,
                               const Trajectory& traj) {
    const std::size_t N = static_cast<std::size_t>(w.N);
    if (traj.inputs.size() != N + 1 || traj.states.size() != N + 1) {
        throw std::invalid_argument("horizon_cost_gen: need N+1 inputs and N+1 states");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        total += l.eval(traj.states[j], traj.inputs[j]);
    }
    total += w.beta * l.eval(traj.states[N], traj.inputs[N]);
    return total;
}

}  // namespace gtmpc

#endif  // GTMPC_COSTS_HPP
