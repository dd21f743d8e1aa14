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
#ifndef GTMPC_MODEL_HPP
#define GTMPC_MODEL_HPP

#include <functional>
#include <utility>
#include <vector>

#include "gtmpc/common.hpp"

namespace gtmpc {

/// Discrete-time system model x(t+1) = f(x(t), u(t)).
///
/// Linear models keep their (A, B) matrices so that Jacobians are exact;
/// nonlinear models wrap an analytic state-transition map.
class Model {
public:
    enum class Kind { Linear, Nonlinear };

    using StepFn = std::function<Vec(const Vec&, const Vec&)>;

    static Model linear(Mat A, Mat B) {
        if (A.rows() != A.cols() || A.rows() != B.rows()) {
            throw std::invalid_argument("Model::linear: inconsistent A/B shapes");
        }
        Model md;
        md.n_ = static_cast<int>(A.rows());
        md.m_ = static_cast<int>(B.cols());
        md.kind_ = Kind::Linear;
        md.A_ = std::move(A);
        md.B_ = std::move(B);
        return md;
    }

    static Model nonlinear(int n, int m, StepFn f) {
        Model md;
        md.n_ = n;
        md.m_ = m;
        md.kind_ = Kind::Nonlinear;
        md.f_ = std::move(f);
        return md;
    }

    int n() const { return n_; }
    int m() const { return m_; }
    Kind kind() const { return kind_; }
    const Mat& A() const { return A_; }
    const Mat& B() const { return B_; }

    Vec step(const Vec& x, const Vec& u) const {
        check_dim(x, n_, "Model::step x");
        check_dim(u, m_, "Model::step u");
        if (kind_ == Kind::Linear) return A_ * x + B_ * u;
        Vec next = f_(x, u);
        check_dim(next, n_, "Model::step output");
        return next;
    }

private:
    int n_ = 0;
    int m_ = 0;
    Kind kind_ = Kind::Linear;
    Mat A_, B_;
    StepFn f_;
};

/// Continuous-time model dx/dt = rhs(x, u), to be discretized before use.
struct ContinuousModel {
    int n = 0;
    int m = 0;
    std::function<Vec(const Vec&, const Vec&)> rhs;
};

/// A rolled-out state/input sequence. For the fixed-terminal problem the
/// input list has one entry per transition; the generalized problem carries
/// one extra terminal input.
struct Trajectory {
    std::vector<Vec> states;
    std::vector<Vec> inputs;
};

inline Trajectory rollout(const Model& model, const Vec& x0,
                          const std::vector<Vec>& inputs) {
    check_dim(x0, model.n(), "rollout x0");
    Trajectory traj;
    traj.states.reserve(inputs.size() + 1);
    traj.states.push_back(x0);
    // Transitions consume at most the first N inputs; a trailing terminal
    // input (generalized problem) is carried along without being applied.
    for (const Vec& u : inputs) {
        traj.states.push_back(model.step(traj.states.back(), u));
    }
    traj.inputs = inputs;
    return traj;
}

enum class DiscretizeMethod { ForwardEuler, Rk4 };

/// Turns a continuous model into a discrete one advancing by T_s per step.
/// Rk4 splits the sampling interval into `substeps` classical RK4 stages.
inline Model discretize(const ContinuousModel& cm, double t_s,
                        DiscretizeMethod method, int substeps = 1) {
    if (!(t_s > 0.0)) throw std::invalid_argument("discretize: T_s must be positive");
    if (substeps < 1) throw std::invalid_argument("discretize: substeps must be >= 1");
    auto rhs = cm.rhs;
    if (method == DiscretizeMethod::ForwardEuler) {
        return Model::nonlinear(cm.n, cm.m, [rhs, t_s](const Vec& x, const Vec& u) {
            return (x + t_s * rhs(x, u)).eval();
        });
    }
    const double h = t_s / substeps;
    return Model::nonlinear(cm.n, cm.m, [rhs, h, substeps](const Vec& x, const Vec& u) {
        Vec xk = x;
        for (int s = 0; s < substeps; ++s) {
            Vec k1 = rhs(xk, u);
            Vec k2 = rhs(xk + 0.5 * h * k1, u);
            Vec k3 = rhs(xk + 0.5 * h * k2, u);
            Vec k4 = rhs(xk + h * k3, u);
            xk += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return xk;
    });
}

/// State and input Jacobians (df/dx, df/du) at (x, u). Exact for linear
/// models; central finite differences with per-component step
/// h = 1e-6 * max(1, |component|) otherwise.
inline std::pair<Mat, Mat> jacobians(const Model& model, const Vec& x, const Vec& u) {
    check_dim(x, model.n(), "jacobians x");
    check_dim(u, model.m(), "jacobians u");
    if (model.kind() == Model::Kind::Linear) return {model.A(), model.B()};

    const int n = model.n();
    const int m = model.m();
    Mat fx(n, n), fu(n, m);
    Vec xp = x, xm = x, up = u, um = u;
    for (int i = 0; i < n; ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        fx.col(i) = (model.step(xp, u) - model.step(xm, u)) / (2.0 * h);
        xp[i] = x[i];
        xm[i] = x[i];
    }
    for (int i = 0; i < m; ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(u[i]));
        up[i] = u[i] + h;
        um[i] = u[i] - h;
        fu.col(i) = (model.step(x, up) - model.step(x, um)) / (2.0 * h);
        up[i] = u[i];
        um[i] = u[i];
    }
    return {fx, fu};
}

}  // namespace gtmpc

#endif  // GTMPC_MODEL_HPP
