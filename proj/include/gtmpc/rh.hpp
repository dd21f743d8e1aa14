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
#ifndef GTMPC_RH_HPP
#define GTMPC_RH_HPP

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gtmpc/common.hpp"
#include "gtmpc/constraints.hpp"
#include "gtmpc/costs.hpp"
#include "gtmpc/model.hpp"
#include "gtmpc/ocp.hpp"

namespace gtmpc {

/// Receding horizon with the fixed terminal constraint x(N|t) = x_s.
struct Alg1 {};

/// Receding horizon with the generalized terminal constraint.
struct Alg2 {};

/// Generalized variant with the tail-override step; requires 2 eps <= eps_bar.
struct Alg3 {
    double eps = 1e-3;
    double eps_bar = 2e-3;
};

using RhVariant = std::variant<Alg1, Alg2, Alg3>;

inline std::string variant_name(const RhVariant& v) {
    if (std::holds_alternative<Alg1>(v)) return "alg1";
    if (std::holds_alternative<Alg2>(v)) return "alg2";
    return "alg3";
}

/// One row of a closed-loop trace.
struct StepRecord {
    int t = 0;
    Vec x;
    Vec u;
    double l_bar = 0.0;
    Vec terminal_state;
    Vec terminal_input;
    double terminal_cost = 0.0;  // l(x*(N|t), v*(N|t))
    double j_star = 0.0;
    double stage_cost = 0.0;  // l(x(t), u(t))
    double terminal_residual = 0.0;
    bool override_fired = false;
    NlpStatus status = NlpStatus::Optimal;
};

struct SimTrace {
    std::vector<StepRecord> records;
    std::string variant;
    int n = 0;
    int m = 0;
    int N = 0;
    double beta = 0.0;
    double eps = 0.0;
    FixedPoint optimal_fixed_point;
    double j_star0 = 0.0;
};

/// Dynamic controller implementing one of the three receding-horizon
/// strategies. Owns its memory (bound, previous solution); one instance
/// drives one closed loop.
class Controller {
public:
    struct Options {
        OcpOptions ocp;
    };

    static Controller init(const RhVariant& variant, const Model& model, const StageCost& l,
                           const ConstraintSet& X, const ConstraintSet& U, int N, double beta,
                           const Vec& x0, const Options& options = {}) {
        if (const Alg3* a3 = std::get_if<Alg3>(&variant)) {
            if (!(2.0 * a3->eps <= a3->eps_bar)) {
                throw std::invalid_argument("alg3 requires 2*eps <= eps_bar");
            }
        }
        Controller c(variant, model, l, X, U, N, beta, options);
        // The optimal fixed point: the terminal target for alg1, the
        // reference value l(x_s, u_s) for the alg3 override test, and a
        // steering hint for the cold-start solve otherwise.
        c.sstar_ = solve_optimal_fixed_point(model, l, X, U, std::nullopt, options.ocp);

        StepRecord rec;
        rec.t = 0;
        rec.x = x0;
        if (std::holds_alternative<Alg1>(variant)) {
            OcpOptions opt = options.ocp;
            opt.target_hint = c.sstar_.x;
            OcpSolution sol =
                solve_ps(model, l, X, U, N, c.sstar_.x, x0, nullptr, opt);
            if (!sol.feasible()) {
                throw InfeasibleError("initial state infeasible for P^s");
            }
            c.last_inputs_ = sol.inputs;
            c.last_terminal_ = {c.sstar_.x, c.sstar_.u};
            c.l_bar_ = c.sstar_.stage_value;
            rec.status = sol.status;
            rec.j_star = sol.objective;
            rec.terminal_residual = (model.step(c.sstar_.x, c.sstar_.u) - c.sstar_.x)
                                        .lpNorm<Eigen::Infinity>();
        } else {
            OcpOptions opt = options.ocp;
            opt.target_hint = c.sstar_.x;
            OcpSolution sol = solve_p(model, l, X, U, N, beta, kInf, x0, nullptr, opt);
            if (!sol.feasible()) {
                throw InfeasibleError("initial state infeasible for P");
            }
            c.last_inputs_ = sol.inputs;
            c.last_terminal_ = {sol.terminal_state, sol.terminal_input};
            // l_bar(0): the achieved terminal stage cost; any bound for
            // which the problem is feasible is admissible.
            c.l_bar_ = l.eval(sol.terminal_state, sol.terminal_input);
            rec.status = sol.status;
            rec.j_star = sol.objective;
            rec.terminal_residual = sol.terminal_residual;
        }
        rec.u = c.last_inputs_.front();
        rec.l_bar = c.l_bar_;
        rec.terminal_state = c.last_terminal_.first;
        rec.terminal_input = c.last_terminal_.second;
        rec.terminal_cost = l.eval(rec.terminal_state, rec.terminal_input);
        rec.stage_cost = l.eval(x0, rec.u);
        c.t_ = 1;
        c.last_record_ = rec;
        return c;
    }

    /// One receding-horizon iteration: bound update, warm-started solve,
    /// override test (alg3), first input out.
    std::pair<Vec, StepRecord> step(const Vec& x_t) {
        check_dim(x_t, model_.n(), "Controller::step x_t");
        StepRecord rec;
        rec.t = t_;
        rec.x = x_t;

        l_bar_ = cost_.eval(last_terminal_.first, last_terminal_.second);
        rec.l_bar = l_bar_;

        std::vector<Vec> warm = shifted_warm_start();
        if (std::holds_alternative<Alg1>(variant_)) {
            OcpSolution sol = solve_ps(model_, cost_, X_, U_, N_, sstar_.x, x_t, &warm,
                                       options_.ocp);
            if (!sol.feasible()) {
                throw SolverFailure("recursive feasibility violated at t=" + std::to_string(t_) +
                                    " (P^s, status " + to_string(sol.status) + ")");
            }
            last_inputs_ = sol.inputs;
            rec.status = sol.status;
            rec.j_star = sol.objective;
            rec.terminal_state = sstar_.x;
            rec.terminal_input = sstar_.u;
            rec.terminal_cost = sstar_.stage_value;
            rec.terminal_residual = sstar_.residual;
        } else {
            OcpSolution sol = solve_p(model_, cost_, X_, U_, N_, beta_, l_bar_, x_t, &warm,
                                      options_.ocp);
            if (!sol.feasible()) {
                throw SolverFailure("recursive feasibility violated at t=" + std::to_string(t_) +
                                    " (P, status " + to_string(sol.status) + ")");
            }
            double term_cost = cost_.eval(sol.terminal_state, sol.terminal_input);
            bool fired = false;
            if (const Alg3* a3 = std::get_if<Alg3>(&variant_)) {
                // Strict comparisons with a 1e-9 margin for determinism.
                const bool worse_than_bound = term_cost > l_bar_ - a3->eps + 1e-9;
                const bool worse_than_opt = term_cost > sstar_.stage_value + a3->eps + 1e-9;
                if (worse_than_bound && worse_than_opt) {
                    fired = true;
                    // Retain the shifted previous solution; its terminal pair
                    // is the previously computed one.
                    last_inputs_ = warm;
                    std::vector<Vec> states(static_cast<std::size_t>(N_) + 1);
                    states[0] = x_t;
                    for (int j = 0; j < N_; ++j) {
                        states[j + 1] = model_.step(states[j], warm[j]);
                    }
                    Trajectory traj{states, warm};
                    rec.j_star = horizon_cost_gen(cost_, HorizonWeights(N_, beta_), traj);
                    rec.terminal_state = last_terminal_.first;
                    rec.terminal_input = last_terminal_.second;
                    rec.terminal_cost =
                        cost_.eval(last_terminal_.first, last_terminal_.second);
                    rec.terminal_residual =
                        (states[N_] - model_.step(states[N_], warm[N_]))
                            .lpNorm<Eigen::Infinity>();
                    rec.status = sol.status;
                }
            }
            if (!fired) {
                last_inputs_ = sol.inputs;
                last_terminal_ = {sol.terminal_state, sol.terminal_input};
                rec.status = sol.status;
                rec.j_star = sol.objective;
                rec.terminal_state = sol.terminal_state;
                rec.terminal_input = sol.terminal_input;
                rec.terminal_cost = term_cost;
                rec.terminal_residual = sol.terminal_residual;
            }
            rec.override_fired = fired;
        }

        rec.u = last_inputs_.front();
        rec.stage_cost = cost_.eval(x_t, rec.u);
        ++t_;
        last_record_ = rec;
        return {rec.u, rec};
    }

    const FixedPoint& optimal_fixed_point() const { return sstar_; }
    const StepRecord& last_record() const { return last_record_; }
    int t() const { return t_; }
    double l_bar() const { return l_bar_; }

private:
    Controller(const RhVariant& variant, const Model& model, const StageCost& l,
               const ConstraintSet& X, const ConstraintSet& U, int N, double beta,
               const Options& options)
        : variant_(variant),
          model_(model),
          cost_(l),
          X_(X),
          U_(U),
          N_(N),
          beta_(beta),
          options_(options) {}

    /// Tail of the previous solution: inputs shifted by one, last entry
    /// repeated (alg2/3) or replaced by u_s (alg1).
    std::vector<Vec> shifted_warm_start() const {
        std::vector<Vec> warm(last_inputs_.begin() + 1, last_inputs_.end());
        if (std::holds_alternative<Alg1>(variant_)) {
            warm.push_back(sstar_.u);
        } else {
            warm.push_back(last_inputs_.back());
        }
        return warm;
    }

    RhVariant variant_;
    Model model_;
    StageCost cost_;
    ConstraintSet X_;
    ConstraintSet U_;
    int N_;
    double beta_;
    Options options_;

    FixedPoint sstar_;
    std::vector<Vec> last_inputs_;
    std::pair<Vec, Vec> last_terminal_;
    double l_bar_ = kInf;
    int t_ = 0;
    StepRecord last_record_;
};

/// Runs the closed loop (12): plant and prediction share the same model.
/// Produces T records, t = 0 ... T-1.
inline SimTrace run_closed_loop(const RhVariant& variant, const Model& model, const StageCost& l,
                                const ConstraintSet& X, const ConstraintSet& U, int N,
                                double beta, const Vec& x0, int T,
                                const Controller::Options& options = {}) {
    if (T < 1) throw std::invalid_argument("run_closed_loop: T must be >= 1");
    SimTrace trace;
    trace.variant = variant_name(variant);
    trace.n = model.n();
    trace.m = model.m();
    trace.N = N;
    trace.beta = beta;
    if (const Alg3* a3 = std::get_if<Alg3>(&variant)) trace.eps = a3->eps;

    Controller ctrl = Controller::init(variant, model, l, X, U, N, beta, x0, options);
    trace.optimal_fixed_point = ctrl.optimal_fixed_point();
    trace.records.push_back(ctrl.last_record());
    trace.j_star0 = trace.records.front().j_star;

    Vec x = model.step(x0, trace.records.front().u);
    for (int t = 1; t < T; ++t) {
        auto [u, rec] = ctrl.step(x);
        trace.records.push_back(rec);
        x = model.step(x, u);
    }
    return trace;
}

}  // namespace gtmpc

#endif  // GTMPC_RH_HPP
