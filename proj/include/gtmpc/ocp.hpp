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
#ifndef GTMPC_OCP_HPP
#define GTMPC_OCP_HPP

#include <algorithm>
#include <optional>
#include <vector>

#include "gtmpc/common.hpp"
#include "gtmpc/constraints.hpp"
#include "gtmpc/costs.hpp"
#include "gtmpc/model.hpp"
#include "gtmpc/nlp.hpp"

namespace gtmpc {

/// State-input pair with f(x, u) = x up to `residual`.
struct FixedPoint {
    Vec x;
    Vec u;
    double stage_value = 0.0;
    double residual = 0.0;
};

/// Solution of one finite-horizon problem. `inputs` has N entries for the
/// fixed-terminal problem and N+1 for the generalized one, where the last
/// entry is the terminal input v(N|t).
struct OcpSolution {
    std::vector<Vec> inputs;
    std::vector<Vec> states;  // x(0|t) ... x(N|t)
    Vec terminal_state;
    Vec terminal_input;  // empty for the fixed-terminal problem
    double objective = 0.0;
    NlpStatus status = NlpStatus::Failure;
    double terminal_residual = 0.0;  // ||x(N) - f(x(N), v(N))||_inf
    double max_violation = 0.0;

    bool feasible() const {
        return status == NlpStatus::Optimal || status == NlpStatus::FeasibleSuboptimal;
    }
};

struct OcpOptions {
    SolverConfig solver;
    int multistart_full_solves = 3;
    /// Steering reference for cold-start relay candidates (usually the
    /// optimal fixed point); improves initialization on swing-up problems.
    std::optional<Vec> target_hint;
};

namespace detail {

enum class OcpKind {
    FixedTerminal,   // x(N) = x_s, N inputs
    Generalized,     // x(N) = f(x(N), v(N)), optional terminal cost bound
    AchievableCost,  // min l(x(N), v(N)) under the generalized constraints
    ReachTarget,     // x(N) = target.x and f(target.x, v(N)) = target.x
    FeasGeneralized  // generalized constraints only, zero objective
};

/// Single-shooting transcription: the decision vector stacks the input
/// sequence; states are eliminated by rollout.
struct Shooting {
    const Model* model = nullptr;
    const StageCost* cost = nullptr;
    OcpKind kind = OcpKind::Generalized;
    int N = 0;
    int K = 0;  // number of stacked inputs
    double beta = 0.0;
    double l_bar = kInf;
    Vec x_t;
    Vec x_target;  // x_s or probe target
    Mat Hx;        // state constraint rows
    Vec hx;
    Mat Hu;  // input rows when the input set is a polytope
    Vec hu;
    bool u_is_box = true;

    int n() const { return model->n(); }
    int m() const { return model->m(); }
    int dim() const { return K * m(); }

    int n_eq() const {
        switch (kind) {
            case OcpKind::FixedTerminal: return n();
            case OcpKind::ReachTarget: return 2 * n();
            default: return n();
        }
    }

    int n_state_rows() const { return N * static_cast<int>(Hx.rows()); }
    int n_input_rows() const { return u_is_box ? 0 : K * static_cast<int>(Hu.rows()); }

    int n_ineq() const {
        int rows = n_state_rows() + n_input_rows();
        if (kind == OcpKind::Generalized && std::isfinite(l_bar)) rows += 1;
        return rows;
    }

    bool has_terminal_input() const { return kind != OcpKind::FixedTerminal; }

    Vec input_at(const Vec& z, int j) const { return z.segment(j * m(), m()); }

    std::vector<Vec> unpack(const Vec& z) const {
        std::vector<Vec> inputs(K);
        for (int j = 0; j < K; ++j) inputs[j] = input_at(z, j);
        return inputs;
    }

    Vec pack(const std::vector<Vec>& inputs) const {
        Vec z(dim());
        for (int j = 0; j < K; ++j) z.segment(j * m(), m()) = inputs[j];
        return z;
    }

    std::vector<Vec> roll(const Vec& z) const {
        std::vector<Vec> xs(N + 1);
        xs[0] = x_t;
        for (int j = 0; j < N; ++j) xs[j + 1] = model->step(xs[j], input_at(z, j));
        return xs;
    }

    void eval(const Vec& z, double& f, Vec& c_eq, Vec& c_in) const {
        const std::vector<Vec> xs = roll(z);
        f = objective_value(z, xs);
        c_eq = eq_values(z, xs);
        c_in = ineq_values(z, xs);
    }

    double objective_value(const Vec& z, const std::vector<Vec>& xs) const {
        switch (kind) {
            case OcpKind::FixedTerminal: {
                double f = 0.0;
                for (int j = 0; j < N; ++j) f += cost->solver_eval(xs[j], input_at(z, j));
                return f;
            }
            case OcpKind::Generalized: {
                double f = 0.0;
                for (int j = 0; j < N; ++j) f += cost->solver_eval(xs[j], input_at(z, j));
                return f + beta * cost->solver_eval(xs[N], input_at(z, N));
            }
            case OcpKind::AchievableCost:
                return cost->solver_eval(xs[N], input_at(z, N));
            default:
                return 0.0;
        }
    }

    Vec eq_values(const Vec& z, const std::vector<Vec>& xs) const {
        switch (kind) {
            case OcpKind::FixedTerminal:
                return xs[N] - x_target;
            case OcpKind::ReachTarget: {
                Vec c(2 * n());
                c.head(n()) = xs[N] - x_target;
                c.tail(n()) = model->step(x_target, input_at(z, N)) - x_target;
                return c;
            }
            default:  // generalized terminal constraint x(N) = f(x(N), v(N))
                return xs[N] - model->step(xs[N], input_at(z, N));
        }
    }

    Vec ineq_values(const Vec& z, const std::vector<Vec>& xs) const {
        Vec c(n_ineq());
        int r = 0;
        const int rx = static_cast<int>(Hx.rows());
        for (int j = 1; j <= N; ++j) {
            if (rx) c.segment(r, rx) = Hx * xs[j] - hx;
            r += rx;
        }
        if (!u_is_box) {
            const int ru = static_cast<int>(Hu.rows());
            for (int j = 0; j < K; ++j) {
                c.segment(r, ru) = Hu * input_at(z, j) - hu;
                r += ru;
            }
        }
        if (kind == OcpKind::Generalized && std::isfinite(l_bar)) {
            c[r++] = cost->solver_eval(xs[N], input_at(z, N)) - l_bar;
        }
        return c;
    }

    void derivs(const Vec& z, Vec& grad, Mat& J_eq, Mat& J_in) const {
        const int nn = n();
        const int mm = m();
        const int D = dim();
        const std::vector<Vec> xs = roll(z);

        // Forward sensitivities S_j = dx_j/dz.
        std::vector<Mat> S(N + 1, Mat::Zero(nn, D));
        for (int j = 0; j < N; ++j) {
            auto [A, B] = jacobians(*model, xs[j], input_at(z, j));
            S[j + 1] = A * S[j];
            S[j + 1].middleCols(j * mm, mm) += B;
        }

        grad = Vec::Zero(D);
        if (kind == OcpKind::FixedTerminal || kind == OcpKind::Generalized) {
            for (int j = 0; j < N; ++j) {
                auto [lx, lu] = cost->solver_grad(xs[j], input_at(z, j));
                grad.noalias() += S[j].transpose() * lx;
                grad.segment(j * mm, mm) += lu;
            }
        }
        if (kind == OcpKind::Generalized || kind == OcpKind::AchievableCost) {
            auto [lx, lu] = cost->solver_grad(xs[N], input_at(z, N));
            const double w = kind == OcpKind::Generalized ? beta : 1.0;
            grad.noalias() += w * (S[N].transpose() * lx);
            grad.segment(N * mm, mm) += w * lu;
        }

        J_eq.setZero(n_eq(), D);
        switch (kind) {
            case OcpKind::FixedTerminal:
                J_eq = S[N];
                break;
            case OcpKind::ReachTarget: {
                J_eq.topRows(nn) = S[N];
                auto [At, Bt] = jacobians(*model, x_target, input_at(z, N));
                J_eq.block(nn, N * mm, nn, mm) = Bt;
                (void)At;
                break;
            }
            default: {
                auto [An, Bn] = jacobians(*model, xs[N], input_at(z, N));
                J_eq = S[N] - An * S[N];
                J_eq.block(0, N * mm, nn, mm) -= Bn;
                break;
            }
        }

        J_in.setZero(n_ineq(), D);
        int r = 0;
        const int rx = static_cast<int>(Hx.rows());
        for (int j = 1; j <= N; ++j) {
            if (rx) J_in.middleRows(r, rx) = Hx * S[j];
            r += rx;
        }
        if (!u_is_box) {
            const int ru = static_cast<int>(Hu.rows());
            for (int j = 0; j < K; ++j) {
                J_in.block(r, j * mm, ru, mm) = Hu;
                r += ru;
            }
        }
        if (kind == OcpKind::Generalized && std::isfinite(l_bar)) {
            auto [lx, lu] = cost->solver_grad(xs[N], input_at(z, N));
            J_in.row(r) = (S[N].transpose() * lx).transpose();
            J_in.block(r, N * mm, 1, mm) += lu.transpose();
            ++r;
        }
    }

    NlpSpec make_spec() const {
        NlpSpec spec;
        spec.dim = dim();
        spec.n_eq = n_eq();
        spec.n_ineq = n_ineq();
        spec.eval = [this](const Vec& z, double& f, Vec& ce, Vec& ci) { eval(z, f, ce, ci); };
        spec.derivs = [this](const Vec& z, Vec& g, Mat& JE, Mat& JI) { derivs(z, g, JE, JI); };
        spec.lower = Vec::Constant(spec.dim, -kInf);
        spec.upper = Vec::Constant(spec.dim, kInf);
        return spec;
    }
};

inline Shooting make_shooting(const Model& model, const StageCost& cost, const ConstraintSet& X,
                              const ConstraintSet& U, int N, OcpKind kind, const Vec& x_t) {
    if (N < 1) throw std::invalid_argument("horizon must be >= 1");
    check_dim(x_t, model.n(), "x_t");
    Shooting sh;
    sh.model = &model;
    sh.cost = &cost;
    sh.kind = kind;
    sh.N = N;
    sh.K = kind == OcpKind::FixedTerminal ? N : N + 1;
    sh.x_t = x_t;
    std::tie(sh.Hx, sh.hx) = X.as_inequalities();
    sh.u_is_box = U.is_box();
    if (!sh.u_is_box) std::tie(sh.Hu, sh.hu) = U.as_inequalities();
    return sh;
}

inline void apply_input_bounds(NlpSpec& spec, const Shooting& sh, const ConstraintSet& U) {
    if (!sh.u_is_box) return;
    for (int j = 0; j < sh.K; ++j) {
        spec.lower.segment(j * sh.m(), sh.m()) = U.lower();
        spec.upper.segment(j * sh.m(), sh.m()) = U.upper();
    }
}

/// Box center used to seed input sequences; unbounded components use 0.
inline Vec input_center(const ConstraintSet& U) {
    if (!U.is_box()) return Vec::Zero(U.dim());
    Vec c(U.dim());
    for (int i = 0; i < U.dim(); ++i) {
        const double lo = U.lower()[i];
        const double hi = U.upper()[i];
        if (std::isfinite(lo) && std::isfinite(hi)) c[i] = 0.5 * (lo + hi);
        else if (std::isfinite(lo)) c[i] = lo;
        else if (std::isfinite(hi)) c[i] = hi;
        else c[i] = 0.0;
    }
    return c;
}

inline Vec clamp_to_set(Vec u, const ConstraintSet& U) {
    if (!U.is_box()) return u;
    for (int i = 0; i < U.dim(); ++i) {
        u[i] = std::min(std::max(u[i], U.lower()[i]), U.upper()[i]);
    }
    return u;
}

/// Constant input holding x_t in place, found by Gauss-Newton on
/// ||f(x_t, u) - x_t||. Useful whenever x_t is (close to) a fixed point.
inline Vec hold_input(const Model& model, const ConstraintSet& U, const Vec& x_t) {
    Vec u = input_center(U);
    for (int it = 0; it < 25; ++it) {
        Vec r = model.step(x_t, u) - x_t;
        if (r.lpNorm<Eigen::Infinity>() < 1e-12) break;
        auto [A, B] = jacobians(model, x_t, u);
        (void)A;
        Mat JJ = B.transpose() * B;
        JJ.diagonal().array() += 1e-12;
        Vec du = JJ.ldlt().solve(-(B.transpose() * r));
        Vec u_new = clamp_to_set(u + du, U);
        if ((model.step(x_t, u_new) - x_t).norm() >= r.norm()) break;
        u = u_new;
    }
    return u;
}

/// Deterministic cold-start input sequences: hold / center / box corners,
/// plus two relay excitations when a steering reference is available. The
/// relays switch each input component at its box extremes according to the
/// input-map direction B(x)'(x - x_ref); the destabilizing sign injects the
/// energy needed on swing-up-type problems.
inline std::vector<std::vector<Vec>> cold_start_candidates(const Model& model,
                                                           const ConstraintSet& U, int K,
                                                           const Vec& x_t,
                                                           const std::optional<Vec>& x_ref) {
    std::vector<std::vector<Vec>> cands;
    const int m = model.m();
    const Vec center = input_center(U);

    cands.push_back(std::vector<Vec>(K, hold_input(model, U, x_t)));
    cands.push_back(std::vector<Vec>(K, center));

    if (U.is_box() && U.bounded() && m <= 3) {
        for (int mask = 0; mask < (1 << m); ++mask) {
            Vec corner(m);
            for (int i = 0; i < m; ++i) {
                corner[i] = (mask >> i) & 1 ? U.upper()[i] : U.lower()[i];
            }
            cands.push_back(std::vector<Vec>(K, corner));
        }
    }

    if (x_ref && U.is_box() && U.bounded()) {
        Vec half = 0.5 * (U.upper() - U.lower());
        for (double s : {1.0, -1.0}) {
            std::vector<Vec> seq;
            seq.reserve(K);
            Vec x = x_t;
            for (int j = 0; j < K; ++j) {
                auto [A, B] = jacobians(model, x, center);
                (void)A;
                Vec dir = B.transpose() * (x - *x_ref);
                Vec u = center;
                for (int i = 0; i < m; ++i) {
                    const double sg = dir[i] > 0.0 ? 1.0 : (dir[i] < 0.0 ? -1.0 : 1.0);
                    u[i] += s * sg * half[i];
                }
                u = clamp_to_set(u, U);
                seq.push_back(u);
                x = model.step(x, u);
            }
            cands.push_back(std::move(seq));
        }
    }
    return cands;
}

/// Runs full solves from the most promising candidates and keeps the best
/// outcome (feasible ones ranked by objective, then by violation).
inline NlpResult multistart_solve(const Shooting& sh, const NlpSpec& spec,
                                  const std::vector<std::vector<Vec>>& candidates,
                                  const OcpOptions& opt) {
    struct Scored {
        double viol;
        double f;
        Vec z;
    };
    std::vector<Scored> scored;
    scored.reserve(candidates.size());
    for (const auto& cand : candidates) {
        Vec z = sh.pack(cand);
        for (int i = 0; i < z.size(); ++i) {
            z[i] = std::min(std::max(z[i], spec.lower[i]), spec.upper[i]);
        }
        double f;
        Vec ce(spec.n_eq), ci(spec.n_ineq);
        spec.eval(z, f, ce, ci);
        double viol = ce.size() ? ce.lpNorm<Eigen::Infinity>() : 0.0;
        for (Eigen::Index i = 0; i < ci.size(); ++i) viol = std::max(viol, ci[i]);
        if (!std::isfinite(f)) f = kInf;
        scored.push_back({std::max(viol, 0.0), f, std::move(z)});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.viol != b.viol) return a.viol < b.viol;
        return a.f < b.f;
    });

    std::optional<NlpResult> best;
    const int tries = std::min<int>(opt.multistart_full_solves, static_cast<int>(scored.size()));
    for (int i = 0; i < tries; ++i) {
        NlpResult res = solve_nlp(spec, scored[i].z, opt.solver);
        const bool res_ok =
            res.status == NlpStatus::Optimal || res.status == NlpStatus::FeasibleSuboptimal;
        if (!best) {
            best = std::move(res);
            continue;
        }
        const bool best_ok =
            best->status == NlpStatus::Optimal || best->status == NlpStatus::FeasibleSuboptimal;
        if (res_ok && (!best_ok || res.value < best->value)) best = std::move(res);
    }
    return *best;
}

inline OcpSolution package_solution(const Shooting& sh, const NlpResult& res) {
    OcpSolution sol;
    sol.inputs = sh.unpack(res.z);
    sol.states = sh.roll(res.z);
    sol.terminal_state = sol.states.back();
    sol.status = res.status == NlpStatus::NumericError ? NlpStatus::Failure : res.status;
    sol.max_violation = std::max(res.eq_residual, res.ineq_violation);
    if (sh.has_terminal_input()) {
        sol.terminal_input = sol.inputs.back();
        sol.terminal_residual =
            (sol.terminal_state - sh.model->step(sol.terminal_state, sol.terminal_input))
                .lpNorm<Eigen::Infinity>();
    }
    return sol;
}

}  // namespace detail

/// Fixed-terminal problem: minimize the N-step running cost subject to the
/// dynamics, state/input constraints and x(N|t) = x_s.
inline OcpSolution solve_ps(const Model& model, const StageCost& l, const ConstraintSet& X,
                            const ConstraintSet& U, int N, const Vec& x_s, const Vec& x_t,
                            const std::vector<Vec>* warm_start = nullptr,
                            const OcpOptions& opt = {}) {
    using namespace detail;
    check_dim(x_s, model.n(), "x_s");
    Shooting sh = make_shooting(model, l, X, U, N, OcpKind::FixedTerminal, x_t);
    sh.x_target = x_s;
    NlpSpec spec = sh.make_spec();
    apply_input_bounds(spec, sh, U);

    NlpResult res;
    if (warm_start && static_cast<int>(warm_start->size()) == sh.K) {
        res = solve_nlp(spec, sh.pack(*warm_start), opt.solver);
    } else {
        OcpOptions o = opt;
        if (!o.target_hint) o.target_hint = x_s;
        res = multistart_solve(sh, spec, cold_start_candidates(model, U, sh.K, x_t, o.target_hint),
                               o);
    }
    OcpSolution sol = package_solution(sh, res);
    Trajectory traj{sol.states, sol.inputs};
    sol.objective = horizon_cost_s(l, traj);
    return sol;
}

/// Generalized problem: N+1 inputs, terminal pair constrained to be a fixed
/// point with stage cost at most l_bar (pass +inf to drop the bound).
inline OcpSolution solve_p(const Model& model, const StageCost& l, const ConstraintSet& X,
                           const ConstraintSet& U, int N, double beta, double l_bar,
                           const Vec& x_t, const std::vector<Vec>* warm_start = nullptr,
                           const OcpOptions& opt = {}) {
    using namespace detail;
    if (beta < 0.0) throw std::invalid_argument("solve_p: beta must be >= 0");
    Shooting sh = make_shooting(model, l, X, U, N, OcpKind::Generalized, x_t);
    sh.beta = beta;
    sh.l_bar = l_bar;
    NlpSpec spec = sh.make_spec();
    apply_input_bounds(spec, sh, U);

    NlpResult res;
    if (warm_start && static_cast<int>(warm_start->size()) == sh.K) {
        res = solve_nlp(spec, sh.pack(*warm_start), opt.solver);
    } else {
        res = multistart_solve(sh, spec,
                               cold_start_candidates(model, U, sh.K, x_t, opt.target_hint), opt);
    }
    OcpSolution sol = package_solution(sh, res);
    Trajectory traj{sol.states, sol.inputs};
    sol.objective = horizon_cost_gen(l, HorizonWeights(N, beta), traj);
    return sol;
}

/// Optimal fixed point (x_s, u_s): multi-start local minimization of the
/// stage cost over the admissible fixed points. Ties are broken by the
/// smaller ||x||_2, then lexicographically.
inline FixedPoint solve_optimal_fixed_point(const Model& model, const StageCost& l,
                                            const ConstraintSet& X, const ConstraintSet& U,
                                            const std::optional<FixedPoint>& guess = std::nullopt,
                                            const OcpOptions& opt = {}) {
    const int n = model.n();
    const int m = model.m();
    const int dim = n + m;

    auto [Hx, hx] = X.as_inequalities();
    auto [Hu, hu] = U.as_inequalities();
    const bool box_x = X.is_box();
    const bool box_u = U.is_box();
    const int n_rows = (box_x ? 0 : static_cast<int>(Hx.rows())) +
                       (box_u ? 0 : static_cast<int>(Hu.rows()));

    NlpSpec spec;
    spec.dim = dim;
    spec.n_eq = n;
    spec.n_ineq = n_rows;
    spec.eval = [&](const Vec& w, double& f, Vec& ce, Vec& ci) {
        const Vec x = w.head(n);
        const Vec u = w.tail(m);
        f = l.solver_eval(x, u);
        ce = model.step(x, u) - x;
        int r = 0;
        if (!box_x) {
            ci.segment(r, Hx.rows()) = Hx * x - hx;
            r += static_cast<int>(Hx.rows());
        }
        if (!box_u) ci.segment(r, Hu.rows()) = Hu * u - hu;
    };
    spec.derivs = [&](const Vec& w, Vec& g, Mat& JE, Mat& JI) {
        const Vec x = w.head(n);
        const Vec u = w.tail(m);
        auto [lx, lu] = l.solver_grad(x, u);
        g.resize(dim);
        g << lx, lu;
        auto [A, B] = jacobians(model, x, u);
        JE.resize(n, dim);
        JE << A - Mat::Identity(n, n), B;
        JI.setZero(n_rows, dim);
        int r = 0;
        if (!box_x) {
            JI.block(r, 0, Hx.rows(), n) = Hx;
            r += static_cast<int>(Hx.rows());
        }
        if (!box_u) JI.block(r, n, Hu.rows(), m) = Hu;
    };
    spec.lower = Vec::Constant(dim, -kInf);
    spec.upper = Vec::Constant(dim, kInf);
    if (box_x) {
        spec.lower.head(n) = X.lower();
        spec.upper.head(n) = X.upper();
    }
    if (box_u) {
        spec.lower.tail(m) = U.lower();
        spec.upper.tail(m) = U.upper();
    }

    // 5-per-dimension start grid over the admissible box; unbounded
    // components fall back to [-10, 10].
    auto axis_values = [](double lo, double hi) {
        if (!std::isfinite(lo)) lo = -10.0;
        if (!std::isfinite(hi)) hi = 10.0;
        std::vector<double> v(5);
        for (int i = 0; i < 5; ++i) v[i] = lo + (hi - lo) * i / 4.0;
        return v;
    };
    std::vector<std::vector<double>> axes(dim);
    for (int i = 0; i < dim; ++i) {
        const double lo = spec.lower[i];
        const double hi = spec.upper[i];
        axes[i] = axis_values(lo, hi);
    }
    std::vector<Vec> starts;
    std::vector<int> idx(dim, 0);
    while (true) {
        Vec w(dim);
        for (int i = 0; i < dim; ++i) w[i] = axes[i][idx[i]];
        starts.push_back(w);
        int c = 0;
        while (c < dim && ++idx[c] == 5) idx[c++] = 0;
        if (c == dim) break;
    }
    if (guess) {
        Vec w(dim);
        w << guess->x, guess->u;
        starts.insert(starts.begin(), w);
    }

    std::optional<FixedPoint> best;
    SolverConfig cfg = opt.solver;
    cfg.max_inner = std::min(cfg.max_inner, 120);
    for (const Vec& w0 : starts) {
        NlpResult res = solve_nlp(spec, w0, cfg);
        if (res.status != NlpStatus::Optimal && res.status != NlpStatus::FeasibleSuboptimal) {
            continue;
        }
        FixedPoint fp;
        fp.x = res.z.head(n);
        fp.u = res.z.tail(m);
        fp.residual = (model.step(fp.x, fp.u) - fp.x).lpNorm<Eigen::Infinity>();
        fp.stage_value = l.eval(fp.x, fp.u);
        if (fp.residual > kTolEq) continue;
        if (!X.contains(fp.x, 1e-7) || !U.contains(fp.u, 1e-7)) continue;
        if (!best) {
            best = fp;
            continue;
        }
        const double dv = fp.stage_value - best->stage_value;
        bool better = dv < -1e-9;
        if (std::abs(dv) <= 1e-9) {
            const double dn = fp.x.norm() - best->x.norm();
            if (dn < -1e-9) {
                better = true;
            } else if (std::abs(dn) <= 1e-9) {
                for (int i = 0; i < dim; ++i) {
                    const double a = i < n ? fp.x[i] : fp.u[i - n];
                    const double b = i < n ? best->x[i] : best->u[i - n];
                    if (a < b - 1e-12) {
                        better = true;
                        break;
                    }
                    if (a > b + 1e-12) break;
                }
            }
        }
        if (better) best = fp;
    }
    if (!best) {
        throw InfeasibleError("no admissible fixed point found");
    }
    return *best;
}

/// Optimal achievable stage cost: smallest stage cost among the fixed
/// points reachable from x_t in N steps, together with the achieving pair.
inline std::pair<double, FixedPoint> optimal_achievable_cost(const Model& model,
                                                             const StageCost& l,
                                                             const ConstraintSet& X,
                                                             const ConstraintSet& U, int N,
                                                             const Vec& x_t,
                                                             const OcpOptions& opt = {}) {
    using namespace detail;
    Shooting sh = make_shooting(model, l, X, U, N, OcpKind::AchievableCost, x_t);
    NlpSpec spec = sh.make_spec();
    apply_input_bounds(spec, sh, U);
    NlpResult res = multistart_solve(
        sh, spec, cold_start_candidates(model, U, sh.K, x_t, opt.target_hint), opt);
    if (res.status != NlpStatus::Optimal && res.status != NlpStatus::FeasibleSuboptimal) {
        throw InfeasibleError("optimal_achievable_cost: x_t outside the feasibility set");
    }
    OcpSolution sol = package_solution(sh, res);
    FixedPoint fp;
    fp.x = sol.terminal_state;
    fp.u = sol.terminal_input;
    fp.residual = sol.terminal_residual;
    fp.stage_value = l.eval(fp.x, fp.u);
    return {fp.stage_value, fp};
}

/// True iff some admissible input sequence drives x_t onto target.x in N
/// steps while target.x stays fixed under the final input (feasibility
/// phase of the reachable-fixed-point constraints).
inline bool reachable_fixed_point_probe(const Model& model, const StageCost& l,
                                        const ConstraintSet& X, const ConstraintSet& U, int N,
                                        const Vec& x_t, const FixedPoint& target,
                                        const OcpOptions& opt = {}) {
    using namespace detail;
    if (target.residual > kTolEq) {
        throw std::invalid_argument("reachable_fixed_point_probe: target is not a fixed point");
    }
    Shooting sh = make_shooting(model, l, X, U, N, OcpKind::ReachTarget, x_t);
    sh.x_target = target.x;
    NlpSpec spec = sh.make_spec();
    apply_input_bounds(spec, sh, U);

    auto candidates = cold_start_candidates(model, U, sh.K, x_t, target.x);
    bool any_stationary = false;
    double best_viol = kInf;
    for (const auto& cand : candidates) {
        Vec z = sh.pack(cand);
        for (int i = 0; i < z.size(); ++i) {
            z[i] = std::min(std::max(z[i], spec.lower[i]), spec.upper[i]);
        }
        bool stationary = false;
        const double viol = restore_feasibility(spec, z, 600, &stationary);
        if (viol <= kTolEq) return true;
        any_stationary = any_stationary || stationary;
        best_viol = std::min(best_viol, viol);
    }
    if (!any_stationary && best_viol > kTolEq) {
        throw SolverFailure("reachable_fixed_point_probe: restoration did not converge");
    }
    return false;
}

/// Feasibility phase of the fixed-terminal problem. Returns the admissible
/// input sequence when one is found.
inline std::optional<std::vector<Vec>> feasibility_phase_ps(const Model& model,
                                                            const ConstraintSet& X,
                                                            const ConstraintSet& U, int N,
                                                            const Vec& x_s, const Vec& x_t,
                                                            bool* solver_ok = nullptr) {
    using namespace detail;
    StageCost zero = StageCost::analytic(
        model.n(), model.m(), "zero", [](const Vec&, const Vec&) { return 0.0; },
        [](const Vec& x, const Vec& u) {
            return std::make_pair(Vec(Vec::Zero(x.size())), Vec(Vec::Zero(u.size())));
        });
    Shooting sh = make_shooting(model, zero, X, U, N, OcpKind::FixedTerminal, x_t);
    sh.x_target = x_s;
    NlpSpec spec = sh.make_spec();
    apply_input_bounds(spec, sh, U);
    if (solver_ok) *solver_ok = true;
    auto candidates = cold_start_candidates(model, U, sh.K, x_t, x_s);
    bool all_stationary = true;
    for (const auto& cand : candidates) {
        Vec z = sh.pack(cand);
        for (int i = 0; i < z.size(); ++i) {
            z[i] = std::min(std::max(z[i], spec.lower[i]), spec.upper[i]);
        }
        bool stationary = false;
        const double viol = restore_feasibility(spec, z, 400, &stationary);
        if (viol <= kTolEq) return sh.unpack(z);
        all_stationary = all_stationary && stationary;
    }
    if (solver_ok) *solver_ok = all_stationary;
    return std::nullopt;
}

/// Feasibility phase of the generalized problem with the bound dropped.
inline bool feasibility_phase_p(const Model& model, const StageCost& l, const ConstraintSet& X,
                                const ConstraintSet& U, int N, const Vec& x_t,
                                const std::vector<Vec>* seed = nullptr,
                                bool* solver_ok = nullptr) {
    using namespace detail;
    Shooting sh = make_shooting(model, l, X, U, N, OcpKind::FeasGeneralized, x_t);
    NlpSpec spec = sh.make_spec();
    apply_input_bounds(spec, sh, U);
    if (solver_ok) *solver_ok = true;
    std::vector<std::vector<Vec>> candidates;
    if (seed && static_cast<int>(seed->size()) == sh.K) candidates.push_back(*seed);
    auto more = cold_start_candidates(model, U, sh.K, x_t, std::nullopt);
    candidates.insert(candidates.end(), more.begin(), more.end());
    bool all_stationary = true;
    for (const auto& cand : candidates) {
        Vec z = sh.pack(cand);
        for (int i = 0; i < z.size(); ++i) {
            z[i] = std::min(std::max(z[i], spec.lower[i]), spec.upper[i]);
        }
        bool stationary = false;
        const double viol = restore_feasibility(spec, z, 400, &stationary);
        if (viol <= kTolEq) return true;
        all_stationary = all_stationary && stationary;
    }
    if (solver_ok) *solver_ok = all_stationary;
    return false;
}

}  // namespace gtmpc

#endif  // GTMPC_OCP_HPP
