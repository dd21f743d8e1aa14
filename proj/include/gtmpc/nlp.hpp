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
#ifndef GTMPC_NLP_HPP
#define GTMPC_NLP_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>

#include "gtmpc/common.hpp"

namespace gtmpc {

enum class NlpStatus { Optimal, FeasibleSuboptimal, Infeasible, Failure, NumericError };

inline const char* to_string(NlpStatus s) {
    switch (s) {
        case NlpStatus::Optimal: return "optimal";
        case NlpStatus::FeasibleSuboptimal: return "feasible-suboptimal";
        case NlpStatus::Infeasible: return "infeasible";
        case NlpStatus::Failure: return "solver-failure";
        case NlpStatus::NumericError: return "numeric-error";
    }
    return "?";
}

/// Smooth NLP in the form
///   min f(z)  s.t.  c_eq(z) = 0,  c_in(z) <= 0,  lower <= z <= upper.
///
/// `eval` returns values only (used heavily in line searches); `derivs`
/// returns the objective gradient and the two constraint Jacobians.
struct NlpSpec {
    int dim = 0;
    int n_eq = 0;
    int n_ineq = 0;
    std::function<void(const Vec&, double&, Vec&, Vec&)> eval;
    std::function<void(const Vec&, Vec&, Mat&, Mat&)> derivs;
    Vec lower;  // may contain -inf
    Vec upper;  // may contain +inf
};

struct SolverConfig {
    int max_outer = 50;
    int max_inner = 200;
    double tol_stationarity = 1e-7;
    double tol_eq = 1e-6;
    double tol_con = 1e-8;
    double penalty_init = 10.0;
    double penalty_growth = 10.0;
    int verbosity = 0;
    bool debug_check_gradients = false;
};

struct NlpResult {
    Vec z;
    double value = 0.0;
    NlpStatus status = NlpStatus::Failure;
    double eq_residual = 0.0;
    double ineq_violation = 0.0;
    double stationarity = 0.0;
    int outer_iters = 0;
    int inner_iters = 0;
};

namespace detail {

inline Vec clamp_to_bounds(Vec z, const Vec& lo, const Vec& hi) {
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z[i] = std::min(std::max(z[i], lo[i]), hi[i]);
    }
    return z;
}

inline double pos_part_inf_norm(const Vec& c) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) v = std::max(v, c[i]);
    return std::max(v, 0.0);
}

struct Point {
    Vec z;
    double f = 0.0;
    Vec c_eq, c_in;
    bool valid() const {
        return std::isfinite(f) && c_eq.allFinite() && c_in.allFinite();
    }
    double eq_res() const { return c_eq.size() ? c_eq.lpNorm<Eigen::Infinity>() : 0.0; }
    double in_viol() const { return c_in.size() ? pos_part_inf_norm(c_in) : 0.0; }
};

inline Point evaluate(const NlpSpec& spec, const Vec& z) {
    Point p;
    p.z = z;
    p.c_eq.resize(spec.n_eq);
    p.c_in.resize(spec.n_ineq);
    spec.eval(z, p.f, p.c_eq, p.c_in);
    return p;
}

/// Augmented-Lagrangian value for given multipliers and penalty.
inline double al_merit(const Point& p, const Vec& lambda, const Vec& mu, double rho) {
    double m = p.f;
    if (p.c_eq.size()) m += lambda.dot(p.c_eq) + 0.5 * rho * p.c_eq.squaredNorm();
    for (Eigen::Index i = 0; i < p.c_in.size(); ++i) {
        const double t = mu[i] + rho * p.c_in[i];
        if (t > 0.0) m += (t * t - mu[i] * mu[i]) / (2.0 * rho);
        else m -= mu[i] * mu[i] / (2.0 * rho);
    }
    return m;
}

inline Vec al_gradient(const Point& p, const Vec& g, const Mat& J_eq, const Mat& J_in,
                       const Vec& lambda, const Vec& mu, double rho) {
    Vec gm = g;
    if (p.c_eq.size()) gm += J_eq.transpose() * (lambda + rho * p.c_eq);
    for (Eigen::Index i = 0; i < p.c_in.size(); ++i) {
        const double t = mu[i] + rho * p.c_in[i];
        if (t > 0.0) gm += t * J_in.row(i).transpose();
    }
    return gm;
}

/// Projected Gauss-Newton minimization of the squared constraint violation
/// 0.5 ||c_eq||^2 + 0.5 ||max(0, c_in)||^2 over the bound box.
/// Returns the final max violation; `stationary` reports whether the method
/// stopped at a (local) minimum rather than by iteration exhaustion.
inline double restore_feasibility(const NlpSpec& spec, Vec& z, int max_iter,
                                  bool* stationary = nullptr) {
    const double reg0 = 1e-10;
    double nu = 1e-8;
    Point p = evaluate(spec, z);
    if (!p.valid()) {
        if (stationary) *stationary = false;
        return kInf;
    }
    auto viol2 = [](const Point& q) {
        double v = q.c_eq.size() ? q.c_eq.squaredNorm() : 0.0;
        for (Eigen::Index i = 0; i < q.c_in.size(); ++i) {
            if (q.c_in[i] > 0.0) v += q.c_in[i] * q.c_in[i];
        }
        return 0.5 * v;
    };
    double v = viol2(p);
    bool stat = false;
    int slow_progress = 0;
    Vec g(spec.dim);
    Mat J_eq(spec.n_eq, spec.dim), J_in(spec.n_ineq, spec.dim);
    for (int it = 0; it < max_iter; ++it) {
        if (v < 0.5 * 1e-16) {  // violation below 1e-8 in the 2-norm already
            stat = true;
            break;
        }
        spec.derivs(z, g, J_eq, J_in);
        Mat JJ = Mat::Zero(spec.dim, spec.dim);
        Vec rhs = Vec::Zero(spec.dim);
        if (spec.n_eq) {
            JJ.noalias() += J_eq.transpose() * J_eq;
            rhs.noalias() -= J_eq.transpose() * p.c_eq;
        }
        for (int i = 0; i < spec.n_ineq; ++i) {
            if (p.c_in[i] > 0.0) {
                JJ.noalias() += J_in.row(i).transpose() * J_in.row(i);
                rhs.noalias() -= p.c_in[i] * J_in.row(i).transpose();
            }
        }
        // Stationarity of the violation over the box (rhs = -grad).
        Vec zp = clamp_to_bounds(p.z + rhs, spec.lower, spec.upper);
        if ((zp - p.z).lpNorm<Eigen::Infinity>() <=
            1e-11 * std::max(1.0, p.z.lpNorm<Eigen::Infinity>())) {
            stat = true;
            break;
        }
        // Solve on the free variables only; bound-active ones stay put.
        std::vector<int> free_idx;
        free_idx.reserve(spec.dim);
        for (int i = 0; i < spec.dim; ++i) {
            const double span = std::max(1.0, std::abs(p.z[i]));
            const bool at_lo = p.z[i] <= spec.lower[i] + 1e-12 * span && rhs[i] < 0.0;
            const bool at_hi = p.z[i] >= spec.upper[i] - 1e-12 * span && rhs[i] > 0.0;
            if (!at_lo && !at_hi) free_idx.push_back(i);
        }
        Vec dz = Vec::Zero(spec.dim);
        if (!free_idx.empty()) {
            const int nf = static_cast<int>(free_idx.size());
            Mat JJf(nf, nf);
            Vec rf(nf);
            for (int a = 0; a < nf; ++a) {
                rf[a] = rhs[free_idx[a]];
                for (int c = 0; c < nf; ++c) JJf(a, c) = JJ(free_idx[a], free_idx[c]);
            }
            JJf.diagonal().array() += nu + reg0;
            Vec df = JJf.ldlt().solve(rf);
            for (int a = 0; a < nf; ++a) dz[free_idx[a]] = df[a];
        } else {
            stat = true;
            break;
        }
        bool accepted = false;
        double alpha = 1.0;
        for (int ls = 0; ls < 30; ++ls) {
            Point cand = evaluate(spec, clamp_to_bounds(p.z + alpha * dz, spec.lower, spec.upper));
            if (cand.valid()) {
                const double vc = viol2(cand);
                if (vc < v - 1e-16) {
                    const double drop = v - vc;
                    p = std::move(cand);
                    v = vc;
                    accepted = true;
                    nu = std::max(nu * 0.3, 1e-10);
                    slow_progress = drop < 1e-10 * std::max(1.0, v) ? slow_progress + 1 : 0;
                    break;
                }
            }
            alpha *= 0.5;
        }
        z = p.z;
        if (!accepted) {
            nu *= 10.0;
            if (nu > 1e8) {
                stat = true;
                break;
            }
        } else if (slow_progress >= 8) {
            stat = true;
            break;
        }
    }
    z = p.z;
    if (stationary) *stationary = stat;
    return std::max(p.eq_res(), p.in_viol());
}

/// Drives already-small residuals of the equalities and of violated
/// inequality rows towards zero without disturbing the objective. Steps are
/// of the order of the residual itself. A second phase corrects remaining
/// inequality violations inside the null space of the equality Jacobian, so
/// an equality residual floor (e.g. a barely-reachable terminal constraint)
/// cannot block inequality satisfaction.
inline void polish_constraints(const NlpSpec& spec, Vec& z, double target = 1e-11,
                               int max_iter = 12) {
    Vec g(spec.dim);
    Mat J_eq(spec.n_eq, spec.dim), J_in(spec.n_ineq, spec.dim);

    // Min-norm correction towards the constraint manifold, via a
    // rank-revealing least-squares solve: residual components along
    // numerically null directions are unreachable and get ignored instead
    // of blowing the step up.
    auto min_norm_step = [&](const Point& p, bool keep_eq, Vec& dz) -> bool {
        // Near-active inequality rows are pinned (target: stay / return to
        // the boundary) so an equality correction cannot push them out.
        std::vector<int> act;
        for (int i = 0; i < spec.n_ineq; ++i) {
            if (p.c_in[i] > -1e-7) act.push_back(i);
        }
        const int rows = spec.n_eq + static_cast<int>(act.size());
        if (rows == 0) return false;
        spec.derivs(p.z, g, J_eq, J_in);
        Mat J(rows, spec.dim);
        Vec r(rows);
        if (spec.n_eq) {
            J.topRows(spec.n_eq) = J_eq;
            // keep_eq: hold the equality residual where it is (target
            // change zero) and repair only the inequality rows.
            r.head(spec.n_eq) = keep_eq ? Vec(Vec::Zero(spec.n_eq)) : p.c_eq;
        }
        for (std::size_t k = 0; k < act.size(); ++k) {
            J.row(spec.n_eq + static_cast<int>(k)) = J_in.row(act[k]);
            r[spec.n_eq + static_cast<int>(k)] = std::max(p.c_in[act[k]], 0.0);
        }
        Eigen::CompleteOrthogonalDecomposition<Mat> cod(J);
        cod.setThreshold(1e-9);
        dz = cod.solve(-r);
        return dz.allFinite();
    };

    // Phase 1: joint reduction of all residuals, with backtracking.
    Point p = evaluate(spec, z);
    if (!p.valid()) return;
    if (std::max(p.eq_res(), p.in_viol()) > 1e-3) return;  // only final refinement
    Vec dz;
    for (int it = 0; it < max_iter; ++it) {
        const double res = std::max(p.eq_res(), p.in_viol());
        if (res <= target) break;
        if (!min_norm_step(p, /*keep_eq=*/false, dz)) break;
        bool accepted = false;
        double alpha = 1.0;
        for (int ls = 0; ls < 8; ++ls) {
            Point q = evaluate(spec, clamp_to_bounds(p.z + alpha * dz, spec.lower, spec.upper));
            if (q.valid() && std::max(q.eq_res(), q.in_viol()) < res) {
                p = std::move(q);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
    }

    // Phase 2: inequality repair in the equality null space.
    for (int it = 0; it < max_iter; ++it) {
        if (p.in_viol() <= target) break;
        const double in_old = p.in_viol();
        const double eq_old = p.eq_res();
        if (!min_norm_step(p, /*keep_eq=*/true, dz)) break;
        bool accepted = false;
        double alpha = 1.0;
        for (int ls = 0; ls < 8; ++ls) {
            Point q = evaluate(spec, clamp_to_bounds(p.z + alpha * dz, spec.lower, spec.upper));
            // The null-space step keeps equalities to first order; allow
            // only the second-order drift.
            if (q.valid() && q.in_viol() < in_old && q.eq_res() <= eq_old + 1e-9) {
                p = std::move(q);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
    }
    z = p.z;
}

inline void check_gradients(const NlpSpec& spec, const Vec& z) {
    Vec g(spec.dim);
    Mat J_eq(spec.n_eq, spec.dim), J_in(spec.n_ineq, spec.dim);
    spec.derivs(z, g, J_eq, J_in);
    Point base = evaluate(spec, z);
    for (int i = 0; i < spec.dim; ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(z[i]));
        Vec zp = z, zm = z;
        zp[i] += h;
        zm[i] -= h;
        Point pp = evaluate(spec, zp);
        Point pm = evaluate(spec, zm);
        const double fd = (pp.f - pm.f) / (2.0 * h);
        if (std::abs(fd - g[i]) > 1e-4 * std::max(1.0, std::abs(fd))) {
            throw std::logic_error("gradient check failed for objective, component " +
                                   std::to_string(i));
        }
        for (int r = 0; r < spec.n_eq; ++r) {
            const double fdc = (pp.c_eq[r] - pm.c_eq[r]) / (2.0 * h);
            if (std::abs(fdc - J_eq(r, i)) > 1e-4 * std::max(1.0, std::abs(fdc))) {
                throw std::logic_error("gradient check failed for equality row " +
                                       std::to_string(r));
            }
        }
        for (int r = 0; r < spec.n_ineq; ++r) {
            const double fdc = (pp.c_in[r] - pm.c_in[r]) / (2.0 * h);
            if (std::abs(fdc - J_in(r, i)) > 1e-4 * std::max(1.0, std::abs(fdc))) {
                throw std::logic_error("gradient check failed for inequality row " +
                                       std::to_string(r));
            }
        }
    }
    (void)base;
}

}  // namespace detail

/// Bound-constrained augmented-Lagrangian solver with a projected
/// quasi-Newton (BFGS) inner loop. Deterministic for identical inputs.
///
/// Feasible iterates are tracked along the way; the returned point is never
/// worse than the best feasible point encountered, so a feasible starting
/// point can never yield an infeasible outcome.
inline NlpResult solve_nlp(const NlpSpec& spec, const Vec& z0_in, const SolverConfig& cfg = {}) {
    using namespace detail;
    NlpResult out;
    Vec lo = spec.lower.size() ? spec.lower : Vec::Constant(spec.dim, -kInf);
    Vec hi = spec.upper.size() ? spec.upper : Vec::Constant(spec.dim, kInf);
    NlpSpec sp = spec;
    sp.lower = lo;
    sp.upper = hi;

    Vec z = clamp_to_bounds(z0_in, lo, hi);
    if (cfg.debug_check_gradients) check_gradients(sp, z);

    Point p = evaluate(sp, z);
    if (!p.valid()) {
        out.z = z;
        out.status = NlpStatus::NumericError;
        return out;
    }
    // Warm-start conditioning: a shifted previous solution is feasible up to
    // small drift; polishing it here lets the feasible-start guarantees
    // engage.
    {
        const double v0 = std::max(p.eq_res(), p.in_viol());
        if (v0 > 0.0 && v0 <= 1e-3) {
            polish_constraints(sp, z, 1e-12);
            Point q = evaluate(sp, z);
            if (q.valid() && std::max(q.eq_res(), q.in_viol()) <= v0) {
                p = std::move(q);
            } else {
                z = p.z;
            }
        }
    }

    // Iterates within feasibility tolerance, kept as a rescue in case the
    // outer loop terminates away from the feasible set. Their objectives are
    // biased low by the constraint slack, so they never override an exactly
    // converged point.
    std::optional<Point> best_feasible;
    auto consider_feasible = [&](const Point& q) {
        if (q.eq_res() <= cfg.tol_eq && q.in_viol() <= cfg.tol_con) {
            if (!best_feasible || q.f < best_feasible->f) best_feasible = q;
        }
    };
    const Point p_init = p;
    const bool init_feasible = p.eq_res() <= cfg.tol_eq && p.in_viol() <= cfg.tol_con;
    consider_feasible(p);

    Vec lambda = Vec::Zero(sp.n_eq);
    Vec mu = Vec::Zero(sp.n_ineq);
    double rho = cfg.penalty_init;
    double omega = 1e-2;                       // inner stationarity target
    double eta = std::max(1e-2, 0.1 * std::max(p.eq_res(), p.in_viol()));

    Vec g(sp.dim);
    Mat J_eq(sp.n_eq, sp.dim), J_in(sp.n_ineq, sp.dim);
    bool converged = false;
    double pg_final = kInf;

    // Least-squares multiplier estimate at the starting point, restricted to
    // the components strictly inside the bounds. Keeps the merit minimizer
    // near an (almost) feasible warm start instead of letting the first
    // weakly-penalized subproblem wander off the constraint manifold.
    {
        sp.derivs(p.z, g, J_eq, J_in);
        std::vector<int> act;
        for (int i = 0; i < sp.n_ineq; ++i) {
            if (p.c_in[i] > -1e-6) act.push_back(i);
        }
        std::vector<int> free_idx;
        for (int i = 0; i < sp.dim; ++i) {
            const double span = std::max(1.0, std::abs(p.z[i]));
            if (p.z[i] > lo[i] + 1e-9 * span && p.z[i] < hi[i] - 1e-9 * span) {
                free_idx.push_back(i);
            }
        }
        const int k = sp.n_eq + static_cast<int>(act.size());
        if (k > 0 && !free_idx.empty()) {
            Mat Jf(k, free_idx.size());
            Vec gf(free_idx.size());
            for (std::size_t c = 0; c < free_idx.size(); ++c) {
                gf[c] = g[free_idx[c]];
                for (int r = 0; r < sp.n_eq; ++r) Jf(r, c) = J_eq(r, free_idx[c]);
                for (std::size_t a = 0; a < act.size(); ++a) {
                    Jf(sp.n_eq + a, c) = J_in(act[a], free_idx[c]);
                }
            }
            Mat JJt = Jf * Jf.transpose();
            JJt.diagonal().array() += 1e-10 * std::max(1.0, JJt.diagonal().maxCoeff());
            Vec y = JJt.ldlt().solve(-(Jf * gf));
            if (y.allFinite()) {
                for (int r = 0; r < sp.n_eq; ++r) {
                    lambda[r] = std::clamp(y[r], -1e8, 1e8);
                }
                for (std::size_t a = 0; a < act.size(); ++a) {
                    mu[act[a]] = std::clamp(std::max(0.0, y[sp.n_eq + a]), 0.0, 1e8);
                }
            }
        }
    }

    for (int outer = 0; outer < cfg.max_outer && !converged; ++outer) {
        out.outer_iters = outer + 1;
        const Point p_outer = p;
        const double v_outer = std::max(p_outer.eq_res(), p_outer.in_viol());
        sp.derivs(p.z, g, J_eq, J_in);
        Vec gm = al_gradient(p, g, J_eq, J_in, lambda, mu, rho);
        double merit = al_merit(p, lambda, mu, rho);
        Mat Hinv = Mat::Identity(sp.dim, sp.dim);

        for (int inner = 0; inner < cfg.max_inner; ++inner) {
            ++out.inner_iters;
            // Projected-gradient stationarity over the box.
            Vec zproj = clamp_to_bounds(p.z - gm, lo, hi);
            const double pg = (p.z - zproj).lpNorm<Eigen::Infinity>();
            if (pg <= omega) break;

            // Free/active split at the bounds.
            Vec gmask = gm;
            for (int i = 0; i < sp.dim; ++i) {
                const double span = std::max(1.0, std::abs(p.z[i]));
                const bool at_lo = p.z[i] <= lo[i] + 1e-12 * span && gm[i] > 0.0;
                const bool at_hi = p.z[i] >= hi[i] - 1e-12 * span && gm[i] < 0.0;
                if (at_lo || at_hi) gmask[i] = 0.0;
            }
            Vec d = -(Hinv * gmask);
            for (int i = 0; i < sp.dim; ++i) {
                if (gmask[i] == 0.0) d[i] = 0.0;
            }
            if (d.dot(gm) >= -1e-14 * d.norm() * gm.norm()) d = -gmask;
            if (d.lpNorm<Eigen::Infinity>() == 0.0) break;

            // Backtracking Armijo search along the projected path.
            double alpha = 1.0;
            bool accepted = false;
            Point cand;
            for (int ls = 0; ls < 55; ++ls) {
                Vec z_new = clamp_to_bounds(p.z + alpha * d, lo, hi);
                cand = evaluate(sp, z_new);
                if (cand.valid()) {
                    const double m_new = al_merit(cand, lambda, mu, rho);
                    const double slope = gm.dot(z_new - p.z);
                    if (m_new <= merit + 1e-4 * slope && m_new < merit + 1e-16 * std::abs(merit)) {
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if (!accepted) break;  // line-search stall: inner loop done

            sp.derivs(cand.z, g, J_eq, J_in);
            Vec gm_new = al_gradient(cand, g, J_eq, J_in, lambda, mu, rho);
            Vec s = cand.z - p.z;
            Vec y = gm_new - gm;
            const double sy = s.dot(y);
            if (sy > 1e-12 * s.norm() * y.norm()) {
                // Inverse BFGS update.
                Vec Hy = Hinv * y;
                const double yHy = y.dot(Hy);
                Hinv += ((sy + yHy) / (sy * sy)) * (s * s.transpose()) -
                        (Hy * s.transpose() + s * Hy.transpose()) / sy;
            }
            p = std::move(cand);
            gm = std::move(gm_new);
            merit = al_merit(p, lambda, mu, rho);
            consider_feasible(p);
        }

        const double v_eq = p.eq_res();
        const double v_in = p.in_viol();
        Vec zproj = clamp_to_bounds(p.z - gm, lo, hi);
        pg_final = (p.z - zproj).lpNorm<Eigen::Infinity>();
        if (cfg.verbosity > 0) {
            std::printf("[al] outer=%d f=%.6e eq=%.2e in=%.2e pg=%.2e rho=%.1e\n", outer, p.f,
                        v_eq, v_in, pg_final, rho);
        }
        // Rewind safeguard: if the subproblem blew the violation up by an
        // order of magnitude, the penalty was too weak — retry from where
        // this outer iteration started.
        const double v_now = std::max(v_eq, v_in);
        if (v_now > std::max(10.0 * v_outer, 1e-3) && v_now > eta && rho < 1e12) {
            p = p_outer;
            rho *= cfg.penalty_growth;
            continue;
        }
        if (v_eq <= std::max(cfg.tol_eq, eta) && v_in <= std::max(cfg.tol_con, eta)) {
            lambda += rho * p.c_eq;
            for (int i = 0; i < sp.n_ineq; ++i) mu[i] = std::max(0.0, mu[i] + rho * p.c_in[i]);
            if (v_eq <= cfg.tol_eq && v_in <= 1e2 * cfg.tol_con &&
                pg_final <= cfg.tol_stationarity) {
                converged = true;
            }
            eta = std::max(0.1 * eta, 0.1 * cfg.tol_con);
            omega = std::max(0.2 * omega, cfg.tol_stationarity);
        } else {
            if (rho >= 1e12) break;
            rho *= cfg.penalty_growth;
            omega = std::max(omega, 1e-3);
        }
    }

    // Final refinement of the constraint residuals.
    Vec z_fin = p.z;
    polish_constraints(sp, z_fin, 1e-11);
    Point fin = evaluate(sp, z_fin);
    if (fin.valid()) {
        consider_feasible(fin);
        p = fin;
    }

    const bool final_feasible = p.eq_res() <= cfg.tol_eq && p.in_viol() <= cfg.tol_con;
    bool used_fallback = false;
    if (final_feasible) {
        // Warm-start dominance: a feasible starting point is never beaten.
        if (init_feasible && p_init.f < p.f) {
            p = p_init;
            used_fallback = true;
        }
    } else if (best_feasible) {
        p = *best_feasible;
        used_fallback = true;
    }

    // Whatever is returned gets its residuals polished: downstream warm
    // starts shift this solution and need headroom below the tolerances.
    if (used_fallback) {
        Vec zf = p.z;
        polish_constraints(sp, zf, 1e-11);
        Point q = evaluate(sp, zf);
        if (q.valid() && std::max(q.eq_res(), q.in_viol()) <=
                             std::max(p.eq_res(), p.in_viol())) {
            p = std::move(q);
        }
    }

    out.z = p.z;
    out.value = p.f;
    out.eq_residual = p.eq_res();
    out.ineq_violation = p.in_viol();
    out.stationarity = pg_final;
    if (p.eq_res() <= cfg.tol_eq && p.in_viol() <= cfg.tol_con) {
        out.status =
            (converged && !used_fallback) ? NlpStatus::Optimal : NlpStatus::FeasibleSuboptimal;
        return out;
    }

    // Feasibility restoration: decide between infeasible and failure.
    Vec z_rest = p.z;
    bool stationary = false;
    const double v_rest = restore_feasibility(sp, z_rest, 400, &stationary);
    polish_constraints(sp, z_rest, 1e-11);
    Point rest = evaluate(sp, z_rest);
    if (rest.valid() && rest.eq_res() <= cfg.tol_eq && rest.in_viol() <= cfg.tol_con) {
        out.z = rest.z;
        out.value = rest.f;
        out.eq_residual = rest.eq_res();
        out.ineq_violation = rest.in_viol();
        out.status = NlpStatus::FeasibleSuboptimal;
        return out;
    }
    if (v_rest > 1e-4 && stationary) {
        out.status = NlpStatus::Infeasible;
    } else {
        out.status = NlpStatus::Failure;
    }
    return out;
}

}  // namespace gtmpc

#endif  // GTMPC_NLP_HPP
