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
#ifndef GTMPC_QP_HPP
#define GTMPC_QP_HPP

#include <cmath>
#include <vector>

#include "gtmpc/common.hpp"
#include "gtmpc/nlp.hpp"

namespace gtmpc {

struct QpResult {
    Vec z;
    double value = 0.0;
    NlpStatus status = NlpStatus::Failure;
};

namespace detail {

/// Finds a point satisfying A z = b, C z <= d starting from z0 by
/// Gauss-Newton on the squared violation (convex for linear constraints).
inline bool qp_feasible_point(const Mat& A, const Vec& b, const Mat& C, const Vec& d, Vec& z) {
    const int dim = static_cast<int>(z.size());
    auto violation2 = [&](const Vec& y) {
        double v = A.rows() ? (A * y - b).squaredNorm() : 0.0;
        if (C.rows()) {
            Vec r = C * y - d;
            for (Eigen::Index i = 0; i < r.size(); ++i) {
                if (r[i] > 0.0) v += r[i] * r[i];
            }
        }
        return 0.5 * v;
    };
    for (int it = 0; it < 200; ++it) {
        Vec r_eq = A.rows() ? Vec(A * z - b) : Vec(0);
        Vec r_in = C.rows() ? Vec(C * z - d) : Vec(0);
        double viol = 0.0;
        if (r_eq.size()) viol = std::max(viol, r_eq.lpNorm<Eigen::Infinity>());
        for (Eigen::Index i = 0; i < r_in.size(); ++i) viol = std::max(viol, r_in[i]);
        if (viol <= 1e-10) return true;

        Mat JJ = Mat::Zero(dim, dim);
        Vec rhs = Vec::Zero(dim);
        if (A.rows()) {
            JJ.noalias() += A.transpose() * A;
            rhs.noalias() -= A.transpose() * r_eq;
        }
        for (Eigen::Index i = 0; i < r_in.size(); ++i) {
            if (r_in[i] > 0.0) {
                JJ.noalias() += C.row(i).transpose() * C.row(i);
                rhs.noalias() -= r_in[i] * C.row(i).transpose();
            }
        }
        if (rhs.lpNorm<Eigen::Infinity>() <= 1e-13) return false;  // stationary, infeasible
        JJ.diagonal().array() += 1e-12;
        Vec dz = JJ.ldlt().solve(rhs);
        const double v0 = violation2(z);
        double alpha = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 40; ++ls) {
            if (violation2(z + alpha * dz) < v0) {
                z += alpha * dz;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) return false;
    }
    return false;
}

}  // namespace detail

/// Dense convex QP   min 0.5 z'Hz + g'z  s.t.  A z = b,  C z <= d.
///
/// Primal active-set method with KKT subproblem solves. H is regularized by
/// +1e-9 I when the factorization requires it.
inline QpResult solve_qp(Mat H, const Vec& g, const Mat& A, const Vec& b, const Mat& C,
                         const Vec& d, const Vec& z0) {
    QpResult out;
    const int dim = static_cast<int>(z0.size());
    const int n_eq = static_cast<int>(A.rows());
    const int n_in = static_cast<int>(C.rows());
    H = 0.5 * (H + H.transpose().eval());  // symmetrize

    Vec z = z0;
    if (!detail::qp_feasible_point(A, b, C, d, z)) {
        out.z = z;
        out.status = NlpStatus::Infeasible;
        return out;
    }

    auto qp_value = [&](const Vec& y) { return 0.5 * y.dot(H * y) + g.dot(y); };

    std::vector<bool> active(n_in, false);
    for (int i = 0; i < n_in; ++i) {
        if (C.row(i) * z - d[i] > -1e-9) active[i] = true;
    }

    double reg = 0.0;
    const int max_iter = 4 * (dim + n_in + n_eq) + 16;
    for (int it = 0; it < max_iter; ++it) {
        std::vector<int> W;
        for (int i = 0; i < n_in; ++i) {
            if (active[i]) W.push_back(i);
        }
        const int nw = static_cast<int>(W.size());
        const int kdim = dim + n_eq + nw;
        Mat K = Mat::Zero(kdim, kdim);
        K.topLeftCorner(dim, dim) = H;
        K.topLeftCorner(dim, dim).diagonal().array() += reg;
        if (n_eq) {
            K.block(dim, 0, n_eq, dim) = A;
            K.block(0, dim, dim, n_eq) = A.transpose();
        }
        for (int k = 0; k < nw; ++k) {
            K.row(dim + n_eq + k).head(dim) = C.row(W[k]);
            K.col(dim + n_eq + k).head(dim) = C.row(W[k]).transpose();
        }
        Vec rhs = Vec::Zero(kdim);
        rhs.head(dim) = -(H * z + g) - reg * z;

        Eigen::ColPivHouseholderQR<Mat> qr(K);
        Vec sol = qr.solve(rhs);
        if (!sol.allFinite() || (K * sol - rhs).lpNorm<Eigen::Infinity>() >
                                    1e-7 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>())) {
            if (reg == 0.0) {
                reg = 1e-9;
                continue;
            }
            out.z = z;
            out.status = NlpStatus::Failure;
            return out;
        }
        Vec p = sol.head(dim);

        if (p.lpNorm<Eigen::Infinity>() <= 1e-11 * std::max(1.0, z.lpNorm<Eigen::Infinity>())) {
            // Check multipliers of the working set.
            int worst = -1;
            double worst_val = -1e-9;
            for (int k = 0; k < nw; ++k) {
                const double kappa = sol[dim + n_eq + k];
                if (kappa < worst_val) {
                    worst_val = kappa;
                    worst = W[k];
                }
            }
            if (worst < 0) {
                out.z = z;
                out.value = qp_value(z);
                out.status = NlpStatus::Optimal;
                return out;
            }
            active[worst] = false;
            continue;
        }

        // Step length limited by inactive constraints.
        double alpha = 1.0;
        int blocking = -1;
        for (int i = 0; i < n_in; ++i) {
            if (active[i]) continue;
            const double cp = C.row(i).dot(p);
            if (cp > 1e-13) {
                const double ai = (d[i] - C.row(i).dot(z)) / cp;
                if (ai < alpha) {
                    alpha = ai;
                    blocking = i;
                }
            }
        }
        z += std::max(alpha, 0.0) * p;
        if (blocking >= 0) active[blocking] = true;
    }
    out.z = z;
    out.value = qp_value(z);
    out.status = NlpStatus::Failure;
    return out;
}

/// Convenience overload without inequality constraints.
inline QpResult solve_qp(const Mat& H, const Vec& g, const Mat& A, const Vec& b, const Vec& z0) {
    return solve_qp(H, g, A, b, Mat(0, z0.size()), Vec(0), z0);
}

}  // namespace gtmpc

#endif  // GTMPC_QP_HPP
