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
#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gtmpc/nlp.hpp"
#include "gtmpc/qp.hpp"

using namespace gtmpc;

namespace {

/// NlpSpec for min 0.5 z'Hz + g'z with linear constraints A z = b, C z <= d.
NlpSpec quadratic_spec(const Mat& H, const Vec& g, const Mat& A, const Vec& b, const Mat& C,
                       const Vec& d) {
    NlpSpec spec;
    spec.dim = static_cast<int>(H.rows());
    spec.n_eq = static_cast<int>(A.rows());
    spec.n_ineq = static_cast<int>(C.rows());
    spec.eval = [=](const Vec& z, double& f, Vec& c_eq, Vec& c_in) {
        f = 0.5 * z.dot(H * z) + g.dot(z);
        if (A.rows()) c_eq = A * z - b;
        if (C.rows()) c_in = C * z - d;
    };
    spec.derivs = [=](const Vec& z, Vec& grad, Mat& J_eq, Mat& J_in) {
        grad = H * z + g;
        J_eq = A;
        J_in = C;
    };
    spec.lower = Vec::Constant(spec.dim, -kInf);
    spec.upper = Vec::Constant(spec.dim, kInf);
    return spec;
}

}  // namespace

TEST_CASE("nlp scalar quadratic") {
    NlpSpec spec;
    spec.dim = 1;
    spec.eval = [](const Vec& z, double& f, Vec&, Vec&) { f = (z[0] - 3.0) * (z[0] - 3.0); };
    spec.derivs = [](const Vec& z, Vec& g, Mat&, Mat&) {
        g.resize(1);
        g[0] = 2.0 * (z[0] - 3.0);
    };
    spec.lower = Vec::Constant(1, -kInf);
    spec.upper = Vec::Constant(1, kInf);
    NlpResult res = solve_nlp(spec, Vec::Zero(1));
    REQUIRE(res.status == NlpStatus::Optimal);
    REQUIRE(res.z[0] == Catch::Approx(3.0).margin(1e-7));
    REQUIRE(res.value == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("nlp equality constrained") {
    Mat H = 2.0 * Mat::Identity(2, 2);  // z1^2 + z2^2
    Mat A(1, 2);
    A << 1, 1;
    Vec b(1);
    b << 1;
    NlpSpec spec = quadratic_spec(H, Vec::Zero(2), A, b, Mat(0, 2), Vec(0));
    NlpResult res = solve_nlp(spec, Vec::Zero(2));
    REQUIRE(res.status == NlpStatus::Optimal);
    REQUIRE(res.z[0] == Catch::Approx(0.5).margin(1e-6));
    REQUIRE(res.z[1] == Catch::Approx(0.5).margin(1e-6));
    REQUIRE(res.value == Catch::Approx(0.5).margin(1e-6));
    REQUIRE(res.eq_residual <= 1e-6);
}

TEST_CASE("nlp active bound") {
    NlpSpec spec;
    spec.dim = 1;
    spec.eval = [](const Vec& z, double& f, Vec&, Vec&) { f = z[0] * z[0]; };
    spec.derivs = [](const Vec& z, Vec& g, Mat&, Mat&) {
        g.resize(1);
        g[0] = 2.0 * z[0];
    };
    spec.lower = Vec::Constant(1, 1.0);
    spec.upper = Vec::Constant(1, kInf);
    NlpResult res = solve_nlp(spec, Vec::Constant(1, 5.0));
    REQUIRE(res.status == NlpStatus::Optimal);
    REQUIRE(res.z[0] == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(res.value == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("nlp inequality row") {
    // min z^2 s.t. 1 - z <= 0.
    Mat H = 2.0 * Mat::Identity(1, 1);
    Mat C(1, 1);
    C << -1;
    Vec d(1);
    d << -1;
    NlpSpec spec = quadratic_spec(H, Vec::Zero(1), Mat(0, 1), Vec(0), C, d);
    NlpResult res = solve_nlp(spec, Vec::Constant(1, 4.0));
    REQUIRE(res.status == NlpStatus::Optimal);
    REQUIRE(res.z[0] == Catch::Approx(1.0).margin(1e-7));
    REQUIRE(res.ineq_violation <= 1e-8);
}

TEST_CASE("nlp determinism") {
    Mat H(3, 3);
    H << 4, 1, 0, 1, 3, 1, 0, 1, 2;
    Vec g(3);
    g << -1, 2, 0.5;
    Mat C(2, 3);
    C << 1, 1, 1, -1, 0, 2;
    Vec d(2);
    d << 1.0, 0.5;
    NlpSpec spec = quadratic_spec(H, g, Mat(0, 3), Vec(0), C, d);
    Vec z0(3);
    z0 << 0.3, -0.7, 1.1;
    NlpResult a = solve_nlp(spec, z0);
    NlpResult b = solve_nlp(spec, z0);
    REQUIRE(a.status == b.status);
    REQUIRE(a.inner_iters == b.inner_iters);
    REQUIRE((a.z - b.z).lpNorm<Eigen::Infinity>() == 0.0);
    REQUIRE(a.value == b.value);
}

TEST_CASE("nlp warm start dominance") {
    // Feasible initial point: solver must not declare infeasibility and the
    // returned objective can only improve on the starting one.
    Mat H = Mat::Identity(2, 2);
    Vec g(2);
    g << 3.0, -1.0;
    Mat C(1, 2);
    C << 1, 1;
    Vec d(1);
    d << -2.0;  // z1 + z2 <= -2
    NlpSpec spec = quadratic_spec(H, g, Mat(0, 2), Vec(0), C, d);
    Vec z0(2);
    z0 << -3.0, -1.0;
    double f0;
    Vec ce(0), ci(1);
    spec.eval(z0, f0, ce, ci);
    REQUIRE(ci[0] <= 0.0);
    NlpResult res = solve_nlp(spec, z0);
    REQUIRE(res.status != NlpStatus::Infeasible);
    REQUIRE(res.status != NlpStatus::Failure);
    REQUIRE(res.value <= f0 + 1e-12);
}

TEST_CASE("nlp infeasible detection") {
    // z >= 1 (bound) conflicts with z <= -1 (row).
    Mat H = 2.0 * Mat::Identity(1, 1);
    Mat C(1, 1);
    C << 1;
    Vec d(1);
    d << -1;
    NlpSpec spec = quadratic_spec(H, Vec::Zero(1), Mat(0, 1), Vec(0), C, d);
    spec.lower = Vec::Constant(1, 1.0);
    spec.upper = Vec::Constant(1, kInf);
    NlpResult res = solve_nlp(spec, Vec::Constant(1, 2.0));
    REQUIRE(res.status == NlpStatus::Infeasible);
}

TEST_CASE("nlp gradient debug mode") {
    Mat H = 2.0 * Mat::Identity(2, 2);
    NlpSpec good = quadratic_spec(H, Vec::Zero(2), Mat(0, 2), Vec(0), Mat(0, 2), Vec(0));
    SolverConfig cfg;
    cfg.debug_check_gradients = true;
    REQUIRE_NOTHROW(solve_nlp(good, Vec::Constant(2, 1.0), cfg));

    NlpSpec bad = good;
    bad.derivs = [](const Vec& z, Vec& g, Mat&, Mat&) { g = Vec::Constant(2, 42.0); };
    REQUIRE_THROWS_AS(solve_nlp(bad, Vec::Constant(2, 1.0), cfg), std::logic_error);
}

TEST_CASE("qp equality only") {
    Mat H = Mat::Identity(3, 3);
    Mat A(1, 3);
    A << 1, 0, 0;
    Vec b(1);
    b << 1;
    QpResult res = solve_qp(H, Vec::Zero(3), A, b, Vec::Zero(3));
    REQUIRE(res.status == NlpStatus::Optimal);
    REQUIRE(res.z[0] == Catch::Approx(1.0).margin(1e-10));
    REQUIRE(res.z[1] == Catch::Approx(0.0).margin(1e-10));
    REQUIRE(res.z[2] == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("qp random vs kkt oracle") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        Mat M(3, 3);
        for (int i = 0; i < 9; ++i) M(i / 3, i % 3) = dist(rng);
        Mat H = M * M.transpose() + 0.5 * Mat::Identity(3, 3);
        Vec g(3);
        for (int i = 0; i < 3; ++i) g[i] = dist(rng);
        Mat A(1, 3);
        for (int i = 0; i < 3; ++i) A(0, i) = dist(rng);
        Vec b(1);
        b << dist(rng);

        // Oracle: dense KKT linear solve for the equality-constrained QP.
        Mat K = Mat::Zero(4, 4);
        K.topLeftCorner(3, 3) = H;
        K.block(3, 0, 1, 3) = A;
        K.block(0, 3, 3, 1) = A.transpose();
        Vec rhs(4);
        rhs << -g, b;
        Vec kkt = K.colPivHouseholderQr().solve(rhs);

        QpResult res = solve_qp(H, g, A, b, Vec::Zero(3));
        REQUIRE(res.status == NlpStatus::Optimal);
        REQUIRE((res.z - kkt.head(3)).lpNorm<Eigen::Infinity>() < 1e-8);
    }
}

TEST_CASE("qp diagonal box equals clamp") {
    // Box-only QP with diagonal H: solution is the componentwise clamp of
    // the unconstrained minimizer.
    Vec hdiag(3), g(3), lo(3), hi(3);
    hdiag << 2.0, 4.0, 1.0;
    g << -10.0, 1.0, 0.2;
    lo << -1.0, -2.0, -0.5;
    hi << 1.0, 2.0, 0.5;
    Mat H = hdiag.asDiagonal();
    Mat C(6, 3);
    C << Mat::Identity(3, 3), -Mat::Identity(3, 3);
    Vec d(6);
    d << hi, -lo;
    QpResult res = solve_qp(H, g, Mat(0, 3), Vec(0), C, d, Vec::Zero(3));
    REQUIRE(res.status == NlpStatus::Optimal);
    for (int i = 0; i < 3; ++i) {
        const double unc = -g[i] / hdiag[i];
        const double clamped = std::min(std::max(unc, lo[i]), hi[i]);
        REQUIRE(res.z[i] == Catch::Approx(clamped).margin(1e-9));
    }
}

TEST_CASE("qp infeasible equalities") {
    Mat A(2, 2);
    A << 1, 0, 1, 0;
    Vec b(2);
    b << 0, 1;  // z1 = 0 and z1 = 1
    QpResult res = solve_qp(Mat::Identity(2, 2), Vec::Zero(2), A, b, Vec::Zero(2));
    REQUIRE(res.status == NlpStatus::Infeasible);
}

TEST_CASE("nlp matches qp on convex problems") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Mat M(4, 4);
    for (int i = 0; i < 16; ++i) M(i / 4, i % 4) = dist(rng);
    Mat H = M * M.transpose() + Mat::Identity(4, 4);
    Vec g(4);
    for (int i = 0; i < 4; ++i) g[i] = dist(rng);
    Mat A(1, 4);
    A << 1, 1, 1, 1;
    Vec b(1);
    b << 2;
    Mat C(2, 4);
    C << 1, 0, 0, 0, 0, -1, 0, 0;
    Vec d(2);
    d << 0.1, 0.3;

    QpResult qp = solve_qp(H, g, A, b, C, d, Vec::Zero(4));
    NlpSpec spec = quadratic_spec(H, g, A, b, C, d);
    NlpResult nlp = solve_nlp(spec, Vec::Zero(4));
    REQUIRE(qp.status == NlpStatus::Optimal);
    REQUIRE(nlp.status == NlpStatus::Optimal);
    REQUIRE(nlp.value == Catch::Approx(qp.value).margin(1e-6));
}
