/*
 Copyright 2026 The pathopt Authors

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

#include <doctest.h>

#include <cmath>
#include <random>

#include "pathopt/nlp.hpp"

using namespace pathopt;

namespace {

NlpProblem box_problem(int n, double lo, double hi) {
    NlpProblem p;
    p.n = n;
    p.lower = Eigen::VectorXd::Constant(n, lo);
    p.upper = Eigen::VectorXd::Constant(n, hi);
    p.start = Eigen::VectorXd::Zero(n);
    return p;
}

}  // namespace

TEST_CASE("min u^2 s.t. 1 - u <= 0") {
    NlpProblem p = box_problem(1, -10, 10);
    p.m = 1;
    p.evaluate = [](const Eigen::VectorXd& u, bool grad, NlpEvaluation& out) {
        out.f = u[0] * u[0];
        out.c = Eigen::VectorXd::Constant(1, 1.0 - u[0]);
        if (grad) {
            out.grad_f = Eigen::VectorXd::Constant(1, 2.0 * u[0]);
            out.jac = Eigen::MatrixXd::Constant(1, 1, -1.0);
        }
    };
    const NlpResult r = solve(p);
    REQUIRE(r.status == NlpStatus::Optimal);
    CHECK(r.u[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.lambda[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("unconstrained quadratic inside a box") {
    NlpProblem p = box_problem(1, -10, 10);
    p.evaluate = [](const Eigen::VectorXd& u, bool grad, NlpEvaluation& out) {
        out.f = (u[0] - 3.0) * (u[0] - 3.0);
        out.c.resize(0);
        if (grad) {
            out.grad_f = Eigen::VectorXd::Constant(1, 2.0 * (u[0] - 3.0));
            out.jac.resize(0, 1);
        }
    };
    const NlpResult r = solve(p);
    REQUIRE(r.status == NlpStatus::Optimal);
    CHECK(r.u[0] == doctest::Approx(3.0));
    CHECK(r.lambda.size() == 0);
}

TEST_CASE("contradictory constraints are certified infeasible") {
    NlpProblem p = box_problem(1, -10, 10);
    p.m = 2;
    p.evaluate = [](const Eigen::VectorXd& u, bool grad, NlpEvaluation& out) {
        out.f = u[0];
        out.c.resize(2);
        out.c << u[0] + 1.0, -u[0] + 1.0;  // u <= -1, u >= 1
        if (grad) {
            out.grad_f = Eigen::VectorXd::Constant(1, 1.0);
            out.jac.resize(2, 1);
            out.jac << 1.0, -1.0;
        }
    };
    const NlpResult r = solve(p);
    REQUIRE(r.status == NlpStatus::Infeasible);
    // Any u in [-1, 1] violates by exactly 2 in l1.
    CHECK(r.min_l1_violation == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("nonlinear infeasible set reports the minimal l1 violation") {
    // u1^2 + u2^2 <= 1 and u1 >= 3: minimal l1 violation is 2 at u = (1, 0).
    NlpProblem p = box_problem(2, -5, 5);
    p.m = 2;
    p.evaluate = [](const Eigen::VectorXd& u, bool grad, NlpEvaluation& out) {
        out.f = u[1] * u[1];
        out.c.resize(2);
        out.c << u.squaredNorm() - 1.0, 3.0 - u[0];
        if (grad) {
            out.grad_f.resize(2);
            out.grad_f << 0.0, 2.0 * u[1];
            out.jac.resize(2, 2);
            out.jac << 2.0 * u[0], 2.0 * u[1], -1.0, 0.0;
        }
    };
    const NlpResult r = solve(p);
    REQUIRE(r.status == NlpStatus::Infeasible);
    // On [1, 3] the violation is u1^2 - u1 + 2, increasing; below 1 it is
    // 3 - u1 > 2.
    CHECK(r.min_l1_violation == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("nonlinear program with curved active constraint") {
    // min -u1 - u2 s.t. u1^2 + u2^2 <= 2  ->  u = (1, 1), lambda = 1/2
    NlpProblem p = box_problem(2, -3, 3);
    p.m = 1;
    p.evaluate = [](const Eigen::VectorXd& u, bool grad, NlpEvaluation& out) {
        out.f = -u[0] - u[1];
        out.c = Eigen::VectorXd::Constant(1, u.squaredNorm() - 2.0);
        if (grad) {
            out.grad_f = Eigen::VectorXd::Constant(2, -1.0);
            out.jac = 2.0 * u.transpose();
        }
    };
    const NlpResult r = solve(p);
    REQUIRE(r.status == NlpStatus::Optimal);
    CHECK(r.u[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.u[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.lambda[0] == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("feasible start keeps every iterate feasible") {
    // Rosenbrock inside a disc, started at the origin.
    NlpProblem p = box_problem(2, -2, 2);
    p.m = 1;
    p.evaluate = [](const Eigen::VectorXd& u, bool grad, NlpEvaluation& out) {
        const double a = 1.0 - u[0];
        const double b = u[1] - u[0] * u[0];
        out.f = a * a + 100.0 * b * b;
        out.c = Eigen::VectorXd::Constant(1, u.squaredNorm() - 1.5);
        if (grad) {
            out.grad_f.resize(2);
            out.grad_f << -2.0 * a - 400.0 * u[0] * b, 200.0 * b;
            out.jac = 2.0 * u.transpose();
        }
    };
    const NlpResult r = solve(p);
    REQUIRE(r.status == NlpStatus::Optimal);
    for (double v : r.violation_trace) {
        CHECK(v <= 1e-6);
    }
    CHECK(r.max_violation <= 1e-8);
}

TEST_CASE("random convex QPs with planted KKT points") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.2, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 6;
        const int m = 2 * n;
        Eigen::MatrixXd q(n, n), a(m, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                q(i, j) = normal(rng);
            }
        }
        const Eigen::MatrixXd h = q * q.transpose() + Eigen::MatrixXd::Identity(n, n);
        Eigen::VectorXd xs(n), lam = Eigen::VectorXd::Zero(m), bvec(m);
        for (int i = 0; i < n; ++i) {
            xs[i] = normal(rng);
        }
        const int k = 1 + trial % n;
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) {
                a(i, j) = normal(rng);
            }
            bvec[i] = a.row(i).dot(xs) + (i < k ? 0.0 : unif(rng));
            if (i < k) {
                lam[i] = unif(rng);
            }
        }
        const Eigen::VectorXd g = -h * xs - a.transpose() * lam;
        NlpProblem p = box_problem(n, -100, 100);
        p.m = m;
        p.evaluate = [&](const Eigen::VectorXd& u, bool grad, NlpEvaluation& out) {
            out.f = 0.5 * u.dot(h * u) + g.dot(u);
            out.c = a * u - bvec;
            if (grad) {
                out.grad_f = h * u + g;
                out.jac = a;
            }
        };
        const NlpResult r = solve(p);
        REQUIRE(r.status == NlpStatus::Optimal);
        CHECK((r.u - xs).lpNorm<Eigen::Infinity>() < 1e-6);
        CHECK((r.lambda - lam).lpNorm<Eigen::Infinity>() < 1e-4);
    }
}

TEST_CASE("kkt residuals") {
    KktInput in;
    in.grad_objective = Eigen::VectorXd::Zero(2);
    in.grads = Eigen::MatrixXd::Zero(1, 2);
    in.values = Eigen::VectorXd::Constant(1, -0.5);
    in.lambda = Eigen::VectorXd::Zero(1);
    KktResiduals k = kkt_residuals(in);
    CHECK(k.stationarity == 0.0);
    CHECK(k.all_complementary);

    // h at the smoothing bias with the benchmark settings lies inside the band.
    in.values[0] = -std::log(3.0) / 1500.0;
    in.lambda[0] = 1.0;
    CHECK(kkt_residuals(in).complementarity[0]);

    in.values[0] = -2e-3;
    CHECK_FALSE(kkt_residuals(in).complementarity[0]);

    // A gradient pushing into an active lower bound is absorbed.
    KktInput box;
    box.grad_objective = Eigen::VectorXd::Constant(1, 3.0);
    box.grads = Eigen::MatrixXd::Zero(0, 1);
    box.values = Eigen::VectorXd::Zero(0);
    box.lambda = Eigen::VectorXd::Zero(0);
    box.u = Eigen::VectorXd::Constant(1, -1.0);
    box.lower = Eigen::VectorXd::Constant(1, -1.0);
    box.upper = Eigen::VectorXd::Constant(1, 1.0);
    CHECK(kkt_residuals(box).stationarity == 0.0);
    box.u[0] = 1.0;
    CHECK(kkt_residuals(box).stationarity == doctest::Approx(3.0));
}
