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

#include "pathopt/ode.hpp"

using namespace pathopt;

namespace {

std::vector<Expr> parse_all(const std::vector<std::string>& text, int n_x, int n_u) {
    std::vector<Expr> out;
    for (const auto& s : text) {
        out.push_back(parse(s, n_x, n_u));
    }
    return out;
}

ControlSchedule schedule(double t0, double tf, int segments, std::vector<double> values) {
    ControlSchedule s;
    s.breakpoints = ControlSchedule::uniform_breakpoints(t0, tf, segments);
    s.per_segment = static_cast<int>(values.size()) / segments;
    s.values = std::move(values);
    return s;
}

const std::vector<std::string> kVanDerPol = {"(1 - x2^2)*x1 - x2 + u1", "x1", "x1^2 + x2^2 + u1^2"};

std::vector<double> random_controls(int count, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(lo, hi);
    std::vector<double> v(static_cast<std::size_t>(count));
    for (double& x : v) {
        x = unif(rng);
    }
    return v;
}

}  // namespace

TEST_CASE("constant dynamics keep the state") {
    OdeModel m(parse_all({"0"}, 1, 0), 0);
    ControlSchedule s = schedule(0.0, 2.0, 1, {});
    s.per_segment = 0;
    const std::vector<double> x0 = {1.7};
    const Trajectory tr = integrate(m, x0, s);
    for (double t : {0.0, 0.3, 1.1, 2.0}) {
        CHECK(tr.state(t)[0] == doctest::Approx(1.7).epsilon(1e-14));
    }
}

TEST_CASE("exponential decay matches the analytic solution") {
    OdeModel m(parse_all({"-x1"}, 1, 0), 0);
    ControlSchedule s = schedule(0.0, 1.0, 1, {});
    s.per_segment = 0;
    const std::vector<double> x0 = {1.0};
    const Trajectory tr = integrate(m, x0, s);
    CHECK(std::abs(tr.state(1.0)[0] - std::exp(-1.0)) <= 10 * 1e-8);
    for (double t = 0.0; t <= 1.0; t += 0.0137) {
        CHECK(std::abs(tr.state(t)[0] - std::exp(-t)) <= 10 * 1e-8);
    }
}

TEST_CASE("steps never straddle a control breakpoint") {
    OdeModel m(parse_all(kVanDerPol, 3, 1), 1);
    const ControlSchedule s = schedule(0.0, 5.0, 30, random_controls(30, -0.3, 1.0, 3));
    const std::vector<double> x0 = {0.0, 1.0, 0.0};
    const Trajectory tr = integrate(m, x0, s);
    const std::vector<double> mesh = tr.mesh();
    for (double bp : s.breakpoints) {
        CHECK(std::find(mesh.begin(), mesh.end(), bp) != mesh.end());
    }
}

TEST_CASE("dense output is continuous across accepted steps") {
    OdeModel m(parse_all(kVanDerPol, 3, 1), 1);
    const ControlSchedule s = schedule(0.0, 5.0, 30, random_controls(30, -0.3, 1.0, 5));
    const std::vector<double> x0 = {0.0, 1.0, 0.0};
    const Trajectory tr = integrate(m, x0, s);
    const std::vector<double> mesh = tr.mesh();
    for (std::size_t k = 1; k + 1 < mesh.size(); ++k) {
        const double t = mesh[k];
        const Eigen::VectorXd left = tr.state(std::nextafter(t, -1e300));
        const Eigen::VectorXd right = tr.state(t);
        CHECK((left - right).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + right.lpNorm<Eigen::Infinity>()));
    }
}

TEST_CASE("van der Pol with zero control agrees with a tighter re-integration") {
    OdeModel m(parse_all(kVanDerPol, 3, 1), 1);
    const ControlSchedule s = schedule(0.0, 5.0, 30, std::vector<double>(30, 0.0));
    const std::vector<double> x0 = {0.0, 1.0, 0.0};
    const Trajectory a = integrate(m, x0, s);
    const Trajectory b = integrate(m, x0, s, {0.5e-8, 0.5e-8, 200000});
    for (double t = 0.0; t <= 5.0; t += 0.25) {
        CHECK((a.state(t) - b.state(t)).lpNorm<Eigen::Infinity>() <= 10 * 1e-8);
    }
}

TEST_CASE("tightening the tolerance reduces the error") {
    OdeModel m(parse_all(kVanDerPol, 3, 1), 1);
    const ControlSchedule s = schedule(0.0, 5.0, 30, random_controls(30, -0.3, 1.0, 9));
    const std::vector<double> x0 = {0.0, 1.0, 0.0};
    const Trajectory ref = integrate(m, x0, s, {1e-12, 1e-12, 1000000});
    auto deviation = [&](double tol) {
        const Trajectory tr = integrate(m, x0, s, {tol, tol, 1000000});
        double e = 0.0;
        for (double t = 0.0; t <= 5.0; t += 0.01) {
            e = std::max(e, (tr.state(t) - ref.state(t)).lpNorm<Eigen::Infinity>());
        }
        return e;
    };
    const double e1 = deviation(1e-6);
    const double e2 = deviation(0.5e-6);
    MESSAGE("deviation ratio under tolerance halving: " << e1 / e2);
    CHECK(e1 / e2 > 1.3);
}

TEST_CASE("sensitivities of x' = u and x' = -x + u") {
    {
        OdeModel m(parse_all({"u1"}, 1, 1), 1);
        const ControlSchedule s = schedule(0.0, 2.0, 1, {0.7});
        const std::vector<double> x0 = {0.0};
        const Trajectory tr = integrate_with_sensitivities(m, x0, s);
        for (double t : {0.0, 0.5, 1.3, 2.0}) {
            CHECK(tr.state(t)[0] == doctest::Approx(0.7 * t).epsilon(1e-12));
            CHECK(tr.sensitivity(t)(0, 0) == doctest::Approx(t).epsilon(1e-12));
        }
    }
    {
        OdeModel m(parse_all({"-x1 + u1"}, 1, 1), 1);
        const ControlSchedule s = schedule(0.0, 2.0, 1, {1.3});
        const std::vector<double> x0 = {0.0};
        const Trajectory tr = integrate_with_sensitivities(m, x0, s);
        for (double t : {0.0, 0.5, 1.3, 2.0}) {
            CHECK(std::abs(tr.sensitivity(t)(0, 0) - (1.0 - std::exp(-t))) < 1e-7);
        }
    }
}

TEST_CASE("segment sensitivities vanish before their segment starts") {
    OdeModel m(parse_all({"-x1 + u1"}, 1, 1), 1);
    const ControlSchedule s = schedule(0.0, 3.0, 3, {1.0, 2.0, 3.0});
    const std::vector<double> x0 = {0.5};
    const Trajectory tr = integrate_with_sensitivities(m, x0, s);
    const Eigen::MatrixXd sens = tr.sensitivity(1.5);
    CHECK(sens(0, 0) == doctest::Approx((1.0 - std::exp(-1.0)) * std::exp(-0.5)).epsilon(1e-6));
    CHECK(sens(0, 1) == doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-6));
    CHECK(sens(0, 2) == 0.0);
}

TEST_CASE("van der Pol sensitivities match finite differences") {
    OdeModel m(parse_all(kVanDerPol, 3, 1), 1);
    const std::vector<double> u = random_controls(30, -0.3, 1.0, 21);
    const ControlSchedule s = schedule(0.0, 5.0, 30, u);
    const std::vector<double> x0 = {0.0, 1.0, 0.0};
    const IntegrationOptions tight{1e-11, 1e-11, 1000000};
    const Trajectory tr = integrate_with_sensitivities(m, x0, s, tight);
    const double h = 1e-5;
    for (int k : {0, 7, 15, 29}) {
        ControlSchedule sp = s, sm = s;
        sp.values[static_cast<std::size_t>(k)] += h;
        sm.values[static_cast<std::size_t>(k)] -= h;
        const Trajectory tp = integrate(m, x0, sp, tight);
        const Trajectory tm = integrate(m, x0, sm, tight);
        for (double t : {1.0, 2.5, 5.0}) {
            const Eigen::VectorXd fd = (tp.state(t) - tm.state(t)) / (2 * h);
            const Eigen::VectorXd col = tr.sensitivity(t).col(k);
            CHECK((fd - col).lpNorm<Eigen::Infinity>() <= 1e-4 * std::max(1.0, col.lpNorm<Eigen::Infinity>()));
        }
    }
}

TEST_CASE("derivative vector at a midpoint") {
    SUBCASE("constant constraint") {
        OdeModel m(parse_all({"x1"}, 1, 0), 0);
        ControlSchedule s = schedule(0.0, 1.0, 1, {});
        s.per_segment = 0;
        const LieTable table(parse("2.5", 1, 0), m.dynamics(), 3, 0);
        const std::vector<double> x0 = {1.0};
        const Trajectory tr = integrate(m, x0, s);
        const std::vector<double> d = eval_D(tr, table, 0.4);
        CHECK(d[0] == 2.5);
        CHECK(d[1] == 0.0);
        CHECK(d[2] == 0.0);
    }
    SUBCASE("pure time dependence") {
        OdeModel m(parse_all({"x1"}, 1, 0), 0);
        ControlSchedule s = schedule(0.0, 1.0, 1, {});
        s.per_segment = 0;
        const LieTable table(parse("t", 1, 0), m.dynamics(), 3, 0);
        const std::vector<double> x0 = {1.0};
        const Trajectory tr = integrate(m, x0, s);
        const std::vector<double> d = eval_D(tr, table, 0.4);
        CHECK(d[0] == doctest::Approx(0.4));
        CHECK(d[1] == 1.0);
        CHECK(d[2] == 0.0);
    }
    SUBCASE("second benchmark constraint at c = 0.5") {
        OdeModel m(parse_all({"x2", "-x2 + u1"}, 2, 1), 1);
        const ControlSchedule s = schedule(0.0, 1.0, 20, random_controls(20, -20, 20, 4));
        const std::vector<double> x0 = {0.0, -1.0};
        const LieTable table(parse("x2 + 0.5 - 8*(t - 0.5)^2", 2, 1), m.dynamics(), 3, 1);
        const Trajectory tr = integrate(m, x0, s);
        const std::vector<double> d = eval_D(tr, table, 0.5);
        const Eigen::VectorXd x = tr.state(0.5);
        const double u = s.values[static_cast<std::size_t>(s.segment_of(0.5))];
        CHECK(d[0] == doctest::Approx(x[1] + 0.5).epsilon(1e-14));
        CHECK(d[1] == doctest::Approx(-x[1] + u).epsilon(1e-14));
    }
    SUBCASE("outside the horizon") {
        OdeModel m(parse_all({"x1"}, 1, 0), 0);
        ControlSchedule s = schedule(0.0, 1.0, 1, {});
        s.per_segment = 0;
        const LieTable table(parse("x1", 1, 0), m.dynamics(), 2, 0);
        const std::vector<double> x0 = {1.0};
        const Trajectory tr = integrate(m, x0, s);
        CHECK_THROWS_AS(eval_D(tr, table, 1.5), std::out_of_range);
    }
}

TEST_CASE("Lie derivatives match time derivatives along a trajectory") {
    OdeModel m(parse_all(kVanDerPol, 3, 1), 1);
    const ControlSchedule s = schedule(0.0, 5.0, 1, {0.4});
    const std::vector<double> x0 = {0.0, 1.0, 0.0};
    const Trajectory tr = integrate(m, x0, s, {1e-12, 1e-12, 1000000});
    const LieTable table(parse("-x1 - 0.4 + 0.1*t*x2", 3, 1), m.dynamics(), 3, 1);
    const double c = 2.3;
    const double h = 1e-3;
    auto val = [&](double t) { return eval_D(tr, table, t); };
    const auto d = val(c);
    // D_{i+1} is the time derivative of D_i along the trajectory.
    for (int i = 0; i + 1 < 3; ++i) {
        const double fd = (val(c + h)[static_cast<std::size_t>(i)] - val(c - h)[static_cast<std::size_t>(i)]) / (2 * h);
        CHECK(std::abs(fd - d[static_cast<std::size_t>(i + 1)]) <= 1e-4 * std::max(1.0, std::abs(fd)));
    }
}

TEST_CASE("Jacobian of the derivative vector") {
    SUBCASE("constraint independent of state and control") {
        OdeModel m(parse_all({"u1"}, 1, 1), 1);
        const ControlSchedule s = schedule(0.0, 1.0, 2, {0.3, -0.2});
        const LieTable table(parse("t^2", 1, 1), m.dynamics(), 3, 1);
        const std::vector<double> x0 = {0.0};
        const Trajectory tr = integrate_with_sensitivities(m, x0, s);
        CHECK(eval_gradD(tr, table, 0.7).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("x' = u, h = -x") {
        OdeModel m(parse_all({"u1"}, 1, 1), 1);
        const ControlSchedule s = schedule(0.0, 1.0, 1, {0.3});
        const LieTable table(parse("-x1", 1, 1), m.dynamics(), 2, 1);
        const std::vector<double> x0 = {0.0};
        const Trajectory tr = integrate_with_sensitivities(m, x0, s);
        const Eigen::MatrixXd g = eval_gradD(tr, table, 0.6);
        CHECK(g(0, 0) == doctest::Approx(-0.6).epsilon(1e-12));
        CHECK(g(1, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("missing sensitivities") {
        OdeModel m(parse_all({"u1"}, 1, 1), 1);
        const ControlSchedule s = schedule(0.0, 1.0, 1, {0.3});
        const LieTable table(parse("-x1", 1, 1), m.dynamics(), 2, 1);
        const std::vector<double> x0 = {0.0};
        const Trajectory tr = integrate(m, x0, s);
        CHECK_THROWS(eval_gradD(tr, table, 0.6));
    }
    SUBCASE("van der Pol against finite differences of the derivative vector") {
        OdeModel m(parse_all(kVanDerPol, 3, 1), 1);
        const std::vector<double> u = random_controls(30, -0.3, 1.0, 33);
        const ControlSchedule s = schedule(0.0, 5.0, 30, u);
        const std::vector<double> x0 = {0.0, 1.0, 0.0};
        const IntegrationOptions tight{1e-11, 1e-11, 1000000};
        const LieTable table(parse("-x1 - 0.4", 3, 1), m.dynamics(), 3, 1);
        const Trajectory tr = integrate_with_sensitivities(m, x0, s, tight);
        const double c = 3.1;
        const Eigen::MatrixXd g = eval_gradD(tr, table, c);
        const double h = 1e-5;
        for (int k : {3, 12, 18}) {
            ControlSchedule sp = s, sm = s;
            sp.values[static_cast<std::size_t>(k)] += h;
            sm.values[static_cast<std::size_t>(k)] -= h;
            const auto dp = eval_D(integrate(m, x0, sp, tight), table, c);
            const auto dm = eval_D(integrate(m, x0, sm, tight), table, c);
            for (int i = 0; i < 3; ++i) {
                const double fd = (dp[static_cast<std::size_t>(i)] - dm[static_cast<std::size_t>(i)]) / (2 * h);
                CHECK(std::abs(fd - g(i, k)) <= 1e-4 * std::max(1.0, std::abs(fd)));
            }
        }
    }
}

TEST_CASE("blow-up is reported with the last valid time") {
    OdeModel m(parse_all({"x1^2"}, 1, 0), 0);
    ControlSchedule s = schedule(0.0, 2.0, 1, {});
    s.per_segment = 0;
    const std::vector<double> x0 = {1.0};
    try {
        (void)integrate(m, x0, s);
        FAIL("expected an integration failure");
    } catch (const IntegrationError& e) {
        CHECK(e.last_time() < 1.01);
        CHECK(e.last_time() > 0.9);
    }
}
