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
#include <cstdio>
#include <fstream>
#include <string>

#include "pathopt/problem_io.hpp"
#include "pathopt/studies.hpp"

using namespace pathopt;
using nlohmann::json;

namespace {

std::string problem_path(const std::string& name) {
    return std::string(PATHOPT_SOURCE_DIR) + "/problems/" + name + ".json";
}

json minimal() {
    return json::parse(R"({
      "name": "tiny",
      "states": ["x1"],
      "controls": {"segments": 4, "lower": -1, "upper": 1},
      "dynamics": ["u1"],
      "x0": [0],
      "horizon": {"t0": 0, "tf": 1},
      "objective": {"expr": "-x1"},
      "constraints": [{"expr": "x1 - 0.5", "b_upper": 0}]
    })");
}

void strip_wall_time(json& j) {
    if (j.is_object()) {
        j.erase("wall_time");
        for (auto& [k, v] : j.items()) strip_wall_time(v);
    } else if (j.is_array()) {
        for (auto& v : j) strip_wall_time(v);
    }
}

}  // namespace

TEST_CASE("bundled fixtures load and validate") {
    const LoadedProblem p1 = load_problem(problem_path("example1"));
    CHECK(p1.spec.n_x == 3);
    CHECK(p1.spec.segments() == 30);
    CHECK(p1.spec.constraints[0].b_upper == 260);
    CHECK_FALSE(p1.integral.has_value());
    const LoadedProblem p2 = load_problem(problem_path("example2"));
    CHECK(p2.spec.n_x == 3);
    CHECK(p2.spec.x0 == std::vector<double>{0, -1, 0});
    REQUIRE(p2.integral.has_value());
    CHECK(p2.integral->state == 2);
    CHECK(p2.spec.constraints[0].b_upper == 33);
    const LoadedProblem p3 = load_problem(problem_path("example3"));
    CHECK(p3.spec.constraints.size() == 2);
    CHECK(p3.spec.constraints[0].b_upper == 750);
    CHECK(p3.spec.constraints[1].b_upper == 20);
    CHECK(p3.spec.tf() == 2.9);
    CHECK(eval(p3.spec.constraints[0].h, Bindings{p3.spec.x0, std::vector<double>{0.0}, 0.0}) ==
          doctest::Approx(-3.0));
}

TEST_CASE("schema errors name the key") {
    json doc = minimal();
    CHECK_NOTHROW(parse_problem(doc));
    doc.erase("dynamics");
    CHECK_THROWS_WITH_AS(parse_problem(doc), doctest::Contains("dynamics"), ProblemError);
    doc = minimal();
    doc["dynamics"] = {"u1 +"};
    CHECK_THROWS_WITH_AS(parse_problem(doc), doctest::Contains("dynamics[0]"), ProblemError);
    doc = minimal();
    doc["x0"] = {0, 1};
    CHECK_THROWS_WITH_AS(parse_problem(doc), doctest::Contains("x0"), ProblemError);
    doc = minimal();
    doc["objective"]["expr"] = "u1";
    CHECK_THROWS_AS(parse_problem(doc), ProblemError);
    doc = minimal();
    doc["bound"] = {{"rho", 100}};
    CHECK_THROWS_WITH_AS(parse_problem(doc), doctest::Contains("smoothing bias"), ProblemError);
    doc = minimal();
    doc["constraints"][0]["b_upper"] = -1;
    CHECK_THROWS_AS(parse_problem(doc), ProblemError);
    CHECK_THROWS_AS(load_problem("/nonexistent/problem.json"), ProblemError);
    CHECK_THROWS_AS(parse_method("bernstein"), ProblemError);
    CHECK(parse_method("tm") == BoundMethod::TaylorModel);
}

TEST_CASE("omitted remainder constant is estimated deterministically") {
    json doc = minimal();
    doc["constraints"][0]["b_upper"] = "auto";
    LoadOptions lo;
    lo.seed = 3;
    const LoadedProblem a = parse_problem(doc, lo);
    const LoadedProblem b = parse_problem(doc, lo);
    CHECK(a.b_upper_estimated[0]);
    CHECK(a.spec.constraints[0].b_upper == b.spec.constraints[0].b_upper);
    // h''' = 0 along x' = u with piecewise-constant u.
    CHECK(a.spec.constraints[0].b_upper == 0.0);
}

TEST_CASE("integral cost matches trapezoidal quadrature") {
    const LoadedProblem p = load_problem(problem_path("example2"));
    const SolveReport r = run(p.spec);
    REQUIRE(r.converged);
    const double quad = trapezoid_cost(p.spec, p.integral->integrand, r.u);
    CHECK(std::abs(quad - r.cost) <= 1e-6);
}

TEST_CASE("reports are deterministic apart from wall time") {
    const LoadedProblem p = load_problem(problem_path("example1"));
    SolveConfig cfg;
    cfg.problem_path = "example1.json";
    json a = report_to_json(run(p.spec), p, cfg);
    json b = report_to_json(run(p.spec), p, cfg);
    for (const char* key : {"cost", "iterations", "history", "constraint_counts", "stationarity_trace",
                            "certificate", "method", "config", "converged"}) {
        CHECK(a.contains(key));
    }
    CHECK(a["method"] == "taylor-bernstein");
    CHECK(a["config"]["rho"] == 1500.0);
    strip_wall_time(a);
    strip_wall_time(b);
    CHECK(a.dump() == b.dump());
}

TEST_CASE("summary statistics") {
    const Summary s = summarize({4, 1, 3, 2, 5});
    CHECK(s.count == 5);
    CHECK(s.median == 3);
    CHECK(s.mean == 3);
    CHECK(s.q1 == 2);
    CHECK(s.q3 == 4);
    CHECK(s.iqr() == 2);
    CHECK(summarize({}).count == 0);
    CHECK(summarize({1, 2}).median == 1.5);
}

TEST_CASE("gap study") {
    const LoadedProblem p = load_problem(problem_path("example1"));
    const GapStudy a = gap_study(p.spec, 1, 42);
    const GapStudy b = gap_study(p.spec, 1, 42);
    REQUIRE(a.rows.size() == 1);
    CHECK(a.rows[0].gap_tb == b.rows[0].gap_tb);
    CHECK(a.rows[0].gap_tm == b.rows[0].gap_tm);
    const GapStudy many = gap_study(p.spec, 20, 1);
    for (const GapRow& r : many.rows) {
        CHECK(r.ok);
        CHECK(r.gap_tb > 0.0);
        CHECK(r.gap_tb < r.gap_tm);
    }
    CHECK(many.tb.count == 20);
    CHECK_THROWS_AS(gap_study(p.spec, 0, 1), std::invalid_argument);
}

TEST_CASE("rate study") {
    const RateStudy s = rate_study();
    for (const RateRow& r : s.rows) {
        if (r.polynomial == "constant") {
            CHECK(r.bernstein_error == 0.0);
            CHECK(r.interval_error == 0.0);
        }
    }
    REQUIRE(s.fits.size() == 2);
    for (const RateFit& f : s.fits) {
        CHECK(f.bernstein_slope >= 1.7);
        CHECK(f.bernstein_slope <= 2.3);
        CHECK(f.interval_slope >= 0.7);
        CHECK(f.interval_slope <= 1.3);
    }
    const std::vector<double> x = {1, 2, 4, 8};
    const std::vector<double> y = {3, 12, 48, 192};
    CHECK(loglog_slope(x, y) == doctest::Approx(2.0));
    CHECK(natural_enclosure(std::vector<double>{0, 0, 1}, Interval(-1, 2)) == Interval(-2, 4));
}

TEST_CASE("comparison table") {
    const LoadedProblem p = load_problem(problem_path("example3"));
    SolveConfig cfg;
    const std::string path = "test_io_report.json";
    write_json(path, report_to_json(run(p.spec), p, cfg));
    const auto rows = build_table({path});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].problem == "example3");
    CHECK(rows[0].method == "taylor-bernstein");
    CHECK(rows[0].constraints.find('+') != std::string::npos);
    write_json(path, json{{"problem", "x"}});
    CHECK_THROWS_WITH_AS(build_table({path}), doctest::Contains(path.c_str()), std::invalid_argument);
    std::remove(path.c_str());
    CHECK_THROWS_AS(build_table({}), std::invalid_argument);
}
