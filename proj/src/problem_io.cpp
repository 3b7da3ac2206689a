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

#include "pathopt/problem_io.hpp"

#include <fstream>
#include <sstream>

namespace pathopt {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& key, const std::string& what) {
    throw ProblemError("key '" + key + "': " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) {
        schema_error(path + key, "missing");
    }
    return obj.at(key);
}

double number(const json& v, const std::string& key) {
    if (!v.is_number()) {
        schema_error(key, "expected a number");
    }
    return v.get<double>();
}

int integer(const json& v, const std::string& key) {
    if (!v.is_number_integer()) {
        schema_error(key, "expected an integer");
    }
    return v.get<int>();
}

std::string text(const json& v, const std::string& key) {
    if (!v.is_string()) {
        schema_error(key, "expected a string");
    }
    return v.get<std::string>();
}

// A scalar applies to every control; an array gives one value per control.
std::vector<double> per_control(const json& v, int n_u, const std::string& key) {
    if (v.is_number()) {
        return std::vector<double>(static_cast<std::size_t>(n_u), v.get<double>());
    }
    if (!v.is_array() || static_cast<int>(v.size()) != n_u) {
        schema_error(key, "expected a number or an array of " + std::to_string(n_u) + " numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(number(v[i], key + "[" + std::to_string(i) + "]"));
    }
    return out;
}

Expr formula(const std::string& src, int n_x, int n_u, const std::string& key) {
    try {
        return parse(src, n_x, n_u);
    } catch (const ParseError& e) {
        schema_error(key, std::string("cannot parse formula: ") + e.what());
    }
}

}  // namespace

BoundMethod parse_method(const std::string& tag) {
    if (tag == "tb" || tag == "taylor-bernstein") {
        return BoundMethod::TaylorBernstein;
    }
    if (tag == "tm" || tag == "taylor-model") {
        return BoundMethod::TaylorModel;
    }
    throw ProblemError("unknown bound method '" + tag + "' (expected tb or tm)");
}

LoadedProblem parse_problem(const json& doc, const LoadOptions& opts) {
    if (!doc.is_object()) {
        throw ProblemError("problem document must be a JSON object");
    }
    LoadedProblem out;
    out.source = doc;
    ProblemSpec& spec = out.spec;
    spec.name = doc.contains("name") ? text(doc.at("name"), "name") : std::string("problem");

    const json& states = require(doc, "states", "");
    if (!states.is_array() || states.empty()) {
        schema_error("states", "expected a non-empty array of names");
    }
    for (std::size_t i = 0; i < states.size(); ++i) {
        out.state_names.push_back(text(states[i], "states[" + std::to_string(i) + "]"));
    }
    const int n_plain = static_cast<int>(states.size());

    const json& controls = require(doc, "controls", "");
    const int segments = integer(require(controls, "segments", "controls."), "controls.segments");
    if (segments < 1) {
        schema_error("controls.segments", "must be at least 1");
    }
    int n_u = 1;
    if (controls.contains("count")) {
        n_u = integer(controls.at("count"), "controls.count");
    } else if (controls.contains("lower") && controls.at("lower").is_array()) {
        n_u = static_cast<int>(controls.at("lower").size());
    }
    if (n_u < 1) {
        schema_error("controls", "need at least one control");
    }
    spec.n_u = n_u;
    spec.u_lower = per_control(require(controls, "lower", "controls."), n_u, "controls.lower");
    spec.u_upper = per_control(require(controls, "upper", "controls."), n_u, "controls.upper");

    const bool has_integral = doc.contains("integral_cost") && !doc.at("integral_cost").is_null();
    spec.n_x = n_plain + (has_integral ? 1 : 0);

    const json& dynamics = require(doc, "dynamics", "");
    if (!dynamics.is_array() || static_cast<int>(dynamics.size()) != n_plain) {
        schema_error("dynamics", "expected one formula per state");
    }
    for (std::size_t i = 0; i < dynamics.size(); ++i) {
        const std::string key = "dynamics[" + std::to_string(i) + "]";
        const std::string src = text(dynamics[i], key);
        spec.dynamics.push_back(formula(src, n_plain, n_u, key));
        spec.dynamics_text.push_back(src);
    }

    const json& x0 = require(doc, "x0", "");
    if (!x0.is_array() || static_cast<int>(x0.size()) != n_plain) {
        schema_error("x0", "expected one value per state");
    }
    for (std::size_t i = 0; i < x0.size(); ++i) {
        spec.x0.push_back(number(x0[i], "x0[" + std::to_string(i) + "]"));
    }

    const json& horizon = require(doc, "horizon", "");
    const double t0 = number(require(horizon, "t0", "horizon."), "horizon.t0");
    const double tf = number(require(horizon, "tf", "horizon."), "horizon.tf");
    if (!(tf > t0)) {
        schema_error("horizon", "tf must exceed t0");
    }
    spec.breakpoints = ControlSchedule::uniform_breakpoints(t0, tf, segments);

    Expr objective;
    std::string objective_text;
    if (doc.contains("objective") && !doc.at("objective").is_null()) {
        objective_text = text(require(doc.at("objective"), "expr", "objective."), "objective.expr");
        objective = formula(objective_text, n_plain, 0, "objective.expr");
    } else if (!has_integral) {
        schema_error("objective", "missing (and no integral_cost given)");
    }

    if (has_integral) {
        IntegralCost ic;
        ic.text = text(require(doc.at("integral_cost"), "expr", "integral_cost."), "integral_cost.expr");
        ic.integrand = formula(ic.text, n_plain, n_u, "integral_cost.expr");
        ic.state = n_plain;
        spec.dynamics.push_back(ic.integrand);
        spec.dynamics_text.push_back(ic.text);
        spec.x0.push_back(0.0);
        out.state_names.push_back("integral_cost");
        objective = objective_text.empty() ? Expr::state(n_plain) : objective + Expr::state(n_plain);
        objective_text = objective_text.empty()
                             ? "x" + std::to_string(n_plain + 1)
                             : "(" + objective_text + ") + x" + std::to_string(n_plain + 1);
        out.integral = ic;
    }
    spec.objective = objective;
    spec.objective_text = objective_text;

    if (doc.contains("bound")) {
        const json& b = doc.at("bound");
        if (b.contains("q")) spec.q = integer(b.at("q"), "bound.q");
        if (b.contains("r")) spec.r = integer(b.at("r"), "bound.r");
        if (b.contains("rho")) spec.rho = number(b.at("rho"), "bound.rho");
    }
    if (doc.contains("tolerances")) {
        const json& tol = doc.at("tolerances");
        if (tol.contains("eps_stat")) spec.eps_stat = number(tol.at("eps_stat"), "tolerances.eps_stat");
        if (tol.contains("eps_act")) spec.eps_act = number(tol.at("eps_act"), "tolerances.eps_act");
    }

    const json& constraints = doc.contains("constraints") ? doc.at("constraints") : json::array();
    if (!constraints.is_array() || constraints.empty()) {
        schema_error("constraints", "expected a non-empty array");
    }
    std::vector<std::size_t> to_estimate;
    for (std::size_t j = 0; j < constraints.size(); ++j) {
        const std::string key = "constraints[" + std::to_string(j) + "]";
        PathConstraint pc;
        pc.text = text(require(constraints[j], "expr", key + "."), key + ".expr");
        pc.h = formula(pc.text, n_plain, n_u, key + ".expr");
        const bool estimate = !constraints[j].contains("b_upper") ||
                              (constraints[j].at("b_upper").is_string() &&
                               constraints[j].at("b_upper").get<std::string>() == "auto");
        if (!estimate) {
            pc.b_upper = number(constraints[j].at("b_upper"), key + ".b_upper");
        } else {
            to_estimate.push_back(j);
        }
        out.b_upper_estimated.push_back(estimate);
        spec.constraints.push_back(std::move(pc));
    }

    try {
        spec.validate();
        for (std::size_t j : to_estimate) {
            spec.constraints[j].b_upper =
                estimate_b_upper(spec, static_cast<int>(j), opts.estimate_samples, opts.seed + j);
        }
    } catch (const std::invalid_argument& e) {
        throw ProblemError(e.what());
    }
    return out;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ProblemError(path + ": cannot open");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ProblemError(path + ": " + e.what());
    }
}

LoadedProblem load_problem(const std::string& path, const LoadOptions& opts) {
    const json doc = read_json(path);
    try {
        return parse_problem(doc, opts);
    } catch (const ProblemError& e) {
        throw ProblemError(path + ": " + e.what());
    }
}

void write_json(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error(path + ": cannot write");
    }
    out << doc.dump(2) << '\n';
    if (!out) {
        throw std::runtime_error(path + ": write failed");
    }
}

json report_to_json(const SolveReport& report, const LoadedProblem& problem, const SolveConfig& config) {
    const ProblemSpec& spec = problem.spec;
    json doc;
    doc["problem"] = spec.name;
    doc["method"] = to_string(report.method);
    doc["converged"] = report.converged;
    doc["message"] = report.message;
    doc["cost"] = report.cost;
    doc["iterations"] = report.history.size();
    doc["constraint_counts"] = report.constraint_counts;
    int total = 0;
    for (int c : report.constraint_counts) {
        total += c;
    }
    doc["constraint_count"] = total;
    doc["certificate"] = {{"points", 10000}, {"max_h", report.certificate}};
    json trace = json::array();
    json records = json::array();
    for (const IterationRecord& r : report.history) {
        trace.push_back(r.stationarity);
        json rec;
        rec["k"] = r.k;
        rec["case"] = to_string(r.step);
        rec["nlp_status"] = r.nlp_status;
        rec["nlp_iterations"] = r.nlp_iterations;
        rec["constraint_counts"] = r.constraint_counts;
        rec["cost"] = r.cost;
        rec["stationarity"] = r.stationarity;
        rec["complementary"] = r.complementary;
        rec["certificate"] = r.certificate;
        rec["active"] = r.active.size();
        rec["max_width"] = r.max_width;
        rec["wall_time"] = r.wall_time;
        rec["u"] = r.u;
        records.push_back(std::move(rec));
    }
    doc["stationarity_trace"] = trace;
    doc["history"] = records;
    doc["u"] = report.u;
    doc["wall_time"] = report.wall_time;

    json cfg;
    cfg["problem_file"] = config.problem_path;
    cfg["method"] = to_string(config.method);
    cfg["q"] = spec.q;
    cfg["r"] = spec.r;
    cfg["rho"] = spec.rho;
    cfg["eps_stat"] = spec.eps_stat;
    cfg["eps_act"] = spec.eps_act;
    cfg["max_iters"] = config.max_iters;
    cfg["initial_splits"] = config.initial_splits;
    cfg["seed"] = config.seed;
    json bu = json::array();
    for (std::size_t j = 0; j < spec.constraints.size(); ++j) {
        bu.push_back({{"expr", spec.constraints[j].text},
                      {"b_upper", spec.constraints[j].b_upper},
                      {"estimated", problem.b_upper_estimated.at(j)}});
    }
    cfg["constraints"] = bu;
    cfg["u0"] = config.u0;
    doc["config"] = cfg;
    return doc;
}

}  // namespace pathopt
