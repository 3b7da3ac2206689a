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

// Command-line front end: solve, gap-study, rate-study, table.

#include <cstdint>
#include <exception>
#include <optional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pathopt/driver.hpp"
#include "pathopt/problem_io.hpp"
#include "pathopt/studies.hpp"

namespace {

constexpr int kConverged = 0;
constexpr int kConfigError = 1;
constexpr int kNotConverged = 2;
constexpr int kRuntimeFailure = 3;

struct SolveArgs {
    std::string problem;
    std::string method = "tb";
    std::string out;
    std::optional<int> q;
    std::optional<int> r;
    std::optional<double> rho;
    std::optional<double> eps_stat;
    std::optional<double> eps_act;
    int max_iters = 20;
    int initial_splits = 1;
    std::uint64_t seed = 1;
    std::vector<double> u0;
    bool quiet = false;
};

int cmd_solve(const SolveArgs& a) {
    pathopt::LoadedProblem problem;
    pathopt::DriverOptions opts;
    try {
        pathopt::LoadOptions lo;
        lo.seed = a.seed;
        problem = pathopt::load_problem(a.problem, lo);
        pathopt::ProblemSpec& spec = problem.spec;
        if (a.q) spec.q = *a.q;
        if (a.r) spec.r = *a.r;
        if (a.rho) spec.rho = *a.rho;
        if (a.eps_stat) spec.eps_stat = *a.eps_stat;
        if (a.eps_act) spec.eps_act = *a.eps_act;
        spec.validate();
        opts.method = pathopt::parse_method(a.method);
        if (a.max_iters < 1) {
            throw pathopt::ProblemError("--max-iters must be at least 1");
        }
        opts.max_iters = a.max_iters;
        if (a.initial_splits < 1) {
            throw pathopt::ProblemError("--initial-splits must be at least 1");
        }
        opts.initial_splits = a.initial_splits;
        opts.u0 = a.u0;
        if (opts.u0.size() == 1 && spec.decision_count() > 1) {
            opts.u0.assign(static_cast<std::size_t>(spec.decision_count()), a.u0.front());
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }

    pathopt::SolveReport report;
    try {
        report = pathopt::run(problem.spec, opts);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << '\n';
        return kRuntimeFailure;
    }

    pathopt::SolveConfig cfg;
    cfg.problem_path = a.problem;
    cfg.method = opts.method;
    cfg.max_iters = opts.max_iters;
    cfg.initial_splits = opts.initial_splits;
    cfg.seed = a.seed;
    cfg.u0 = a.u0;
    try {
        pathopt::write_json(a.out, pathopt::report_to_json(report, problem, cfg));
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << '\n';
        return kRuntimeFailure;
    }
    if (!a.quiet) {
        std::cout << problem.spec.name << " [" << pathopt::to_string(report.method) << "] "
                  << (report.converged ? "converged" : "not converged") << " cost=" << report.cost
                  << " iterations=" << report.history.size() << " constraints=";
        for (std::size_t j = 0; j < report.constraint_counts.size(); ++j) {
            std::cout << (j ? "+" : "") << report.constraint_counts[j];
        }
        std::cout << " time=" << report.wall_time << "s\n";
        if (!report.converged) {
            std::cout << report.message << '\n';
        }
    }
    return report.converged ? kConverged : kNotConverged;
}

template <class F>
int guarded(F&& f) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << '\n';
        return kRuntimeFailure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Path-constrained dynamic optimization with smooth Taylor-Bernstein bounds"};
    app.require_subcommand(1);

    SolveArgs sa;
    CLI::App* solve = app.add_subcommand("solve", "Solve a problem file and write a JSON report");
    solve->add_option("--problem", sa.problem, "Problem file (JSON)")->required();
    solve->add_option("--method", sa.method, "Bound method: tb or tm")
        ->check(CLI::IsMember({"tb", "tm"}));
    solve->add_option("--out", sa.out, "Report file")->required();
    solve->add_option("--q", sa.q, "Taylor order");
    solve->add_option("--r", sa.r, "Bernstein degree");
    solve->add_option("--rho", sa.rho, "Log-sum-exp sharpness");
    solve->add_option("--eps-stat", sa.eps_stat, "Stationarity tolerance");
    solve->add_option("--eps-act", sa.eps_act, "Active-set tolerance");
    solve->add_option("--max-iters", sa.max_iters, "Outer iteration limit");
    solve->add_option("--initial-splits", sa.initial_splits, "Subintervals per control segment at the first iteration");
    solve->add_option("--seed", sa.seed, "Seed for sampled B_U estimates");
    solve->add_option("--u0", sa.u0, "Start controls: one value for all, or one per decision");
    solve->add_flag("--quiet", sa.quiet, "Suppress the summary line");

    std::string gap_problem;
    std::string gap_out;
    int gap_samples = 200;
    std::uint64_t gap_seed = 1;
    CLI::App* gap = app.add_subcommand("gap-study", "Sample overestimation gaps of both bounds");
    gap->add_option("--problem", gap_problem, "Problem file (JSON)")->required();
    gap->add_option("--samples", gap_samples, "Number of random control vectors");
    gap->add_option("--seed", gap_seed, "RNG seed (mt19937_64)");
    gap->add_option("--out", gap_out, "CSV file")->required();

    std::string rate_out;
    CLI::App* rate = app.add_subcommand("rate-study", "Enclosure error vs interval width");
    rate->add_option("--out", rate_out, "CSV file")->required();

    std::vector<std::string> table_reports;
    std::string table_out;
    CLI::App* table = app.add_subcommand("table", "Aggregate solve reports into a comparison table");
    table->add_option("--reports", table_reports, "Report files")->required();
    table->add_option("--out", table_out, "CSV file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kConverged : kConfigError;
    }

    if (*solve) {
        return cmd_solve(sa);
    }
    if (*gap) {
        return guarded([&] {
            if (gap_samples < 1) {
                throw std::invalid_argument("--samples must be at least 1");
            }
            const pathopt::LoadedProblem p = pathopt::load_problem(gap_problem);
            const pathopt::GapStudy s = pathopt::gap_study(p.spec, gap_samples, gap_seed);
            pathopt::write_gap_csv(gap_out, s);
            std::cout << p.spec.name << " median gap tb=" << s.tb.median << " tm=" << s.tm.median
                      << " iqr tb=" << s.tb.q3 - s.tb.q1 << " tm=" << s.tm.q3 - s.tm.q1 << '\n';
            return kConverged;
        });
    }
    if (*rate) {
        return guarded([&] {
            const pathopt::RateStudy s = pathopt::rate_study();
            pathopt::write_rate_csv(rate_out, s);
            for (const pathopt::RateFit& f : s.fits) {
                std::cout << f.polynomial << " slope bernstein=" << f.bernstein_slope
                          << " interval=" << f.interval_slope << '\n';
            }
            return kConverged;
        });
    }
    return guarded([&] {
        pathopt::write_table_csv(table_out, pathopt::build_table(table_reports));
        return kConverged;
    });
}
