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

#ifndef PATHOPT_DRIVER_HPP
#define PATHOPT_DRIVER_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pathopt/bound.hpp"
#include "pathopt/expr.hpp"
#include "pathopt/interval.hpp"
#include "pathopt/nlp.hpp"
#include "pathopt/ode.hpp"

namespace pathopt {

struct PathConstraint {
    Expr h;            // feasible when h <= 0
    double b_upper = 0.0;
    std::string text;  // source formula, echoed in reports
};

// Control-parameterized problem: minimize objective(x(tf)) subject to
// x' = f(x, u, t), x(t0) = x0, h_j(x, u, t) <= 0 on [t0, tf], with u
// piecewise constant on `breakpoints` and inside [u_lower, u_upper].
struct ProblemSpec {
    std::string name;
    int n_x = 0;
    int n_u = 0;  // controls per segment
    std::vector<Expr> dynamics;
    std::vector<std::string> dynamics_text;
    std::vector<double> x0;
    std::vector<double> breakpoints;
    std::vector<double> u_lower;  // n_u
    std::vector<double> u_upper;  // n_u
    Expr objective;
    std::string objective_text;
    std::vector<PathConstraint> constraints;
    int q = 3;
    int r = 2;
    double rho = 1500.0;
    double eps_stat = 1e-3;
    double eps_act = 1e-3;

    int segments() const { return static_cast<int>(breakpoints.size()) - 1; }
    int decision_count() const { return segments() * n_u; }
    double t0() const { return breakpoints.front(); }
    double tf() const { return breakpoints.back(); }
    double smoothing_bias() const;
    BoundParams bound_params(int constraint) const;

    // Throws std::invalid_argument with a diagnostic, including when the
    // smoothing bias ln(r+1)/rho is not below eps_act.
    void validate() const;
};

struct Subinterval {
    Interval span;
    int segment = 0;
    int constraint = 0;
};

// Subintervals ordered by constraint, then time.
class Partition {
public:
    Partition() = default;
    explicit Partition(std::vector<Subinterval> items);

    const std::vector<Subinterval>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    const Subinterval& operator[](std::size_t i) const { return items_[i]; }
    std::vector<int> counts(int constraints) const;
    double max_width() const;

    // Replaces item i by `parts` equal pieces for each i with parts[i] > 1.
    Partition refine(const std::vector<int>& parts) const;

    // Throws std::logic_error unless every constraint's pieces tile
    // [t0, tf] with shared endpoints and stay inside their segment.
    void check_covering(const ProblemSpec& spec) const;

private:
    std::vector<Subinterval> items_;
};

// `per_segment` equal subintervals per control segment per constraint.
Partition initial_partition(const ProblemSpec& spec, int per_segment = 1);

// N = max(2, ceil(width / (2^q q! (eps_act - bias) / B_U)^(1/q))); 2 when
// B_U = 0. Throws std::invalid_argument when eps_act <= bias.
int subdivision_count(double width, int q, double b_upper, double eps_act, double bias);

// Indices with bound value >= -tol.
std::vector<int> detect_active(const std::vector<double>& bound_values, double tol = 1e-6);

enum class StepCase { Terminate, Refine, Bisect, Failed };
const char* to_string(StepCase c);

// Builds the finite-dimensional problem for one partition and evaluates
// bounds, midpoint data and certificates.
class BoundEvaluator {
public:
    BoundEvaluator(const ProblemSpec& spec, BoundMethod method, IntegrationOptions integration = {});
    ~BoundEvaluator();
    BoundEvaluator(const BoundEvaluator&) = delete;
    BoundEvaluator& operator=(const BoundEvaluator&) = delete;

    const ProblemSpec& spec() const;
    BoundMethod method() const;

    // NLP rows per subinterval: 1 for the Taylor-Bernstein bound, 2^(q-1)
    // for the Taylor-model baseline (one per smooth piece of its maximum).
    int rows_per_subinterval() const;

    NlpProblem make_problem(const Partition& partition, const Eigen::VectorXd& start);

    // Bound value per subinterval (max over the baseline's pieces).
    std::vector<double> bound_values(const Partition& partition, const Eigen::VectorXd& c) const;
    // Multiplier per subinterval (sum over its rows).
    std::vector<double> subinterval_multipliers(const Partition& partition,
                                                const Eigen::VectorXd& lambda) const;

    struct MidpointData {
        Eigen::VectorXd grad_objective;
        std::vector<double> h;      // h(u, c(T)) per subinterval
        Eigen::MatrixXd grad_h;     // subintervals x decisions
        double objective = 0.0;
    };
    MidpointData midpoint_data(const Partition& partition, const Eigen::VectorXd& u) const;

    double objective(const Eigen::VectorXd& u) const;

    // Max of h_j over `points` uniform times on [t0, tf], per constraint.
    std::vector<double> certificate(const Eigen::VectorXd& u, int points = 10000) const;

    // Bound for one subinterval given the derivative vector at its midpoint.
    double bound_value(int constraint, std::span<const double> d, double width) const;

    const LieTable& lie_table(int constraint) const;
    ControlSchedule schedule(const Eigen::VectorXd& u) const;
    const OdeModel& model() const;
    const IntegrationOptions& integration() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct TerminationCheck {
    double stationarity = 0.0;
    bool stationary = false;
    bool complementary = false;
    bool certified = false;
    std::vector<double> certificate;  // max h per constraint
    bool passed() const { return stationary && complementary && certified; }
};

struct IterateState {
    Eigen::VectorXd u;
    std::vector<double> multipliers;  // per subinterval
    BoundEvaluator::MidpointData midpoint;
    std::vector<double> certificate;
};

TerminationCheck check_termination(const ProblemSpec& spec, const IterateState& state,
                                   double multiplier_floor = 1e-10);

struct IterationRecord {
    int k = 0;
    StepCase step = StepCase::Failed;
    std::string nlp_status;
    int nlp_iterations = 0;
    std::vector<int> constraint_counts;  // per path constraint, at this iteration
    int constraint_count = 0;
    double cost = 0.0;
    double stationarity = 0.0;
    bool complementary = false;
    std::vector<double> certificate;  // empty unless the NLP reported optimal
    std::vector<int> active;          // subinterval indices
    double max_width = 0.0;
    double wall_time = 0.0;  // seconds, cumulative
    std::vector<double> u;
};

struct DriverOptions {
    BoundMethod method = BoundMethod::TaylorBernstein;
    int max_iters = 20;
    int initial_splits = 1;  // subintervals per control segment at k = 1
    double active_tol = 1e-6;
    double multiplier_floor = 1e-10;
    int certificate_points = 10000;
    IntegrationOptions integration;
    NlpOptions nlp;
    std::shared_ptr<NlpSolver> solver;  // null selects SqpSolver
    std::vector<double> u0;             // empty selects the box midpoint
};

struct SolveReport {
    bool converged = false;
    BoundMethod method = BoundMethod::TaylorBernstein;
    std::vector<IterationRecord> history;
    std::vector<double> u;
    double cost = 0.0;
    std::vector<int> constraint_counts;
    double stationarity = 0.0;
    std::vector<double> certificate;
    double wall_time = 0.0;
    std::string message;
};

std::vector<double> default_start(const ProblemSpec& spec);

SolveReport run(const ProblemSpec& spec, const DriverOptions& opts = {});

// Non-rigorous B_U estimate: max |L^q h| over random controls and a time
// grid, inflated by 1.5.
double estimate_b_upper(const ProblemSpec& spec, int constraint, int samples, std::uint64_t seed);

const char* to_string(BoundMethod m);

}  // namespace pathopt

#endif  // PATHOPT_DRIVER_HPP
