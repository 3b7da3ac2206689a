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

#ifndef PATHOPT_NLP_HPP
#define PATHOPT_NLP_HPP

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace pathopt {

struct NlpEvaluation {
    double f = 0.0;
    Eigen::VectorXd grad_f;  // n
    Eigen::VectorXd c;       // m, feasible when <= 0
    Eigen::MatrixXd jac;     // m x n, only filled when gradients are requested
};

// min f(u)  s.t.  c(u) <= 0,  lower <= u <= upper.
// `evaluate` may throw; a throw at a line-search trial point rejects the
// trial, a throw anywhere else propagates.
struct NlpProblem {
    int n = 0;
    int m = 0;
    std::function<void(const Eigen::VectorXd& u, bool with_gradients, NlpEvaluation& out)> evaluate;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    Eigen::VectorXd start;
};

enum class NlpStatus { Optimal, Infeasible, IterationLimit, Stalled };

const char* to_string(NlpStatus s);

struct NlpOptions {
    double tol = 1e-6;               // stationarity and complementarity
    double feas_tol = 1e-8;          // max constraint value at an optimal point
    double feasibility_guard = 1e-6; // once inside, trial points must stay below
    int max_iter = 300;
    double elastic_penalty = 1e6;
    double infeasibility_threshold = 1e-6;
};

struct NlpResult {
    NlpStatus status = NlpStatus::IterationLimit;
    Eigen::VectorXd u;
    Eigen::VectorXd lambda;    // m
    Eigen::VectorXd mu_lower;  // n
    Eigen::VectorXd mu_upper;  // n
    double f = 0.0;
    Eigen::VectorXd c;
    double stationarity = 0.0;
    double max_violation = 0.0;
    double min_l1_violation = 0.0;  // elastic certificate when infeasible
    int iterations = 0;
    int evaluations = 0;
    std::vector<double> violation_trace;  // max(0, max c) at each accepted iterate
};

// Solver contract used by the driver; SqpSolver is the built-in
// implementation.
class NlpSolver {
public:
    virtual ~NlpSolver() = default;
    virtual NlpResult solve(const NlpProblem& problem, const NlpOptions& opts) = 0;
};

// SQP with damped BFGS, l1-merit backtracking with a second-order
// correction, and elastic-mode infeasibility detection.
class SqpSolver : public NlpSolver {
public:
    NlpResult solve(const NlpProblem& problem, const NlpOptions& opts) override;
};

NlpResult solve(const NlpProblem& problem, const NlpOptions& opts = {});

struct KktInput {
    Eigen::VectorXd grad_objective;  // n
    Eigen::MatrixXd grads;           // k x n, original constraint gradients at the midpoints
    Eigen::VectorXd values;          // k, original constraint values at the midpoints
    Eigen::VectorXd lambda;          // k
    double eps_act = 1e-3;
    // Optional box: components sitting on a bound absorb residual of the
    // sign a non-negative bound multiplier could cancel.
    Eigen::VectorXd u;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    double bound_tol = 1e-9;
};

struct KktResiduals {
    double stationarity = 0.0;  // infinity norm
    std::vector<bool> complementarity;
    bool all_complementary = true;
};

KktResiduals kkt_residuals(const KktInput& in);

}  // namespace pathopt

#endif  // PATHOPT_NLP_HPP
