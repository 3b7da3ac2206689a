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

#ifndef PATHOPT_QP_HPP
#define PATHOPT_QP_HPP

#include <Eigen/Dense>

namespace pathopt {

// min 0.5 x'Hx + g'x  s.t.  A x <= b,  lower <= x <= upper
// H must be symmetric positive definite. Infinite bounds are skipped.
struct QpProblem {
    Eigen::MatrixXd H;
    Eigen::VectorXd g;
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

enum class QpStatus { Optimal, Infeasible, NotConvex, IterationLimit };

struct QpResult {
    QpStatus status = QpStatus::IterationLimit;
    Eigen::VectorXd x;
    Eigen::VectorXd lambda;    // rows of A, >= 0
    Eigen::VectorXd mu_lower;  // >= 0
    Eigen::VectorXd mu_upper;  // >= 0
    double objective = 0.0;
    int iterations = 0;
};

// Goldfarb-Idnani dual active-set method. Stationarity at the solution:
// H x + g + A' lambda - mu_lower + mu_upper = 0.
QpResult solve_qp(const QpProblem& qp, int max_iterations = 0);

}  // namespace pathopt

#endif  // PATHOPT_QP_HPP
