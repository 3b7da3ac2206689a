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

#ifndef PATHOPT_ODE_HPP
#define PATHOPT_ODE_HPP

#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "pathopt/expr.hpp"

namespace pathopt {

// Piecewise-constant control: segment s covers [breakpoints[s],
// breakpoints[s+1]] and holds values[s * per_segment .. + per_segment).
struct ControlSchedule {
    std::vector<double> breakpoints;
    int per_segment = 1;
    std::vector<double> values;

    int segments() const { return static_cast<int>(breakpoints.size()) - 1; }
    int decision_count() const { return segments() * per_segment; }
    double t0() const { return breakpoints.front(); }
    double tf() const { return breakpoints.back(); }

    // Segment containing t; a breakpoint belongs to the segment on its right
    // except tf, which belongs to the last segment.
    int segment_of(double t) const;
    std::span<const double> segment_values(int s) const;

    static std::vector<double> uniform_breakpoints(double t0, double tf, int segments);
    void validate() const;
};

// Right-hand side f(x, u, t) compiled together with its Jacobians.
class OdeModel {
public:
    OdeModel(std::vector<Expr> f, int n_u);

    int n_x() const { return static_cast<int>(f_.size()); }
    int n_u() const { return n_u_; }
    const std::vector<Expr>& dynamics() const { return f_; }

    void rhs(std::span<const double> x, std::span<const double> u, double t, std::span<double> out,
             std::vector<double>& work) const;
    // out = [f (n_x), df/dx row-major (n_x * n_x), df/du row-major (n_x * n_u)]
    void rhs_with_jacobians(std::span<const double> x, std::span<const double> u, double t,
                            std::span<double> out, std::vector<double>& work) const;

private:
    std::vector<Expr> f_;
    int n_u_;
    Tape f_tape_;
    Tape full_tape_;
};

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double last_time)
        : std::runtime_error(what), last_time_(last_time) {}
    double last_time() const { return last_time_; }

private:
    double last_time_;
};

struct IntegrationOptions {
    double rtol = 1e-8;
    double atol = 1e-8;
    long max_steps = 200000;
};

// Accepted Dormand-Prince steps with their continuous extension. When built
// with sensitivities the stored vector is [x; vec(S)] with S = dx/du
// (n_x x decision_count, column-major).
class Trajectory {
public:
    int n_x() const { return n_x_; }
    int decision_count() const { return n_dec_; }
    bool has_sensitivities() const { return with_sens_; }
    double t0() const { return schedule_.t0(); }
    double tf() const { return schedule_.tf(); }
    const ControlSchedule& schedule() const { return schedule_; }
    std::size_t step_count() const { return steps_.size(); }
    long rhs_evaluations() const { return rhs_evals_; }

    Eigen::VectorXd state(double t) const;
    void state(double t, std::span<double> out) const;
    Eigen::MatrixXd sensitivity(double t) const;

    // Full stored vector at t (state and, if present, sensitivities).
    void interpolate(double t, std::span<double> out) const;

    // Accepted step endpoints, for tests of the dense output.
    std::vector<double> mesh() const;

private:
    friend class Integrator;

    struct Step {
        double t0 = 0.0;
        double h = 0.0;
        std::size_t offset = 0;  // into dense_, 5 * dim_ values
    };

    const Step& step_at(double t) const;

    ControlSchedule schedule_;
    int n_x_ = 0;
    int n_dec_ = 0;
    int dim_ = 0;
    bool with_sens_ = false;
    long rhs_evals_ = 0;
    std::vector<Step> steps_;
    std::vector<double> dense_;
};

Trajectory integrate(const OdeModel& model, std::span<const double> x0,
                     const ControlSchedule& controls, const IntegrationOptions& opts = {});

// Integrates S' = df/dx S + df/du E_s alongside x, S(t0) = 0, where E_s
// selects the decision variables of the active segment.
Trajectory integrate_with_sensitivities(const OdeModel& model, std::span<const double> x0,
                                        const ControlSchedule& controls,
                                        const IntegrationOptions& opts = {});

// Lie derivatives L^0 h .. L^(q-1) h of one path constraint along the
// dynamics, compiled with their partials in x and u. L^q h is kept for
// remainder estimation.
class LieTable {
public:
    LieTable(const Expr& h, std::span<const Expr> f, int q, int n_u);

    int q() const { return q_; }
    int n_x() const { return n_x_; }
    int n_u() const { return n_u_; }
    const Expr& derivative(int i) const { return lie_.at(static_cast<std::size_t>(i)); }
    const Expr& top() const { return lie_.back(); }

    // values[i] = L^i h at (x, u, t), i < q
    void values(std::span<const double> x, std::span<const double> u, double t,
                std::span<double> out, std::vector<double>& work) const;
    // L^q h at (x, u, t)
    double top_value(std::span<const double> x, std::span<const double> u, double t,
                     std::vector<double>& work) const;
    // For each i < q: [dL^i/dx (n_x), dL^i/du (n_u)], concatenated.
    void partials(std::span<const double> x, std::span<const double> u, double t,
                  std::span<double> out, std::vector<double>& work) const;

private:
    int q_;
    int n_x_;
    int n_u_;
    std::vector<Expr> lie_;  // orders 0..q
    Tape value_tape_;
    Tape top_tape_;
    Tape partial_tape_;
};

// D_i = L^i h at (x(c), u(c), c), i = 0..q-1.
std::vector<double> eval_D(const Trajectory& traj, const LieTable& table, double c);

// Row i = dL^i h/dx * S(c) + dL^i h/du (placed on the active segment's columns).
Eigen::MatrixXd eval_gradD(const Trajectory& traj, const LieTable& table, double c);

}  // namespace pathopt

#endif  // PATHOPT_ODE_HPP
