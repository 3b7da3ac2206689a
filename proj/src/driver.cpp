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

#include "pathopt/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pathopt/random.hpp"

namespace pathopt {

const char* to_string(BoundMethod m) {
    return m == BoundMethod::TaylorBernstein ? "taylor-bernstein" : "taylor-model";
}

const char* to_string(StepCase c) {
    switch (c) {
        case StepCase::Terminate:
            return "terminate";
        case StepCase::Refine:
            return "case1";
        case StepCase::Bisect:
            return "case2";
        case StepCase::Failed:
            return "failed";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// ProblemSpec
// ---------------------------------------------------------------------------

double ProblemSpec::smoothing_bias() const { return std::log(static_cast<double>(r + 1)) / rho; }

BoundParams ProblemSpec::bound_params(int constraint) const {
    BoundParams p;
    p.q = q;
    p.r = r;
    p.rho = rho;
    p.b_upper = constraints.at(static_cast<std::size_t>(constraint)).b_upper;
    return p;
}

void ProblemSpec::validate() const {
    auto fail = [&](const std::string& what) {
        throw std::invalid_argument((name.empty() ? std::string("problem") : name) + ": " + what);
    };
    if (n_x < 1 || static_cast<int>(dynamics.size()) != n_x) {
        fail("dynamics must have one expression per state");
    }
    if (static_cast<int>(x0.size()) != n_x) {
        fail("x0 must have one value per state");
    }
    if (n_u < 1 || static_cast<int>(u_lower.size()) != n_u || static_cast<int>(u_upper.size()) != n_u) {
        fail("control bounds must have one value per control");
    }
    for (int k = 0; k < n_u; ++k) {
        if (!(u_lower[static_cast<std::size_t>(k)] <= u_upper[static_cast<std::size_t>(k)])) {
            fail("control lower bound exceeds upper bound");
        }
    }
    if (breakpoints.size() < 2) {
        fail("need at least one control segment");
    }
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i] > breakpoints[i - 1])) {
            fail("control breakpoints must be strictly increasing");
        }
    }
    for (const Expr& e : dynamics) {
        if (max_state_index(e) >= n_x || max_control_index(e) >= n_u) {
            fail("dynamics reference an undeclared variable");
        }
    }
    if (max_control_index(objective) >= 0 || max_state_index(objective) >= n_x) {
        fail("objective must depend on the terminal state only");
    }
    for (const PathConstraint& c : constraints) {
        if (max_state_index(c.h) >= n_x || max_control_index(c.h) >= n_u) {
            fail("path constraint references an undeclared variable");
        }
        if (!(c.b_upper >= 0.0) || !std::isfinite(c.b_upper)) {
            fail("b_upper must be a finite non-negative number");
        }
    }
    if (q < 1) {
        fail("Taylor order q must be at least 1");
    }
    if (r < q - 1) {
        fail("Bernstein degree r must be at least q - 1");
    }
    if (!(rho > 0.0)) {
        fail("rho must be positive");
    }
    if (!(eps_stat > 0.0) || !(eps_act > 0.0)) {
        fail("tolerances must be positive");
    }
    if (smoothing_bias() >= eps_act) {
        std::ostringstream os;
        os << "smoothing bias ln(r+1)/rho = " << smoothing_bias() << " is not below eps_act = "
           << eps_act << "; increase rho or eps_act";
        fail(os.str());
    }
}

// ---------------------------------------------------------------------------
// Partition
// ---------------------------------------------------------------------------

Partition::Partition(std::vector<Subinterval> items) : items_(std::move(items)) {}

std::vector<int> Partition::counts(int constraints) const {
    std::vector<int> c(static_cast<std::size_t>(constraints), 0);
    for (const Subinterval& s : items_) {
        ++c.at(static_cast<std::size_t>(s.constraint));
    }
    return c;
}

double Partition::max_width() const {
    double w = 0.0;
    for (const Subinterval& s : items_) {
        w = std::max(w, s.span.width());
    }
    return w;
}

Partition Partition::refine(const std::vector<int>& parts) const {
    if (parts.size() != items_.size()) {
        throw std::invalid_argument("Partition::refine: one part count per subinterval required");
    }
    std::vector<Subinterval> out;
    out.reserve(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i) {
        const Subinterval& s = items_[i];
        if (parts[i] <= 1) {
            out.push_back(s);
            continue;
        }
        for (const Interval& piece : s.span.split_equal(parts[i])) {
            out.push_back({piece, s.segment, s.constraint});
        }
    }
    return Partition(std::move(out));
}

void Partition::check_covering(const ProblemSpec& spec) const {
    const int nc = static_cast<int>(spec.constraints.size());
    for (int j = 0; j < nc; ++j) {
        double cursor = spec.t0();
        bool any = false;
        for (const Subinterval& s : items_) {
            if (s.constraint != j) {
                continue;
            }
            any = true;
            if (s.span.lo() != cursor) {
                throw std::logic_error("partition: gap or overlap at t = " + std::to_string(cursor));
            }
            const double a = spec.breakpoints.at(static_cast<std::size_t>(s.segment));
            const double b = spec.breakpoints.at(static_cast<std::size_t>(s.segment + 1));
            if (s.span.lo() < a || s.span.hi() > b) {
                throw std::logic_error("partition: subinterval straddles a control breakpoint");
            }
            cursor = s.span.hi();
        }
        if (!any || cursor != spec.tf()) {
            throw std::logic_error("partition: constraint " + std::to_string(j) +
                                   " does not cover the horizon");
        }
    }
}

Partition initial_partition(const ProblemSpec& spec, int per_segment) {
    if (per_segment < 1) {
        throw std::invalid_argument("initial_partition: need at least one subinterval per segment");
    }
    std::vector<Subinterval> items;
    const int nc = static_cast<int>(spec.constraints.size());
    for (int j = 0; j < nc; ++j) {
        for (int s = 0; s < spec.segments(); ++s) {
            const Interval seg(spec.breakpoints[static_cast<std::size_t>(s)],
                               spec.breakpoints[static_cast<std::size_t>(s + 1)]);
            for (const Interval& piece : seg.split_equal(per_segment)) {
                items.push_back({piece, s, j});
            }
        }
    }
    return Partition(std::move(items));
}

int subdivision_count(double width, int q, double b_upper, double eps_act, double bias) {
    if (!(eps_act > bias)) {
        throw std::invalid_argument("subdivision_count: eps_act must exceed the smoothing bias");
    }
    if (!(b_upper > 0.0)) {
        return 2;
    }
    double scale = std::pow(2.0, q);
    for (int i = 2; i <= q; ++i) {
        scale *= i;
    }
    const double target = std::pow(scale * (eps_act - bias) / b_upper, 1.0 / q);
    const double ratio = width / target;
    const double n = std::ceil(ratio);
    return n < 2.0 ? 2 : static_cast<int>(std::min(n, 1e6));
}

std::vector<int> detect_active(const std::vector<double>& bound_values, double tol) {
    std::vector<int> active;
    for (std::size_t i = 0; i < bound_values.size(); ++i) {
        if (bound_values[i] >= -tol) {
            active.push_back(static_cast<int>(i));
        }
    }
    return active;
}

// ---------------------------------------------------------------------------
// BoundEvaluator
// ---------------------------------------------------------------------------

struct BoundEvaluator::Impl {
    ProblemSpec spec;
    BoundMethod method;
    IntegrationOptions integration;
    OdeModel model;
    std::vector<LieTable> tables;
    std::vector<BoundParams> params;
    std::vector<Tape> h_tapes;
    Tape objective_tape;  // [phi, dphi/dx_k]
    mutable TransformCache cache;

    Impl(const ProblemSpec& s, BoundMethod m, IntegrationOptions io)
        : spec(s), method(m), integration(io), model(s.dynamics, s.n_u) {
        for (std::size_t j = 0; j < spec.constraints.size(); ++j) {
            tables.emplace_back(spec.constraints[j].h, spec.dynamics, spec.q, spec.n_u);
            params.push_back(spec.bound_params(static_cast<int>(j)));
            const Expr h[] = {spec.constraints[j].h};
            h_tapes.emplace_back(h);
        }
        std::vector<Expr> obj = {spec.objective};
        for (int k = 0; k < spec.n_x; ++k) {
            obj.push_back(diff(spec.objective, VarId::state(k)));
        }
        objective_tape = Tape(obj);
    }

    ControlSchedule schedule(const Eigen::VectorXd& u) const {
        if (u.size() != spec.decision_count()) {
            throw std::invalid_argument("control vector has the wrong length");
        }
        ControlSchedule s;
        s.breakpoints = spec.breakpoints;
        s.per_segment = spec.n_u;
        s.values.assign(u.data(), u.data() + u.size());
        return s;
    }

    // phi and its gradient over the decisions (when sensitivities exist).
    double objective(const Trajectory& tr, Eigen::VectorXd* grad) const {
        const double tf = spec.tf();
        std::vector<double> x(static_cast<std::size_t>(spec.n_x));
        tr.state(tf, x);
        std::vector<double> out(static_cast<std::size_t>(spec.n_x + 1));
        std::vector<double> work;
        objective_tape.eval(x, {}, tf, out, work);
        if (grad != nullptr) {
            const Eigen::Map<const Eigen::VectorXd> dphi(out.data() + 1, spec.n_x);
            *grad = tr.sensitivity(tf).transpose() * dphi;
        }
        return out[0];
    }

    int rows_per() const { return method == BoundMethod::TaylorBernstein ? 1 : 1 << (spec.q - 1); }

    void evaluate(const Partition& part, const Eigen::VectorXd& u, bool grad, NlpEvaluation& out) const {
        const ControlSchedule sched = schedule(u);
        const std::vector<double>& x0 = spec.x0;
        const Trajectory tr = grad ? integrate_with_sensitivities(model, x0, sched, integration)
                                   : integrate(model, x0, sched, integration);
        const int rows = rows_per();
        const int n = spec.decision_count();
        const auto m = static_cast<Eigen::Index>(part.size()) * rows;
        out.c.resize(m);
        if (grad) {
            out.f = objective(tr, &out.grad_f);
            out.jac.resize(m, n);
        } else {
            out.f = objective(tr, nullptr);
        }
        for (std::size_t i = 0; i < part.size(); ++i) {
            const Subinterval& s = part[i];
            const int j = s.constraint;
            const double c = s.span.midpoint();
            const double w = s.span.width();
            const std::vector<double> d = eval_D(tr, tables[static_cast<std::size_t>(j)], c);
            const BoundParams& bp = params[static_cast<std::size_t>(j)];
            const auto row0 = static_cast<Eigen::Index>(i) * rows;
            if (method == BoundMethod::TaylorBernstein) {
                if (grad) {
                    const Eigen::MatrixXd gd = eval_gradD(tr, tables[static_cast<std::size_t>(j)], c);
                    const BoundEval be = bound::evaluate_h_tb(bp, d, gd, w, &cache);
                    out.c[row0] = be.value;
                    out.jac.row(row0) = be.gradient.transpose();
                } else {
                    out.c[row0] = bound::h_tb(bp, d, w, &cache);
                }
            } else {
                const Eigen::MatrixXd pieces = bound::taylor_model_pieces(spec.q, w);
                const Eigen::Map<const Eigen::VectorXd> dv(d.data(), spec.q);
                out.c.segment(row0, rows) =
                    (pieces * dv).array() + bound::remainder_bound(bp, w);
                if (grad) {
                    const Eigen::MatrixXd gd = eval_gradD(tr, tables[static_cast<std::size_t>(j)], c);
                    out.jac.middleRows(row0, rows) = pieces * gd;
                }
            }
        }
    }
};

BoundEvaluator::BoundEvaluator(const ProblemSpec& spec, BoundMethod method, IntegrationOptions integration)
    : impl_(std::make_unique<Impl>(spec, method, integration)) {}

BoundEvaluator::~BoundEvaluator() = default;

const ProblemSpec& BoundEvaluator::spec() const { return impl_->spec; }
BoundMethod BoundEvaluator::method() const { return impl_->method; }
int BoundEvaluator::rows_per_subinterval() const { return impl_->rows_per(); }
const LieTable& BoundEvaluator::lie_table(int constraint) const {
    return impl_->tables.at(static_cast<std::size_t>(constraint));
}
ControlSchedule BoundEvaluator::schedule(const Eigen::VectorXd& u) const { return impl_->schedule(u); }
const OdeModel& BoundEvaluator::model() const { return impl_->model; }
const IntegrationOptions& BoundEvaluator::integration() const { return impl_->integration; }

NlpProblem BoundEvaluator::make_problem(const Partition& partition, const Eigen::VectorXd& start) {
    const ProblemSpec& s = impl_->spec;
    NlpProblem p;
    p.n = s.decision_count();
    p.m = static_cast<int>(partition.size()) * rows_per_subinterval();
    p.lower.resize(p.n);
    p.upper.resize(p.n);
    for (int seg = 0; seg < s.segments(); ++seg) {
        for (int k = 0; k < s.n_u; ++k) {
            p.lower[seg * s.n_u + k] = s.u_lower[static_cast<std::size_t>(k)];
            p.upper[seg * s.n_u + k] = s.u_upper[static_cast<std::size_t>(k)];
        }
    }
    p.start = start;
    const Impl* impl = impl_.get();
    p.evaluate = [impl, partition](const Eigen::VectorXd& u, bool grad, NlpEvaluation& out) {
        impl->evaluate(partition, u, grad, out);
    };
    return p;
}

std::vector<double> BoundEvaluator::bound_values(const Partition& partition, const Eigen::VectorXd& c) const {
    const int rows = rows_per_subinterval();
    std::vector<double> v(partition.size());
    for (std::size_t i = 0; i < partition.size(); ++i) {
        v[i] = c.segment(static_cast<Eigen::Index>(i) * rows, rows).maxCoeff();
    }
    return v;
}

std::vector<double> BoundEvaluator::subinterval_multipliers(const Partition& partition,
                                                            const Eigen::VectorXd& lambda) const {
    const int rows = rows_per_subinterval();
    std::vector<double> v(partition.size(), 0.0);
    if (lambda.size() == 0) {
        return v;
    }
    for (std::size_t i = 0; i < partition.size(); ++i) {
        v[i] = lambda.segment(static_cast<Eigen::Index>(i) * rows, rows).sum();
    }
    return v;
}

BoundEvaluator::MidpointData BoundEvaluator::midpoint_data(const Partition& partition,
                                                           const Eigen::VectorXd& u) const {
    const Impl& im = *impl_;
    const Trajectory tr = integrate_with_sensitivities(im.model, im.spec.x0, im.schedule(u), im.integration);
    MidpointData md;
    md.objective = im.objective(tr, &md.grad_objective);
    md.h.resize(partition.size());
    md.grad_h.resize(static_cast<Eigen::Index>(partition.size()), im.spec.decision_count());
    for (std::size_t i = 0; i < partition.size(); ++i) {
        const Subinterval& s = partition[i];
        const double c = s.span.midpoint();
        const LieTable& table = im.tables[static_cast<std::size_t>(s.constraint)];
        md.h[i] = eval_D(tr, table, c)[0];
        md.grad_h.row(static_cast<Eigen::Index>(i)) = eval_gradD(tr, table, c).row(0);
    }
    return md;
}

double BoundEvaluator::objective(const Eigen::VectorXd& u) const {
    const Impl& im = *impl_;
    return im.objective(integrate(im.model, im.spec.x0, im.schedule(u), im.integration), nullptr);
}

std::vector<double> BoundEvaluator::certificate(const Eigen::VectorXd& u, int points) const {
    if (points < 2) {
        throw std::invalid_argument("certificate: need at least two grid points");
    }
    const Impl& im = *impl_;
    const ControlSchedule sched = im.schedule(u);
    const Trajectory tr = integrate(im.model, im.spec.x0, sched, im.integration);
    const double t0 = im.spec.t0();
    const double tf = im.spec.tf();
    std::vector<double> x(static_cast<std::size_t>(im.spec.n_x));
    std::vector<double> work;
    std::vector<double> out(im.h_tapes.size(), -std::numeric_limits<double>::infinity());
    for (int k = 0; k < points; ++k) {
        const double t = k == points - 1 ? tf : t0 + (tf - t0) * static_cast<double>(k) / (points - 1);
        tr.state(t, x);
        const auto useg = sched.segment_values(sched.segment_of(t));
        for (std::size_t j = 0; j < im.h_tapes.size(); ++j) {
            double h = 0.0;
            im.h_tapes[j].eval(x, useg, t, std::span<double>(&h, 1), work);
            out[j] = std::max(out[j], h);
        }
    }
    return out;
}

double BoundEvaluator::bound_value(int constraint, std::span<const double> d, double width) const {
    const BoundParams& bp = impl_->params.at(static_cast<std::size_t>(constraint));
    return impl_->method == BoundMethod::TaylorBernstein ? bound::h_tb(bp, d, width, &impl_->cache)
                                                         : bound::taylor_model_bound(bp, d, width);
}

// ---------------------------------------------------------------------------
// Algorithm loop
// ---------------------------------------------------------------------------

TerminationCheck check_termination(const ProblemSpec& spec, const IterateState& state,
                                   double multiplier_floor) {
    TerminationCheck out;
    std::vector<int> support;
    for (std::size_t i = 0; i < state.multipliers.size(); ++i) {
        if (state.multipliers[i] > multiplier_floor) {
            support.push_back(static_cast<int>(i));
        }
    }
    const int n = static_cast<int>(state.u.size());
    KktInput in;
    in.grad_objective = state.midpoint.grad_objective;
    in.grads.resize(static_cast<Eigen::Index>(support.size()), n);
    in.values.resize(static_cast<Eigen::Index>(support.size()));
    in.lambda.resize(static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) {
        const auto i = static_cast<std::size_t>(support[k]);
        in.grads.row(static_cast<Eigen::Index>(k)) = state.midpoint.grad_h.row(static_cast<Eigen::Index>(i));
        in.values[static_cast<Eigen::Index>(k)] = state.midpoint.h[i];
        in.lambda[static_cast<Eigen::Index>(k)] = state.multipliers[i];
    }
    in.eps_act = spec.eps_act;
    in.u = state.u;
    in.lower.resize(n);
    in.upper.resize(n);
    for (int i = 0; i < n; ++i) {
        in.lower[i] = spec.u_lower[static_cast<std::size_t>(i % spec.n_u)];
        in.upper[i] = spec.u_upper[static_cast<std::size_t>(i % spec.n_u)];
    }
    const KktResiduals k = kkt_residuals(in);
    out.stationarity = k.stationarity;
    out.stationary = k.stationarity <= spec.eps_stat;
    out.complementary = k.all_complementary;
    out.certificate = state.certificate;
    out.certified = std::all_of(state.certificate.begin(), state.certificate.end(),
                                [](double v) { return v <= 0.0; });
    return out;
}

std::vector<double> default_start(const ProblemSpec& spec) {
    std::vector<double> u(static_cast<std::size_t>(spec.decision_count()));
    for (int s = 0; s < spec.segments(); ++s) {
        for (int k = 0; k < spec.n_u; ++k) {
            u[static_cast<std::size_t>(s * spec.n_u + k)] =
                0.5 * (spec.u_lower[static_cast<std::size_t>(k)] + spec.u_upper[static_cast<std::size_t>(k)]);
        }
    }
    return u;
}

SolveReport run(const ProblemSpec& spec, const DriverOptions& opts) {
    spec.validate();
    const auto clock_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    };
    std::vector<double> u0 = opts.u0.empty() ? default_start(spec) : opts.u0;
    if (static_cast<int>(u0.size()) != spec.decision_count()) {
        throw std::invalid_argument("run: start control has the wrong length");
    }
    for (std::size_t i = 0; i < u0.size(); ++i) {
        const auto k = i % static_cast<std::size_t>(spec.n_u);
        if (u0[i] < spec.u_lower[k] || u0[i] > spec.u_upper[k]) {
            throw std::invalid_argument("run: start control outside the control bounds");
        }
    }
    const bool tb = opts.method == BoundMethod::TaylorBernstein;
    const double bias = tb ? spec.smoothing_bias() : 0.0;
    BoundEvaluator evaluator(spec, opts.method, opts.integration);
    std::shared_ptr<NlpSolver> solver = opts.solver ? opts.solver : std::make_shared<SqpSolver>();
    const int nc = static_cast<int>(spec.constraints.size());

    SolveReport report;
    report.method = opts.method;
    Partition partition = initial_partition(spec, opts.initial_splits);
    Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(u0.data(), static_cast<Eigen::Index>(u0.size()));

    for (int k = 1; k <= opts.max_iters; ++k) {
        partition.check_covering(spec);
        IterationRecord rec;
        rec.k = k;
        rec.constraint_counts = partition.counts(nc);
        rec.constraint_count = static_cast<int>(partition.size());
        rec.max_width = partition.max_width();

        const NlpProblem problem = evaluator.make_problem(partition, u);
        const NlpResult res = solver->solve(problem, opts.nlp);
        rec.nlp_status = to_string(res.status);
        rec.nlp_iterations = res.iterations;

        if (res.status == NlpStatus::Infeasible) {
            rec.step = StepCase::Bisect;
            rec.u.assign(u.data(), u.data() + u.size());
            rec.wall_time = elapsed();
            report.history.push_back(rec);
            partition = partition.refine(std::vector<int>(partition.size(), 2));
            continue;
        }
        const bool usable = res.status == NlpStatus::Optimal ||
                            res.max_violation <= opts.nlp.feasibility_guard;
        if (!usable) {
            rec.step = StepCase::Failed;
            rec.u.assign(res.u.data(), res.u.data() + res.u.size());
            rec.wall_time = elapsed();
            report.history.push_back(rec);
            report.message = std::string("subproblem ended with status ") + to_string(res.status) +
                             " at an infeasible point";
            break;
        }
        u = res.u;
        rec.u.assign(u.data(), u.data() + u.size());
        const std::vector<double> hb = evaluator.bound_values(partition, res.c);
        IterateState state;
        state.u = u;
        state.multipliers = evaluator.subinterval_multipliers(partition, res.lambda);
        state.midpoint = evaluator.midpoint_data(partition, u);
        state.certificate = evaluator.certificate(u, opts.certificate_points);
        const TerminationCheck check = check_termination(spec, state, opts.multiplier_floor);
        rec.active = detect_active(hb, opts.active_tol);
        rec.cost = state.midpoint.objective;
        rec.stationarity = check.stationarity;
        rec.complementary = check.complementary;
        rec.certificate = check.certificate;

        report.u = rec.u;
        report.cost = rec.cost;
        report.constraint_counts = rec.constraint_counts;
        report.stationarity = rec.stationarity;
        report.certificate = rec.certificate;

        if (check.passed()) {
            rec.step = StepCase::Terminate;
            rec.wall_time = elapsed();
            report.history.push_back(rec);
            report.converged = true;
            break;
        }
        rec.step = StepCase::Refine;
        std::vector<int> parts(partition.size(), 1);
        if (rec.active.empty()) {
            // Nothing binds yet the iterate fails the test (numerical
            // stationarity or certificate); tighten everywhere.
            std::fill(parts.begin(), parts.end(), 2);
        }
        for (int i : rec.active) {
            const Subinterval& s = partition[static_cast<std::size_t>(i)];
            parts[static_cast<std::size_t>(i)] =
                subdivision_count(s.span.width(), spec.q,
                                  spec.constraints[static_cast<std::size_t>(s.constraint)].b_upper,
                                  spec.eps_act, bias);
        }
        rec.wall_time = elapsed();
        report.history.push_back(rec);
        partition = partition.refine(parts);
    }
    if (!report.converged && report.message.empty()) {
        report.message = "iteration limit reached";
    }
    if (report.u.empty()) {
        report.u.assign(u.data(), u.data() + u.size());
        report.cost = evaluator.objective(u);
        report.constraint_counts = partition.counts(nc);
    }
    report.wall_time = elapsed();
    return report;
}

double estimate_b_upper(const ProblemSpec& spec, int constraint, int samples, std::uint64_t seed) {
    spec.validate();
    if (samples < 1) {
        throw std::invalid_argument("estimate_b_upper: need at least one sample");
    }
    const LieTable table(spec.constraints.at(static_cast<std::size_t>(constraint)).h, spec.dynamics,
                         spec.q, spec.n_u);
    const OdeModel model(spec.dynamics, spec.n_u);
    Rng rng(seed);
    double worst = 0.0;
    std::vector<double> x(static_cast<std::size_t>(spec.n_x));
    std::vector<double> work;
    for (int s = 0; s < samples; ++s) {
        ControlSchedule sched;
        sched.breakpoints = spec.breakpoints;
        sched.per_segment = spec.n_u;
        sched.values.resize(static_cast<std::size_t>(spec.decision_count()));
        for (std::size_t i = 0; i < sched.values.size(); ++i) {
            const auto k = i % static_cast<std::size_t>(spec.n_u);
            sched.values[i] = uniform(rng, spec.u_lower[k], spec.u_upper[k]);
        }
        Trajectory tr = [&] {
            try {
                return integrate(model, spec.x0, sched);
            } catch (const IntegrationError&) {
                return Trajectory();
            }
        }();
        if (tr.step_count() == 0) {
            continue;
        }
        const int grid = 400;
        for (int k = 0; k < grid; ++k) {
            const double t = spec.t0() + (spec.tf() - spec.t0()) * k / (grid - 1.0);
            tr.state(t, x);
            const double v = table.top_value(x, sched.segment_values(sched.segment_of(t)), t, work);
            worst = std::max(worst, std::abs(v));
        }
    }
    return 1.5 * worst;
}

}  // namespace pathopt
