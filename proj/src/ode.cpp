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

#include "pathopt/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pathopt {

// ---------------------------------------------------------------------------
// ControlSchedule
// ---------------------------------------------------------------------------

int ControlSchedule::segment_of(double t) const {
    const int n = segments();
    if (n < 1) {
        throw std::logic_error("ControlSchedule: no segments");
    }
    if (t >= breakpoints.back()) {
        return n - 1;
    }
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
    const int s = static_cast<int>(it - breakpoints.begin()) - 1;
    return std::clamp(s, 0, n - 1);
}

std::span<const double> ControlSchedule::segment_values(int s) const {
    return std::span<const double>(values).subspan(static_cast<std::size_t>(s * per_segment),
                                                   static_cast<std::size_t>(per_segment));
}

std::vector<double> ControlSchedule::uniform_breakpoints(double t0, double tf, int segments) {
    if (segments < 1 || !(tf > t0)) {
        throw std::invalid_argument("uniform_breakpoints: need tf > t0 and at least one segment");
    }
    std::vector<double> bp(static_cast<std::size_t>(segments + 1));
    for (int s = 0; s <= segments; ++s) {
        bp[static_cast<std::size_t>(s)] = t0 + (tf - t0) * static_cast<double>(s) / segments;
    }
    bp.back() = tf;
    return bp;
}

void ControlSchedule::validate() const {
    if (breakpoints.size() < 2) {
        throw std::invalid_argument("ControlSchedule: need at least one segment");
    }
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i] > breakpoints[i - 1])) {
            throw std::invalid_argument("ControlSchedule: breakpoints must be strictly increasing");
        }
    }
    if (per_segment < 0 ||
        values.size() != static_cast<std::size_t>(segments() * per_segment)) {
        throw std::invalid_argument("ControlSchedule: value count does not match segments");
    }
}

// ---------------------------------------------------------------------------
// OdeModel
// ---------------------------------------------------------------------------

OdeModel::OdeModel(std::vector<Expr> f, int n_u) : f_(std::move(f)), n_u_(n_u) {
    const int nx = n_x();
    for (const Expr& e : f_) {
        if (max_state_index(e) >= nx || max_control_index(e) >= n_u_) {
            throw std::invalid_argument("OdeModel: expression references an undeclared variable");
        }
    }
    f_tape_ = Tape(f_);
    std::vector<Expr> all = f_;
    for (int i = 0; i < nx; ++i) {
        for (int k = 0; k < nx; ++k) {
            all.push_back(diff(f_[static_cast<std::size_t>(i)], VarId::state(k)));
        }
    }
    for (int i = 0; i < nx; ++i) {
        for (int k = 0; k < n_u_; ++k) {
            all.push_back(diff(f_[static_cast<std::size_t>(i)], VarId::control(k)));
        }
    }
    full_tape_ = Tape(all);
}

void OdeModel::rhs(std::span<const double> x, std::span<const double> u, double t,
                   std::span<double> out, std::vector<double>& work) const {
    f_tape_.eval(x, u, t, out, work);
}

void OdeModel::rhs_with_jacobians(std::span<const double> x, std::span<const double> u, double t,
                                  std::span<double> out, std::vector<double>& work) const {
    full_tape_.eval(x, u, t, out, work);
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)
// ---------------------------------------------------------------------------

namespace {

namespace dp {
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dp

}  // namespace

class Integrator {
public:
    Integrator(const OdeModel& model, const ControlSchedule& controls, bool with_sens,
               const IntegrationOptions& opts)
        : model_(model), opts_(opts) {
        controls.validate();
        if (controls.per_segment != model.n_u()) {
            throw std::invalid_argument("integrate: control dimension mismatch");
        }
        traj_.schedule_ = controls;
        traj_.n_x_ = model.n_x();
        traj_.with_sens_ = with_sens;
        traj_.n_dec_ = with_sens ? controls.decision_count() : 0;
        traj_.dim_ = traj_.n_x_ * (1 + traj_.n_dec_);
        jac_.resize(static_cast<std::size_t>(model.n_x() * (1 + model.n_x() + model.n_u())));
    }

    Trajectory run(std::span<const double> x0) {
        const int dim = traj_.dim_;
        if (x0.size() != static_cast<std::size_t>(traj_.n_x_)) {
            throw std::invalid_argument("integrate: initial state dimension mismatch");
        }
        std::vector<double> y(static_cast<std::size_t>(dim), 0.0);
        std::copy(x0.begin(), x0.end(), y.begin());
        for (auto* k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ynew_, &ystage_}) {
            k->assign(static_cast<std::size_t>(dim), 0.0);
        }

        const ControlSchedule& sched = traj_.schedule_;
        double h = 0.0;
        long steps = 0;
        for (int s = 0; s < sched.segments(); ++s) {
            segment_ = s;
            u_ = sched.segment_values(s);
            active_ = traj_.n_x_ * (1 + (traj_.with_sens_ ? (s + 1) * sched.per_segment : 0));
            const double a = sched.breakpoints[static_cast<std::size_t>(s)];
            const double b = sched.breakpoints[static_cast<std::size_t>(s + 1)];
            double t = a;
            eval_rhs(t, y, k1_);
            if (h <= 0.0) {
                h = initial_step(t, b, y);
            }
            h = std::min(h, b - a);
            bool rejected_last = false;
            while (t < b) {
                bool last = false;
                if (t + h >= b - 1e-13 * std::max(1.0, std::abs(b))) {
                    h = b - t;
                    last = true;
                }
                const double err = attempt(t, h, y);
                if (++steps > opts_.max_steps) {
                    throw IntegrationError("integrate: step limit exceeded", t);
                }
                if (err <= 1.0) {
                    store_step(t, h, y);
                    t = last ? b : t + h;
                    std::copy(ynew_.begin(), ynew_.begin() + active_, y.begin());
                    std::swap(k1_, k7_);
                    double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 10.0;
                    fac = std::clamp(fac, 0.2, rejected_last ? 1.0 : 10.0);
                    if (!last) {
                        h *= fac;
                    } else {
                        h = std::max(h, h * fac);
                    }
                    rejected_last = false;
                } else {
                    h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
                    rejected_last = true;
                }
                if (h < 1e-14 * std::max(1.0, std::abs(t))) {
                    throw IntegrationError(
                        "integrate: step size underflow at t = " + std::to_string(t), t);
                }
            }
        }
        return std::move(traj_);
    }

private:
    void eval_rhs(double t, std::span<const double> y, std::vector<double>& out) {
        ++traj_.rhs_evals_;
        const int nx = traj_.n_x_;
        const auto x = y.first(static_cast<std::size_t>(nx));
        if (!traj_.with_sens_) {
            model_.rhs(x, u_, t, std::span<double>(out).first(static_cast<std::size_t>(nx)), work_);
            check_finite(out, nx, t);
            return;
        }
        model_.rhs_with_jacobians(x, u_, t, jac_, work_);
        std::copy(jac_.begin(), jac_.begin() + nx, out.begin());
        const double* jx = jac_.data() + nx;
        const double* ju = jx + nx * nx;
        const int nu = model_.n_u();
        const int cols = (active_ - nx) / nx;
        const int first_seg_col = segment_ * nu;
        for (int col = 0; col < cols; ++col) {
            const double* scol = y.data() + nx + col * nx;
            double* ocol = out.data() + nx + col * nx;
            for (int i = 0; i < nx; ++i) {
                double acc = 0.0;
                for (int k = 0; k < nx; ++k) {
                    acc += jx[i * nx + k] * scol[k];
                }
                ocol[i] = acc;
            }
            const int local = col - first_seg_col;
            if (local >= 0 && local < nu) {
                for (int i = 0; i < nx; ++i) {
                    ocol[i] += ju[i * nu + local];
                }
            }
        }
        check_finite(out, active_, t);
    }

    static void check_finite(const std::vector<double>& v, int n, double t) {
        for (int i = 0; i < n; ++i) {
            if (!std::isfinite(v[static_cast<std::size_t>(i)])) {
                throw IntegrationError("integrate: non-finite derivative at t = " + std::to_string(t),
                                       t);
            }
        }
    }

    double weighted_rms(const std::vector<double>& v, const std::vector<double>& y) const {
        double acc = 0.0;
        for (int i = 0; i < active_; ++i) {
            const double sk = opts_.atol + opts_.rtol * std::abs(y[static_cast<std::size_t>(i)]);
            const double r = v[static_cast<std::size_t>(i)] / sk;
            acc += r * r;
        }
        return std::sqrt(acc / active_);
    }

    double initial_step(double t, double b, const std::vector<double>& y) {
        const double d0 = weighted_rms(y, y);
        const double d1 = weighted_rms(k1_, y);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, b - t);
        for (int i = 0; i < active_; ++i) {
            const auto k = static_cast<std::size_t>(i);
            ystage_[k] = y[k] + h0 * k1_[k];
        }
        eval_rhs(t + h0, ystage_, k2_);
        for (int i = 0; i < active_; ++i) {
            const auto k = static_cast<std::size_t>(i);
            k3_[k] = k2_[k] - k1_[k];
        }
        const double d2 = weighted_rms(k3_, y) / h0;
        const double dmax = std::max(d1, d2);
        const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
        return std::min({100.0 * h0, h1, b - t});
    }

    // One trial step; fills k2..k7 and ynew_, returns the scaled error norm.
    double attempt(double t, double h, const std::vector<double>& y) {
        using namespace dp;
        const auto n = static_cast<std::size_t>(active_);
        auto stage = [&](auto&& combine) {
            for (std::size_t i = 0; i < n; ++i) {
                ystage_[i] = y[i] + h * combine(i);
            }
        };
        stage([&](std::size_t i) { return a21 * k1_[i]; });
        eval_rhs(t + c2 * h, ystage_, k2_);
        stage([&](std::size_t i) { return a31 * k1_[i] + a32 * k2_[i]; });
        eval_rhs(t + c3 * h, ystage_, k3_);
        stage([&](std::size_t i) { return a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]; });
        eval_rhs(t + c4 * h, ystage_, k4_);
        stage([&](std::size_t i) {
            return a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i];
        });
        eval_rhs(t + c5 * h, ystage_, k5_);
        stage([&](std::size_t i) {
            return a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i];
        });
        eval_rhs(t + h, ystage_, k6_);
        for (std::size_t i = 0; i < n; ++i) {
            ynew_[i] = y[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] +
                                   a76 * k6_[i]);
        }
        eval_rhs(t + h, ynew_, k7_);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] +
                                  e6 * k6_[i] + e7 * k7_[i]);
            const double sk = opts_.atol + opts_.rtol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
            acc += (e / sk) * (e / sk);
        }
        return std::sqrt(acc / static_cast<double>(n));
    }

    void store_step(double t, double h, const std::vector<double>& y) {
        using namespace dp;
        const auto dim = static_cast<std::size_t>(traj_.dim_);
        const auto n = static_cast<std::size_t>(active_);
        Trajectory::Step step{t, h, traj_.dense_.size()};
        traj_.dense_.resize(traj_.dense_.size() + 5 * dim, 0.0);
        double* r = traj_.dense_.data() + step.offset;
        for (std::size_t i = 0; i < n; ++i) {
            const double ydiff = ynew_[i] - y[i];
            const double bspl = h * k1_[i] - ydiff;
            r[i] = y[i];
            r[dim + i] = ydiff;
            r[2 * dim + i] = bspl;
            r[3 * dim + i] = ydiff - h * k7_[i] - bspl;
            r[4 * dim + i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] +
                                  d6 * k6_[i] + d7 * k7_[i]);
        }
        traj_.steps_.push_back(step);
    }

    const OdeModel& model_;
    IntegrationOptions opts_;
    Trajectory traj_;
    std::span<const double> u_;
    int segment_ = 0;
    int active_ = 0;
    std::vector<double> jac_;
    std::vector<double> work_;
    std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_, ynew_, ystage_;
};

Trajectory integrate(const OdeModel& model, std::span<const double> x0,
                     const ControlSchedule& controls, const IntegrationOptions& opts) {
    return Integrator(model, controls, false, opts).run(x0);
}

Trajectory integrate_with_sensitivities(const OdeModel& model, std::span<const double> x0,
                                        const ControlSchedule& controls,
                                        const IntegrationOptions& opts) {
    return Integrator(model, controls, true, opts).run(x0);
}

// ---------------------------------------------------------------------------
// Trajectory
// ---------------------------------------------------------------------------

const Trajectory::Step& Trajectory::step_at(double t) const {
    if (steps_.empty()) {
        throw std::logic_error("Trajectory: empty");
    }
    const double tol = 1e-12 * std::max(1.0, std::abs(tf()));
    if (t < t0() - tol || t > tf() + tol) {
        throw std::out_of_range("Trajectory: time outside the integration span");
    }
    auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                               [](double v, const Step& s) { return v < s.t0; });
    if (it == steps_.begin()) {
        return steps_.front();
    }
    return *(it - 1);
}

void Trajectory::interpolate(double t, std::span<double> out) const {
    const Step& s = step_at(t);
    const auto dim = static_cast<std::size_t>(dim_);
    const double theta = std::clamp((t - s.t0) / s.h, 0.0, 1.0);
    const double theta1 = 1.0 - theta;
    const double* r = dense_.data() + s.offset;
    const std::size_t n = std::min(out.size(), dim);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = r[i] +
                 theta * (r[dim + i] +
                          theta1 * (r[2 * dim + i] + theta * (r[3 * dim + i] + theta1 * r[4 * dim + i])));
    }
}

void Trajectory::state(double t, std::span<double> out) const {
    interpolate(t, out.first(static_cast<std::size_t>(n_x_)));
}

Eigen::VectorXd Trajectory::state(double t) const {
    Eigen::VectorXd x(n_x_);
    state(t, std::span<double>(x.data(), static_cast<std::size_t>(n_x_)));
    return x;
}

Eigen::MatrixXd Trajectory::sensitivity(double t) const {
    if (!with_sens_) {
        throw std::logic_error("Trajectory: sensitivities were not integrated");
    }
    std::vector<double> full(static_cast<std::size_t>(dim_));
    interpolate(t, full);
    Eigen::MatrixXd s(n_x_, n_dec_);
    for (int col = 0; col < n_dec_; ++col) {
        for (int i = 0; i < n_x_; ++i) {
            s(i, col) = full[static_cast<std::size_t>(n_x_ + col * n_x_ + i)];
        }
    }
    return s;
}

std::vector<double> Trajectory::mesh() const {
    std::vector<double> m;
    m.reserve(steps_.size() + 1);
    for (const Step& s : steps_) {
        m.push_back(s.t0);
    }
    if (!steps_.empty()) {
        m.push_back(steps_.back().t0 + steps_.back().h);
    }
    return m;
}

// ---------------------------------------------------------------------------
// LieTable
// ---------------------------------------------------------------------------

LieTable::LieTable(const Expr& h, std::span<const Expr> f, int q, int n_u)
    : q_(q), n_x_(static_cast<int>(f.size())), n_u_(n_u) {
    if (q < 1) {
        throw std::invalid_argument("LieTable: q must be at least 1");
    }
    lie_.reserve(static_cast<std::size_t>(q + 1));
    lie_.push_back(h);
    for (int i = 0; i < q; ++i) {
        lie_.push_back(lie_derivative(lie_.back(), f, 1));
    }
    value_tape_ = Tape(std::span<const Expr>(lie_).first(static_cast<std::size_t>(q)));
    top_tape_ = Tape(std::span<const Expr>(lie_).subspan(static_cast<std::size_t>(q), 1));
    std::vector<Expr> partial;
    for (int i = 0; i < q; ++i) {
        for (int k = 0; k < n_x_; ++k) {
            partial.push_back(diff(lie_[static_cast<std::size_t>(i)], VarId::state(k)));
        }
        for (int k = 0; k < n_u_; ++k) {
            partial.push_back(diff(lie_[static_cast<std::size_t>(i)], VarId::control(k)));
        }
    }
    partial_tape_ = Tape(partial);
}

void LieTable::values(std::span<const double> x, std::span<const double> u, double t,
                      std::span<double> out, std::vector<double>& work) const {
    value_tape_.eval(x, u, t, out, work);
}

double LieTable::top_value(std::span<const double> x, std::span<const double> u, double t,
                           std::vector<double>& work) const {
    double v = 0.0;
    top_tape_.eval(x, u, t, std::span<double>(&v, 1), work);
    return v;
}

void LieTable::partials(std::span<const double> x, std::span<const double> u, double t,
                        std::span<double> out, std::vector<double>& work) const {
    partial_tape_.eval(x, u, t, out, work);
}

std::vector<double> eval_D(const Trajectory& traj, const LieTable& table, double c) {
    if (c < traj.t0() || c > traj.tf()) {
        throw std::out_of_range("eval_D: midpoint outside the integration span");
    }
    std::vector<double> x(static_cast<std::size_t>(traj.n_x()));
    traj.state(c, x);
    const auto u = traj.schedule().segment_values(traj.schedule().segment_of(c));
    std::vector<double> d(static_cast<std::size_t>(table.q()));
    std::vector<double> work;
    table.values(x, u, c, d, work);
    return d;
}

Eigen::MatrixXd eval_gradD(const Trajectory& traj, const LieTable& table, double c) {
    if (!traj.has_sensitivities()) {
        throw std::logic_error("eval_gradD: trajectory has no sensitivities");
    }
    if (c < traj.t0() || c > traj.tf()) {
        throw std::out_of_range("eval_gradD: midpoint outside the integration span");
    }
    const int nx = traj.n_x();
    const int nu = table.n_u();
    const int q = table.q();
    std::vector<double> x(static_cast<std::size_t>(nx));
    traj.state(c, x);
    const Eigen::MatrixXd s = traj.sensitivity(c);
    const int seg = traj.schedule().segment_of(c);
    const auto u = traj.schedule().segment_values(seg);
    std::vector<double> partial(static_cast<std::size_t>(q * (nx + nu)));
    std::vector<double> work;
    table.partials(x, u, c, partial, work);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(q, traj.decision_count());
    for (int i = 0; i < q; ++i) {
        const double* row = partial.data() + i * (nx + nu);
        for (int k = 0; k < nx; ++k) {
            g.row(i) += row[k] * s.row(k);
        }
        for (int k = 0; k < nu; ++k) {
            g(i, seg * nu + k) += row[nx + k];
        }
    }
    return g;
}

}  // namespace pathopt
