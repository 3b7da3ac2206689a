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

#include "pathopt/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pathopt/qp.hpp"

namespace pathopt {

const char* to_string(NlpStatus s) {
    switch (s) {
        case NlpStatus::Optimal:
            return "optimal";
        case NlpStatus::Infeasible:
            return "infeasible";
        case NlpStatus::IterationLimit:
            return "iteration-limit";
        case NlpStatus::Stalled:
            return "stalled";
    }
    return "unknown";
}

namespace {

double violation(const Eigen::VectorXd& c) {
    return c.size() == 0 ? 0.0 : std::max(0.0, c.maxCoeff());
}

double l1_violation(const Eigen::VectorXd& c) { return c.cwiseMax(0.0).sum(); }

enum class Exit { Optimal, QpInfeasible, IterationLimit, Stalled };

class Sqp {
public:
    Sqp(const NlpProblem& p, const NlpOptions& o, NlpResult& res) : p_(p), o_(o), res_(res) {}

    Exit run(Eigen::VectorXd u) {
        const int n = p_.n;
        u = u.cwiseMax(p_.lower).cwiseMin(p_.upper);
        NlpEvaluation cur;
        evaluate(u, true, cur);
        Eigen::MatrixXd b = Eigen::MatrixXd::Identity(n, n);
        bool scaled = false;
        int resets = 0;
        double nu = 0.0;
        res_.violation_trace.push_back(violation(cur.c));
        record(u, cur);

        for (int iter = 0; iter < o_.max_iter; ++iter) {
            ++res_.iterations;
            QpProblem qp{b, cur.grad_f, cur.jac, -cur.c, p_.lower - u, p_.upper - u};
            QpResult q = solve_qp(qp);
            if (q.status == QpStatus::NotConvex || q.status == QpStatus::IterationLimit) {
                b.setIdentity();
                scaled = false;
                qp.H = b;
                q = solve_qp(qp);
            }
            if (q.status == QpStatus::Infeasible) {
                return Exit::QpInfeasible;
            }
            if (q.status != QpStatus::Optimal) {
                return Exit::Stalled;
            }
            const Eigen::VectorXd& d = q.x;
            const double scale = std::max(1.0, cur.grad_f.lpNorm<Eigen::Infinity>());
            res_.lambda = q.lambda;
            res_.mu_lower = q.mu_lower;
            res_.mu_upper = q.mu_upper;
            Eigen::VectorXd grad_l = cur.grad_f - q.mu_lower + q.mu_upper;
            if (p_.m > 0) {
                grad_l.noalias() += cur.jac.transpose() * q.lambda;
            }
            res_.stationarity = grad_l.lpNorm<Eigen::Infinity>();
            const double viol = violation(cur.c);
            const double comp =
                p_.m > 0 ? q.lambda.cwiseProduct(cur.c).cwiseAbs().maxCoeff() : 0.0;
            if (res_.stationarity <= o_.tol * scale && viol <= o_.feas_tol &&
                comp <= o_.tol * scale) {
                return Exit::Optimal;
            }
            if (d.lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + u.lpNorm<Eigen::Infinity>())) {
                return viol <= o_.feas_tol ? Exit::Optimal : Exit::Stalled;
            }

            if (p_.m > 0) {
                nu = std::max(nu, 1.1 * q.lambda.lpNorm<Eigen::Infinity>() + 1e-8);
            }
            const double phi0 = cur.f + nu * l1_violation(cur.c);
            double dphi = cur.grad_f.dot(d) - nu * l1_violation(cur.c);
            if (dphi >= 0.0) {
                dphi = -d.dot(b * d);
            }
            const bool guard = viol <= o_.feasibility_guard;

            NlpEvaluation trial;
            Eigen::VectorXd un;
            bool accepted = false;
            auto acceptable = [&](double alpha) {
                return trial.f + nu * l1_violation(trial.c) <= phi0 + 1e-4 * alpha * dphi &&
                       (!guard || violation(trial.c) <= o_.feasibility_guard);
            };
            double alpha = 1.0;
            for (int ls = 0; ls < 40 && !accepted; ++ls, alpha *= 0.5) {
                un = (u + alpha * d).cwiseMax(p_.lower).cwiseMin(p_.upper);
                if (!try_evaluate(un, trial)) {
                    continue;
                }
                if (acceptable(alpha)) {
                    accepted = true;
                    break;
                }
                if (guard && p_.m > 0 && violation(trial.c) > o_.feasibility_guard &&
                    restore(cur.jac, alpha, un, trial, acceptable)) {
                    accepted = true;
                    break;
                }
                if (ls == 0 && p_.m > 0) {
                    // Second-order correction against curvature of the
                    // constraints along d.
                    QpProblem soc = qp;
                    soc.b = -(trial.c - cur.jac * d);
                    const QpResult qs = solve_qp(soc);
                    if (qs.status == QpStatus::Optimal) {
                        const Eigen::VectorXd us =
                            (u + qs.x).cwiseMax(p_.lower).cwiseMin(p_.upper);
                        NlpEvaluation keep = trial;
                        if (try_evaluate(us, trial) && acceptable(1.0)) {
                            un = us;
                            accepted = true;
                            break;
                        }
                        trial = keep;
                    }
                }
            }
            if (!accepted) {
                if (resets < 2) {
                    ++resets;
                    b.setIdentity();
                    scaled = false;
                    continue;
                }
                return Exit::Stalled;
            }

            NlpEvaluation next;
            evaluate(un, true, next);
            const Eigen::VectorXd s = un - u;
            Eigen::VectorXd y = next.grad_f - cur.grad_f;
            if (p_.m > 0) {
                y.noalias() += (next.jac - cur.jac).transpose() * q.lambda;
            }
            bfgs_update(b, s, y, scaled);
            u = un;
            cur = std::move(next);
            res_.violation_trace.push_back(violation(cur.c));
            record(u, cur);
        }
        return Exit::IterationLimit;
    }

private:
    // Pulls a trial point that left the feasible region back with
    // minimum-norm Newton corrections on the violated rows, reusing the
    // Jacobian at the current iterate.
    template <class Accept>
    bool restore(const Eigen::MatrixXd& jac, double alpha, Eigen::VectorXd& un,
                 NlpEvaluation& trial, Accept&& acceptable) {
        Eigen::VectorXd ut = un;
        for (int k = 0; k < 3; ++k) {
            std::vector<int> rows;
            for (int i = 0; i < p_.m; ++i) {
                if (trial.c[i] > 0.0) {
                    rows.push_back(i);
                }
            }
            const auto nv = static_cast<Eigen::Index>(rows.size());
            Eigen::MatrixXd jv(nv, p_.n);
            Eigen::VectorXd cv(nv);
            for (Eigen::Index r = 0; r < nv; ++r) {
                jv.row(r) = jac.row(rows[static_cast<std::size_t>(r)]);
                cv[r] = trial.c[rows[static_cast<std::size_t>(r)]];
            }
            const Eigen::VectorXd e = jv.completeOrthogonalDecomposition().solve(-cv);
            ut = (ut + e).cwiseMax(p_.lower).cwiseMin(p_.upper);
            if (!try_evaluate(ut, trial)) {
                return false;
            }
            if (acceptable(alpha)) {
                un = ut;
                return true;
            }
            if (violation(trial.c) <= o_.feasibility_guard) {
                return false;
            }
        }
        return false;
    }

    void evaluate(const Eigen::VectorXd& u, bool grad, NlpEvaluation& out) {
        ++res_.evaluations;
        p_.evaluate(u, grad, out);
        check(out, grad);
    }

    bool try_evaluate(const Eigen::VectorXd& u, NlpEvaluation& out) {
        try {
            evaluate(u, false, out);
        } catch (const std::exception&) {
            return false;
        }
        return std::isfinite(out.f) && out.c.allFinite();
    }

    void check(const NlpEvaluation& e, bool grad) const {
        if (e.c.size() != p_.m || (grad && (e.grad_f.size() != p_.n || e.jac.rows() != p_.m ||
                                            (p_.m > 0 && e.jac.cols() != p_.n)))) {
            throw std::runtime_error("nlp: callback returned inconsistent dimensions");
        }
    }

    void record(const Eigen::VectorXd& u, const NlpEvaluation& e) {
        res_.u = u;
        res_.f = e.f;
        res_.c = e.c;
        res_.max_violation = violation(e.c);
    }

    static void bfgs_update(Eigen::MatrixXd& b, const Eigen::VectorXd& s, Eigen::VectorXd y,
                            bool& scaled) {
        double sy = s.dot(y);
        if (!scaled && sy > 1e-12 * s.norm() * y.norm()) {
            b = Eigen::MatrixXd::Identity(s.size(), s.size()) * (y.squaredNorm() / sy);
            scaled = true;
        }
        const Eigen::VectorXd bs = b * s;
        const double sbs = s.dot(bs);
        if (!(sbs > 0.0)) {
            return;
        }
        // Powell damping keeps the update positive definite.
        if (sy < 0.2 * sbs) {
            const double theta = 0.8 * sbs / (sbs - sy);
            y = theta * y + (1.0 - theta) * bs;
            sy = s.dot(y);
        }
        if (sy > 0.0) {
            b.noalias() += y * y.transpose() / sy - bs * bs.transpose() / sbs;
        }
    }

    const NlpProblem& p_;
    const NlpOptions& o_;
    NlpResult& res_;
};

// Rows given an elastic slack: every violated row plus the least satisfied
// of the rest, up to a budget.
std::vector<int> elastic_rows(const Eigen::VectorXd& c, int n, const std::vector<int>& keep) {
    const int m = static_cast<int>(c.size());
    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return c[a] > c[b]; });
    int violated = 0;
    while (violated < m && c[order[static_cast<std::size_t>(violated)]] > 0.0) {
        ++violated;
    }
    const int budget = std::min(m, std::max({violated + n, 2 * n, static_cast<int>(keep.size())}));
    std::vector<char> in(static_cast<std::size_t>(m), 0);
    for (int i : keep) {
        in[static_cast<std::size_t>(i)] = 1;
    }
    int count = static_cast<int>(keep.size());
    for (int k = 0; k < m && count < budget; ++k) {
        const int i = order[static_cast<std::size_t>(k)];
        if (!in[static_cast<std::size_t>(i)]) {
            in[static_cast<std::size_t>(i)] = 1;
            ++count;
        }
    }
    std::vector<int> rows;
    for (int i = 0; i < m; ++i) {
        if (in[static_cast<std::size_t>(i)]) {
            rows.push_back(i);
        }
    }
    return rows;
}

// min f + P sum(s)  s.t.  c_W(u) - s <= 0, c_rest(u) <= 0, s >= 0.
// Returns the minimizing u.
Eigen::VectorXd solve_elastic(const NlpProblem& p, const NlpOptions& o, const Eigen::VectorXd& u0,
                              const std::vector<int>& rows, NlpResult& res) {
    const int w = static_cast<int>(rows.size());
    const double pen = o.elastic_penalty;
    NlpProblem e;
    e.n = p.n + w;
    e.m = p.m;
    e.lower.resize(e.n);
    e.upper.resize(e.n);
    e.lower << p.lower, Eigen::VectorXd::Zero(w);
    e.upper << p.upper, Eigen::VectorXd::Constant(w, std::numeric_limits<double>::infinity());
    e.evaluate = [&](const Eigen::VectorXd& z, bool grad, NlpEvaluation& out) {
        NlpEvaluation inner;
        p.evaluate(z.head(p.n), grad, inner);
        out.f = inner.f + pen * z.tail(w).sum();
        out.c = inner.c;
        for (int k = 0; k < w; ++k) {
            out.c[rows[static_cast<std::size_t>(k)]] -= z[p.n + k];
        }
        if (grad) {
            out.grad_f.resize(e.n);
            out.grad_f << inner.grad_f, Eigen::VectorXd::Constant(w, pen);
            out.jac = Eigen::MatrixXd::Zero(p.m, e.n);
            out.jac.leftCols(p.n) = inner.jac;
            for (int k = 0; k < w; ++k) {
                out.jac(rows[static_cast<std::size_t>(k)], p.n + k) = -1.0;
            }
        }
    };
    NlpEvaluation at0;
    p.evaluate(u0, false, at0);
    ++res.evaluations;
    e.start.resize(e.n);
    e.start.head(p.n) = u0;
    for (int k = 0; k < w; ++k) {
        e.start[p.n + k] = std::max(0.0, at0.c[rows[static_cast<std::size_t>(k)]]);
    }
    NlpOptions eo = o;
    eo.tol = 1e-9;
    eo.feasibility_guard = -1.0;
    NlpResult er;
    Sqp sqp(e, eo, er);
    sqp.run(e.start);
    res.iterations += er.iterations;
    res.evaluations += er.evaluations;
    return er.u.head(p.n);
}

}  // namespace

NlpResult SqpSolver::solve(const NlpProblem& p, const NlpOptions& o) {
    if (p.n < 1 || p.lower.size() != p.n || p.upper.size() != p.n || p.start.size() != p.n) {
        throw std::invalid_argument("nlp: inconsistent problem dimensions");
    }
    if ((p.lower.array() > p.upper.array()).any()) {
        throw std::invalid_argument("nlp: empty box");
    }
    if (!p.evaluate) {
        throw std::invalid_argument("nlp: missing evaluation callback");
    }
    NlpResult res;
    res.lambda = Eigen::VectorXd::Zero(p.m);
    res.mu_lower = Eigen::VectorXd::Zero(p.n);
    res.mu_upper = Eigen::VectorXd::Zero(p.n);
    Eigen::VectorXd start = p.start;
    std::vector<int> rows;

    for (int round = 0; round < 6; ++round) {
        Sqp sqp(p, o, res);
        const Exit exit = sqp.run(start);
        switch (exit) {
            case Exit::Optimal:
                res.status = NlpStatus::Optimal;
                return res;
            case Exit::IterationLimit:
                res.status = NlpStatus::IterationLimit;
                return res;
            case Exit::Stalled:
                res.status = NlpStatus::Stalled;
                return res;
            case Exit::QpInfeasible:
                break;
        }
        // Linearization infeasible: look for the least-violating point.
        Eigen::VectorXd ue = res.u;
        while (true) {
            NlpEvaluation at;
            p.evaluate(ue, false, at);
            rows = elastic_rows(at.c, p.n, rows);
            ue = solve_elastic(p, o, ue, rows, res);
            p.evaluate(ue, false, at);
            ++res.evaluations;
            const double l1 = l1_violation(at.c);
            if (l1 <= o.infeasibility_threshold) {
                break;
            }
            // A nearly binding row without a slack may be what blocks
            // further progress; widen the slack set before concluding.
            bool widened = false;
            std::vector<char> has(static_cast<std::size_t>(p.m), 0);
            for (int i : rows) {
                has[static_cast<std::size_t>(i)] = 1;
            }
            for (int i = 0; i < p.m; ++i) {
                if (!has[static_cast<std::size_t>(i)] && at.c[i] > -1e-6) {
                    rows.push_back(i);
                    widened = true;
                }
            }
            std::sort(rows.begin(), rows.end());
            if (!widened) {
                res.u = ue;
                res.f = at.f;
                res.c = at.c;
                res.max_violation = violation(at.c);
                res.min_l1_violation = l1;
                res.lambda.setZero();
                res.status = NlpStatus::Infeasible;
                return res;
            }
        }
        start = ue;
    }
    res.status = NlpStatus::Stalled;
    return res;
}

NlpResult solve(const NlpProblem& problem, const NlpOptions& opts) {
    SqpSolver solver;
    return solver.solve(problem, opts);
}

KktResiduals kkt_residuals(const KktInput& in) {
    const auto k = in.lambda.size();
    if (in.grads.rows() != k || in.values.size() != k ||
        (k > 0 && in.grads.cols() != in.grad_objective.size())) {
        throw std::invalid_argument("kkt_residuals: inconsistent dimensions");
    }
    KktResiduals out;
    Eigen::VectorXd r = in.grad_objective;
    if (k > 0) {
        r.noalias() += in.grads.transpose() * in.lambda;
    }
    if (in.u.size() == r.size() && in.lower.size() == r.size() && in.upper.size() == r.size()) {
        for (Eigen::Index i = 0; i < r.size(); ++i) {
            const bool at_lower = in.u[i] <= in.lower[i] + in.bound_tol;
            const bool at_upper = in.u[i] >= in.upper[i] - in.bound_tol;
            if ((at_lower && r[i] > 0.0) || (at_upper && r[i] < 0.0)) {
                r[i] = 0.0;
            }
        }
    }
    out.stationarity = r.size() > 0 ? r.lpNorm<Eigen::Infinity>() : 0.0;
    out.complementarity.resize(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i) {
        const double prod = in.lambda[i] * in.values[i];
        const bool ok = prod <= 0.0 && prod >= -in.lambda[i] * in.eps_act;
        out.complementarity[static_cast<std::size_t>(i)] = ok;
        out.all_complementary = out.all_complementary && ok;
    }
    return out;
}

}  // namespace pathopt
