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

#include "pathopt/qp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace pathopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Constraints are handled internally in the form n_c' x + c0_c >= 0.
struct Constraint {
    enum Kind { Row, Lower, Upper } kind;
    int index;
    double c0;
    double norm;
};

class DualActiveSet {
public:
    DualActiveSet(const QpProblem& qp, int max_iterations) : qp_(qp), n_(static_cast<int>(qp.g.size())) {
        const int m = static_cast<int>(qp.A.rows());
        for (int i = 0; i < m; ++i) {
            cons_.push_back({Constraint::Row, i, qp.b[i], qp.A.row(i).norm()});
        }
        for (int k = 0; k < n_; ++k) {
            if (std::isfinite(qp.lower[k])) {
                cons_.push_back({Constraint::Lower, k, -qp.lower[k], 1.0});
            }
            if (std::isfinite(qp.upper[k])) {
                cons_.push_back({Constraint::Upper, k, qp.upper[k], 1.0});
            }
        }
        max_iter_ = max_iterations > 0 ? max_iterations
                                       : 50 * (n_ + static_cast<int>(cons_.size())) + 100;
    }

    QpResult run() {
        QpResult out;
        const int mc = static_cast<int>(cons_.size());
        Eigen::LLT<Eigen::MatrixXd> llt(qp_.H);
        if (llt.info() != Eigen::Success) {
            out.status = QpStatus::NotConvex;
            return out;
        }
        const Eigen::MatrixXd l = llt.matrixL();
        J_ = l.transpose().triangularView<Eigen::Upper>().solve(
            Eigen::MatrixXd::Identity(n_, n_));
        R_ = Eigen::MatrixXd::Zero(n_, n_);
        x_ = -llt.solve(qp_.g);
        active_.assign(static_cast<std::size_t>(n_ + 1), -1);
        u_.assign(static_cast<std::size_t>(n_ + 1), 0.0);
        iq_ = 0;
        r_norm_ = 1.0;
        std::vector<char> is_active(static_cast<std::size_t>(mc), 0);
        std::vector<char> excluded(static_cast<std::size_t>(mc), 0);
        Eigen::VectorXd d(n_), z(n_), r(n_), np(n_);

        int iter = 0;
        while (true) {
            // Most violated inactive constraint, scaled by its normal.
            int ip = -1;
            double worst = 0.0;
            for (int c = 0; c < mc; ++c) {
                if (is_active[static_cast<std::size_t>(c)] || excluded[static_cast<std::size_t>(c)]) {
                    continue;
                }
                const double s = slack(c);
                const Constraint& con = cons_[static_cast<std::size_t>(c)];
                if (con.norm == 0.0) {
                    if (s < -tolerance(c)) {
                        out.status = QpStatus::Infeasible;
                        return finish(out, iter);
                    }
                    continue;
                }
                if (s < -tolerance(c) && s / con.norm < worst) {
                    worst = s / con.norm;
                    ip = c;
                }
            }
            if (ip < 0) {
                out.status = QpStatus::Optimal;
                return finish(out, iter);
            }
            normal(ip, np);
            u_[static_cast<std::size_t>(iq_)] = 0.0;
            double s_ip = slack(ip);

            // Move until constraint ip becomes active, dropping blocking
            // constraints from the active set along the way.
            while (true) {
                if (++iter > max_iter_) {
                    out.status = QpStatus::IterationLimit;
                    return finish(out, iter);
                }
                d.noalias() = J_.transpose() * np;
                z.noalias() = J_.rightCols(n_ - iq_) * d.tail(n_ - iq_);
                if (iq_ > 0) {
                    r.head(iq_) = R_.topLeftCorner(iq_, iq_).triangularView<Eigen::Upper>().solve(
                        d.head(iq_));
                }
                double t1 = kInf;
                int drop = -1;
                for (int k = 0; k < iq_; ++k) {
                    if (r[k] > 0.0) {
                        const double ratio = u_[static_cast<std::size_t>(k)] / r[k];
                        if (ratio < t1) {
                            t1 = ratio;
                            drop = k;
                        }
                    }
                }
                const double zn = z.dot(np);
                const double t2 =
                    (zn > 1e-14 * np.squaredNorm()) ? -s_ip / zn : kInf;
                const double t = std::min(t1, t2);
                if (!std::isfinite(t)) {
                    out.status = QpStatus::Infeasible;
                    return finish(out, iter);
                }
                if (!std::isfinite(t2)) {
                    // Dual step only.
                    for (int k = 0; k < iq_; ++k) {
                        u_[static_cast<std::size_t>(k)] -= t * r[k];
                    }
                    u_[static_cast<std::size_t>(iq_)] += t;
                    is_active[static_cast<std::size_t>(active_[static_cast<std::size_t>(drop)])] = 0;
                    delete_at(drop);
                    continue;
                }
                x_ += t * z;
                for (int k = 0; k < iq_; ++k) {
                    u_[static_cast<std::size_t>(k)] -= t * r[k];
                }
                u_[static_cast<std::size_t>(iq_)] += t;
                if (t2 <= t1) {
                    if (add(d)) {
                        active_[static_cast<std::size_t>(iq_ - 1)] = ip;
                        is_active[static_cast<std::size_t>(ip)] = 1;
                        std::fill(excluded.begin(), excluded.end(), 0);
                    } else {
                        // Numerically dependent on the active set; x already
                        // satisfies it, so leave it out.
                        excluded[static_cast<std::size_t>(ip)] = 1;
                        u_[static_cast<std::size_t>(iq_)] = 0.0;
                    }
                    break;
                }
                is_active[static_cast<std::size_t>(active_[static_cast<std::size_t>(drop)])] = 0;
                delete_at(drop);
                s_ip = slack(ip);
            }
        }
    }

private:
    double slack(int c) const {
        const Constraint& con = cons_[static_cast<std::size_t>(c)];
        switch (con.kind) {
            case Constraint::Row:
                return con.c0 - qp_.A.row(con.index).dot(x_);
            case Constraint::Lower:
                return x_[con.index] + con.c0;
            case Constraint::Upper:
                return con.c0 - x_[con.index];
        }
        return 0.0;
    }

    double tolerance(int c) const {
        const Constraint& con = cons_[static_cast<std::size_t>(c)];
        return 1e-11 * (1.0 + std::abs(con.c0) + con.norm * x_.lpNorm<Eigen::Infinity>());
    }

    void normal(int c, Eigen::VectorXd& out) const {
        const Constraint& con = cons_[static_cast<std::size_t>(c)];
        switch (con.kind) {
            case Constraint::Row:
                out = -qp_.A.row(con.index).transpose();
                break;
            case Constraint::Lower:
                out.setZero();
                out[con.index] = 1.0;
                break;
            case Constraint::Upper:
                out.setZero();
                out[con.index] = -1.0;
                break;
        }
    }

    // Rotates d so that only its first iq+1 entries are non-zero, applying
    // the same rotations to J, then appends d as a new column of R.
    bool add(Eigen::VectorXd& d) {
        for (int j = n_ - 1; j > iq_; --j) {
            double cc = d[j - 1];
            double ss = d[j];
            const double h = std::hypot(cc, ss);
            if (h == 0.0) {
                continue;
            }
            d[j] = 0.0;
            ss /= h;
            cc /= h;
            if (cc < 0.0) {
                cc = -cc;
                ss = -ss;
                d[j - 1] = -h;
            } else {
                d[j - 1] = h;
            }
            const double xny = ss / (1.0 + cc);
            for (int k = 0; k < n_; ++k) {
                const double a = J_(k, j - 1);
                const double b = J_(k, j);
                J_(k, j - 1) = a * cc + b * ss;
                J_(k, j) = xny * (a + J_(k, j - 1)) - b;
            }
        }
        ++iq_;
        for (int i = 0; i < iq_; ++i) {
            R_(i, iq_ - 1) = d[i];
        }
        if (std::abs(d[iq_ - 1]) <= std::numeric_limits<double>::epsilon() * r_norm_) {
            for (int i = 0; i < iq_; ++i) {
                R_(i, iq_ - 1) = 0.0;
            }
            --iq_;
            return false;
        }
        r_norm_ = std::max(r_norm_, std::abs(d[iq_ - 1]));
        return true;
    }

    // Removes active position qq (the partial multiplier at u[iq] shifts
    // down with the rest) and restores R to upper-triangular form.
    void delete_at(int qq) {
        for (int i = qq; i < iq_; ++i) {
            active_[static_cast<std::size_t>(i)] = active_[static_cast<std::size_t>(i + 1)];
            u_[static_cast<std::size_t>(i)] = u_[static_cast<std::size_t>(i + 1)];
            if (i + 1 < iq_) {
                R_.col(i) = R_.col(i + 1);
            }
        }
        active_[static_cast<std::size_t>(iq_)] = -1;
        u_[static_cast<std::size_t>(iq_)] = 0.0;
        R_.col(iq_ - 1).setZero();
        --iq_;
        for (int j = qq; j < iq_; ++j) {
            double cc = R_(j, j);
            double ss = R_(j + 1, j);
            const double h = std::hypot(cc, ss);
            if (h == 0.0) {
                continue;
            }
            cc /= h;
            ss /= h;
            R_(j + 1, j) = 0.0;
            if (cc < 0.0) {
                R_(j, j) = -h;
                cc = -cc;
                ss = -ss;
            } else {
                R_(j, j) = h;
            }
            const double xny = ss / (1.0 + cc);
            for (int k = j + 1; k < iq_; ++k) {
                const double a = R_(j, k);
                const double b = R_(j + 1, k);
                R_(j, k) = a * cc + b * ss;
                R_(j + 1, k) = xny * (a + R_(j, k)) - b;
            }
            for (int k = 0; k < n_; ++k) {
                const double a = J_(k, j);
                const double b = J_(k, j + 1);
                J_(k, j) = a * cc + b * ss;
                J_(k, j + 1) = xny * (J_(k, j) + a) - b;
            }
        }
    }

    QpResult& finish(QpResult& out, int iter) const {
        const int m = static_cast<int>(qp_.A.rows());
        out.iterations = iter;
        out.x = x_;
        out.lambda = Eigen::VectorXd::Zero(m);
        out.mu_lower = Eigen::VectorXd::Zero(n_);
        out.mu_upper = Eigen::VectorXd::Zero(n_);
        for (int k = 0; k < iq_; ++k) {
            const Constraint& con = cons_[static_cast<std::size_t>(active_[static_cast<std::size_t>(k)])];
            const double mult = std::max(0.0, u_[static_cast<std::size_t>(k)]);
            switch (con.kind) {
                case Constraint::Row:
                    out.lambda[con.index] = mult;
                    break;
                case Constraint::Lower:
                    out.mu_lower[con.index] = mult;
                    break;
                case Constraint::Upper:
                    out.mu_upper[con.index] = mult;
                    break;
            }
        }
        out.objective = 0.5 * x_.dot(qp_.H * x_) + qp_.g.dot(x_);
        return out;
    }

    const QpProblem& qp_;
    int n_;
    int max_iter_ = 0;
    std::vector<Constraint> cons_;
    Eigen::MatrixXd J_;
    Eigen::MatrixXd R_;
    Eigen::VectorXd x_;
    std::vector<int> active_;
    std::vector<double> u_;
    int iq_ = 0;
    double r_norm_ = 1.0;
};

}  // namespace

QpResult solve_qp(const QpProblem& qp, int max_iterations) {
    const auto n = qp.g.size();
    if (qp.H.rows() != n || qp.H.cols() != n || qp.lower.size() != n || qp.upper.size() != n ||
        (qp.A.rows() > 0 && qp.A.cols() != n) || qp.b.size() != qp.A.rows()) {
        throw std::invalid_argument("solve_qp: inconsistent dimensions");
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        if (qp.lower[k] > qp.upper[k]) {
            QpResult out;
            out.status = QpStatus::Infeasible;
            out.x = Eigen::VectorXd::Zero(n);
            out.lambda = Eigen::VectorXd::Zero(qp.A.rows());
            out.mu_lower = Eigen::VectorXd::Zero(n);
            out.mu_upper = Eigen::VectorXd::Zero(n);
            return out;
        }
    }
    return DualActiveSet(qp, max_iterations).run();
}

}  // namespace pathopt
