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

#include "pathopt/studies.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pathopt/bernstein.hpp"
#include "pathopt/problem_io.hpp"
#include "pathopt/random.hpp"

namespace pathopt {

namespace {

double quantile(const std::vector<double>& sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error(path + ": cannot write");
    }
    out << std::setprecision(17);
    return out;
}

// Power coefficients of prod_k (t - root_k) scaled by `lead`.
std::vector<double> expand(const std::vector<double>& factor_roots, double lead) {
    std::vector<double> beta = {lead};
    for (double root : factor_roots) {
        std::vector<double> next(beta.size() + 1, 0.0);
        for (std::size_t s = 0; s < beta.size(); ++s) {
            next[s + 1] += beta[s];
            next[s] -= root * beta[s];
        }
        beta = std::move(next);
    }
    return beta;
}

double horner(std::span<const double> beta, double t) {
    double v = 0.0;
    for (std::size_t s = beta.size(); s-- > 0;) {
        v = v * t + beta[s];
    }
    return v;
}

}  // namespace

Summary summarize(std::vector<double> values) {
    Summary s;
    if (values.empty()) {
        return s;
    }
    std::sort(values.begin(), values.end());
    s.count = static_cast<int>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    s.median = quantile(values, 0.5);
    s.q1 = quantile(values, 0.25);
    s.q3 = quantile(values, 0.75);
    return s;
}

GapStudy gap_study(const ProblemSpec& spec, int samples, std::uint64_t seed, int dense) {
    spec.validate();
    if (samples < 1) {
        throw std::invalid_argument("gap_study: samples must be at least 1");
    }
    if (dense < 2) {
        throw std::invalid_argument("gap_study: need at least two dense points");
    }
    const OdeModel model(spec.dynamics, spec.n_u);
    std::vector<LieTable> tables;
    for (const PathConstraint& c : spec.constraints) {
        tables.emplace_back(c.h, spec.dynamics, spec.q, spec.n_u);
    }
    const Partition partition = initial_partition(spec);
    TransformCache cache;
    Rng rng(seed);

    GapStudy study;
    study.problem = spec.name;
    std::vector<double> tb;
    std::vector<double> tm;
    std::vector<double> x(static_cast<std::size_t>(spec.n_x));
    std::vector<double> vals(static_cast<std::size_t>(spec.q));
    std::vector<double> work;
    for (int k = 0; k < samples; ++k) {
        ControlSchedule sched;
        sched.breakpoints = spec.breakpoints;
        sched.per_segment = spec.n_u;
        for (int i = 0; i < spec.decision_count(); ++i) {
            const auto c = static_cast<std::size_t>(i % spec.n_u);
            sched.values.push_back(uniform(rng, spec.u_lower[c], spec.u_upper[c]));
        }
        GapRow row;
        row.sample = k;
        try {
            const Trajectory tr = integrate(model, spec.x0, sched);
            row.gap_tb = -std::numeric_limits<double>::infinity();
            row.gap_tm = -std::numeric_limits<double>::infinity();
            for (const Subinterval& s : partition.items()) {
                const auto j = static_cast<std::size_t>(s.constraint);
                const BoundParams bp = spec.bound_params(s.constraint);
                const std::vector<double> d = eval_D(tr, tables[j], s.span.midpoint());
                const double w = s.span.width();
                const auto u = sched.segment_values(s.segment);
                const auto h_at = [&](double t) {
                    tr.state(t, x);
                    tables[j].values(x, u, t, vals, work);
                    return vals[0];
                };
                const double htb = bound::h_tb(bp, d, w, &cache);
                const double htm = bound::taylor_model_bound(bp, d, w);
                row.gap_tb = std::max(row.gap_tb, bound::overestimation_gap(htb, s.span, h_at, dense));
                row.gap_tm = std::max(row.gap_tm, bound::overestimation_gap(htm, s.span, h_at, dense));
            }
            tb.push_back(row.gap_tb);
            tm.push_back(row.gap_tm);
        } catch (const IntegrationError& e) {
            row.ok = false;
            row.gap_tb = std::numeric_limits<double>::quiet_NaN();
            row.gap_tm = std::numeric_limits<double>::quiet_NaN();
            row.error = e.what();
        }
        study.rows.push_back(row);
    }
    study.tb = summarize(tb);
    study.tm = summarize(tm);
    return study;
}

void write_gap_csv(const std::string& path, const GapStudy& study) {
    std::ofstream out = open_csv(path);
    out << "sample,gap_tb,gap_tm,ok\n";
    for (const GapRow& r : study.rows) {
        out << r.sample << ',' << r.gap_tb << ',' << r.gap_tm << ',' << (r.ok ? 1 : 0) << '\n';
    }
    out << "\n# summary\nmethod,count,median,mean,q1,q3,iqr\n";
    for (const auto& [name, s] : {std::pair{"tb", study.tb}, std::pair{"tm", study.tm}}) {
        out << name << ',' << s.count << ',' << s.median << ',' << s.mean << ',' << s.q1 << ',' << s.q3
            << ',' << s.iqr() << '\n';
    }
}

Interval natural_enclosure(std::span<const double> beta, const Interval& domain) {
    Interval sum(0.0);
    Interval power(1.0);
    for (std::size_t s = 0; s < beta.size(); ++s) {
        if (s > 0) {
            power = power * domain;
        }
        sum += Interval(beta[s]) * power;
    }
    return sum;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("loglog_slope: need two or more paired points");
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log2(x[i]);
        my += std::log2(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log2(x[i]) - mx;
        sxy += dx * (std::log2(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

RateStudy rate_study() {
    const double centre = 0.7;
    struct Poly {
        std::string name;
        std::vector<double> beta;
    };
    // (t - c)^2 times a factor without roots near c.
    const std::vector<Poly> polys = {
        {"constant", {1.5}},
        {"cubic", expand({centre, centre, centre - 3.0}, 1.0)},
        {"quartic", expand({centre, centre, centre + 2.5, centre - 4.0}, -0.5)},
    };
    RateStudy study;
    const int samples = 100000;
    for (const Poly& p : polys) {
        std::vector<double> widths;
        std::vector<double> eb;
        std::vector<double> ei;
        const int degree = std::max(1, static_cast<int>(p.beta.size()) - 1);
        for (int e = 1; e <= 8; ++e) {
            const double w = std::ldexp(1.0, -e);
            const Interval dom(centre - 0.5 * w, centre + 0.5 * w);
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (int k = 0; k < samples; ++k) {
                const double t = dom.lo() + dom.width() * static_cast<double>(k) / (samples - 1);
                const double v = horner(p.beta, t);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            const double exact = hi - lo;
            const Interval bern = bernstein::enclose_polynomial(p.beta, dom, degree);
            const Interval nat = natural_enclosure(p.beta, dom);
            RateRow row;
            row.polynomial = p.name;
            row.width = w;
            row.bernstein_error = std::max(0.0, bern.width() - exact);
            row.interval_error = std::max(0.0, nat.width() - exact);
            study.rows.push_back(row);
            widths.push_back(w);
            eb.push_back(row.bernstein_error);
            ei.push_back(row.interval_error);
        }
        if (p.beta.size() > 1) {
            study.fits.push_back({p.name, loglog_slope(widths, eb), loglog_slope(widths, ei)});
        }
    }
    return study;
}

void write_rate_csv(const std::string& path, const RateStudy& study) {
    std::ofstream out = open_csv(path);
    out << "polynomial,width,bernstein_error,interval_error\n";
    for (const RateRow& r : study.rows) {
        out << r.polynomial << ',' << r.width << ',' << r.bernstein_error << ',' << r.interval_error
            << '\n';
    }
    out << "\n# fitted log-log slopes\npolynomial,bernstein_slope,interval_slope\n";
    for (const RateFit& f : study.fits) {
        out << f.polynomial << ',' << f.bernstein_slope << ',' << f.interval_slope << '\n';
    }
}

std::vector<TableRow> build_table(const std::vector<std::string>& report_paths) {
    if (report_paths.empty()) {
        throw std::invalid_argument("table: at least one report is required");
    }
    std::vector<TableRow> rows;
    for (const std::string& path : report_paths) {
        const nlohmann::json doc = read_json(path);
        try {
            TableRow row;
            row.problem = doc.at("problem").get<std::string>();
            row.method = doc.at("method").get<std::string>();
            row.iterations = doc.at("iterations").get<int>();
            std::ostringstream counts;
            const auto& c = doc.at("constraint_counts");
            for (std::size_t j = 0; j < c.size(); ++j) {
                counts << (j ? "+" : "") << c.at(j).get<int>();
            }
            row.constraints = counts.str();
            row.wall_time = doc.at("wall_time").get<double>();
            row.cost = doc.at("cost").get<double>();
            row.converged = doc.at("converged").get<bool>();
            rows.push_back(row);
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(path + ": report schema mismatch (" + e.what() + ")");
        }
    }
    return rows;
}

void write_table_csv(const std::string& path, const std::vector<TableRow>& rows) {
    std::ofstream out = open_csv(path);
    out << "problem,method,iterations,constraints,wall_time,cost,converged\n";
    for (const TableRow& r : rows) {
        out << r.problem << ',' << r.method << ',' << r.iterations << ',' << r.constraints << ','
            << std::setprecision(6) << r.wall_time << ',' << std::setprecision(17) << r.cost << ','
            << (r.converged ? "yes" : "no") << '\n';
    }
}

double trapezoid_cost(const ProblemSpec& spec, const Expr& integrand, std::span<const double> u,
                      int points) {
    if (points < 2 * spec.segments()) {
        throw std::invalid_argument("trapezoid_cost: too few nodes");
    }
    const OdeModel model(spec.dynamics, spec.n_u);
    ControlSchedule sched;
    sched.breakpoints = spec.breakpoints;
    sched.per_segment = spec.n_u;
    sched.values.assign(u.begin(), u.end());
    IntegrationOptions io;
    io.rtol = 1e-12;
    io.atol = 1e-12;
    const Trajectory tr = integrate(model, spec.x0, sched, io);
    const int per = points / spec.segments();
    double total = 0.0;
    Bindings b;
    std::vector<double> x(static_cast<std::size_t>(spec.n_x));
    for (int s = 0; s < spec.segments(); ++s) {
        const double a = spec.breakpoints[static_cast<std::size_t>(s)];
        const double c = spec.breakpoints[static_cast<std::size_t>(s + 1)];
        const auto useg = sched.segment_values(s);
        double prev = 0.0;
        for (int k = 0; k <= per; ++k) {
            const double t = k == per ? c : a + (c - a) * static_cast<double>(k) / per;
            tr.state(t, x);
            b.x = x;
            b.u = useg;
            b.t = t;
            const double v = eval(integrand, b);
            if (k > 0) {
                total += 0.5 * (prev + v) * (c - a) / per;
            }
            prev = v;
        }
    }
    return total;
}

}  // namespace pathopt
