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

#ifndef PATHOPT_STUDIES_HPP
#define PATHOPT_STUDIES_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pathopt/driver.hpp"

namespace pathopt {

struct Summary {
    int count = 0;
    double median = 0.0;
    double mean = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double iqr() const { return q3 - q1; }
};

// Linear-interpolation quantiles of the sorted sample; empty input gives
// a zero summary.
Summary summarize(std::vector<double> values);

struct GapRow {
    int sample = 0;
    bool ok = true;  // false when integration failed; excluded from stats
    double gap_tb = 0.0;
    double gap_tm = 0.0;
    std::string error;
};

struct GapStudy {
    std::string problem;
    std::vector<GapRow> rows;
    Summary tb;
    Summary tm;
};

// Overestimation gap E = bound - max_T h for both bounds on the initial
// partition at uniformly sampled controls; per sample, the largest gap
// over all subintervals and constraints. `dense` points per subinterval
// estimate max_T h.
GapStudy gap_study(const ProblemSpec& spec, int samples, std::uint64_t seed, int dense = 200);
void write_gap_csv(const std::string& path, const GapStudy& study);

struct RateRow {
    std::string polynomial;
    double width = 0.0;
    double bernstein_error = 0.0;  // enclosure width minus exact range width
    double interval_error = 0.0;
};

struct RateFit {
    std::string polynomial;
    double bernstein_slope = 0.0;
    double interval_slope = 0.0;
};

struct RateStudy {
    std::vector<RateRow> rows;
    std::vector<RateFit> fits;  // non-constant polynomials only
};

// Built-in cubic and quartic test polynomials with a stationary point at
// the interval centre c, plus a constant; widths 2^-1 .. 2^-8; exact range
// by sampling 1e5 points.
RateStudy rate_study();
void write_rate_csv(const std::string& path, const RateStudy& study);

// Natural interval extension of sum_s beta_s t^s over `domain`, with t^s
// formed as an s-fold product.
Interval natural_enclosure(std::span<const double> beta, const Interval& domain);

// Least-squares slope of log2(y) against log2(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct TableRow {
    std::string problem;
    std::string method;
    int iterations = 0;
    std::string constraints;  // per constraint, joined by '+'
    double wall_time = 0.0;
    double cost = 0.0;
    bool converged = false;
};

// Reads solve reports; a missing field raises std::invalid_argument naming
// the file.
std::vector<TableRow> build_table(const std::vector<std::string>& report_paths);
void write_table_csv(const std::string& path, const std::vector<TableRow>& rows);

// Trapezoidal quadrature of `integrand` along the trajectory of `u`
// using `points` uniform nodes.
double trapezoid_cost(const ProblemSpec& spec, const Expr& integrand, std::span<const double> u,
                      int points = 20001);

}  // namespace pathopt

#endif  // PATHOPT_STUDIES_HPP
