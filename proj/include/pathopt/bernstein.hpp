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

#ifndef PATHOPT_BERNSTEIN_HPP
#define PATHOPT_BERNSTEIN_HPP

#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <tuple>
#include <vector>

#include "pathopt/interval.hpp"

namespace pathopt {

// Polynomial on [0, 1] written as sum_j b_j * B_j^r(tau).
struct BernsteinForm {
    std::vector<double> coeffs;  // r + 1 entries

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    double operator()(double tau) const;
};

// Maps the derivative vector D = [h, h', ..., h^(q-1)] taken at the midpoint
// of an interval of width `width` to the degree-r Bernstein coefficients of
// the Taylor polynomial on that interval.
class TransformMatrix {
public:
    TransformMatrix(int q, int r, double width);

    int q() const { return q_; }
    int r() const { return r_; }
    double width() const { return width_; }

    double operator()(int j, int i) const { return m_[static_cast<std::size_t>(j * q_ + i)]; }

    // b = M * D
    std::vector<double> apply(std::span<const double> d) const;
    // w^T * M, length q.
    std::vector<double> weighted_row(std::span<const double> w) const;

private:
    int q_;
    int r_;
    double width_;
    std::vector<double> m_;  // row-major (r+1) x q
};

namespace bernstein {

// Exact binomial coefficient from a Pascal triangle, n <= 60.
double binomial(int n, int k);

double basis(int j, int r, double tau);

// Degree elevation of power coefficients beta (degree n <= r) on [0, 1].
BernsteinForm power_to_bernstein(std::span<const double> beta, int r);

TransformMatrix transform_matrix(int q, int r, double width);

BernsteinForm coeffs_from_derivatives(const TransformMatrix& m, std::span<const double> d);

Interval enclosure(const BernsteinForm& bf);

// Bernstein enclosure of a power-basis polynomial p(t) = sum_s beta_s t^s
// over the interval T, through tau = (t - lo) / width.
Interval enclose_polynomial(std::span<const double> beta, const Interval& domain, int r);

}  // namespace bernstein

// Thread-safe memo of transform matrices keyed by (q, r, width).
class TransformCache {
public:
    std::shared_ptr<const TransformMatrix> get(int q, int r, double width);
    std::size_t size() const;

private:
    mutable std::shared_mutex mutex_;
    std::map<std::tuple<int, int, double>, std::shared_ptr<const TransformMatrix>> cache_;
};

}  // namespace pathopt

#endif  // PATHOPT_BERNSTEIN_HPP
