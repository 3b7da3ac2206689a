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

#include "pathopt/bernstein.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace pathopt {

namespace {

constexpr int kMaxBinomial = 60;

using PascalTable = std::array<std::array<double, kMaxBinomial + 1>, kMaxBinomial + 1>;

const PascalTable& pascal() {
    static const PascalTable table = [] {
        PascalTable t{};
        for (int n = 0; n <= kMaxBinomial; ++n) {
            t[n][0] = 1.0;
            for (int k = 1; k <= n; ++k) {
                t[n][k] = t[n - 1][k - 1] + (k <= n - 1 ? t[n - 1][k] : 0.0);
            }
        }
        return t;
    }();
    return table;
}

}  // namespace

double BernsteinForm::operator()(double tau) const {
    // de Casteljau
    std::vector<double> work = coeffs;
    for (std::size_t level = 1; level < work.size(); ++level) {
        for (std::size_t j = 0; j + level < work.size(); ++j) {
            work[j] = (1.0 - tau) * work[j] + tau * work[j + 1];
        }
    }
    return work.empty() ? 0.0 : work[0];
}

namespace bernstein {

double binomial(int n, int k) {
    if (n < 0 || n > kMaxBinomial) {
        throw std::out_of_range("binomial: n outside table");
    }
    if (k < 0 || k > n) {
        return 0.0;
    }
    return pascal()[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

double basis(int j, int r, double tau) {
    if (r < 0 || j < 0 || j > r) {
        throw std::out_of_range("bernstein::basis: index out of range");
    }
    return binomial(r, j) * std::pow(tau, j) * std::pow(1.0 - tau, r - j);
}

BernsteinForm power_to_bernstein(std::span<const double> beta, int r) {
    const int n = static_cast<int>(beta.size()) - 1;
    if (n < 0) {
        throw std::invalid_argument("power_to_bernstein: empty coefficient vector");
    }
    if (r < n) {
        throw std::invalid_argument("power_to_bernstein: Bernstein degree below polynomial degree");
    }
    BernsteinForm bf;
    bf.coeffs.assign(static_cast<std::size_t>(r + 1), 0.0);
    for (int j = 0; j <= r; ++j) {
        double b = 0.0;
        for (int s = 0; s <= std::min(j, n); ++s) {
            b += beta[static_cast<std::size_t>(s)] * binomial(j, s) / binomial(r, s);
        }
        bf.coeffs[static_cast<std::size_t>(j)] = b;
    }
    return bf;
}

TransformMatrix transform_matrix(int q, int r, double width) { return TransformMatrix(q, r, width); }

BernsteinForm coeffs_from_derivatives(const TransformMatrix& m, std::span<const double> d) {
    return BernsteinForm{m.apply(d)};
}

Interval enclosure(const BernsteinForm& bf) {
    if (bf.coeffs.empty()) {
        throw std::invalid_argument("enclosure: empty Bernstein form");
    }
    const auto [lo, hi] = std::minmax_element(bf.coeffs.begin(), bf.coeffs.end());
    return Interval(*lo, *hi);
}

Interval enclose_polynomial(std::span<const double> beta, const Interval& domain, int r) {
    const int n = static_cast<int>(beta.size()) - 1;
    const double lo = domain.lo();
    const double w = domain.width();
    // p(lo + w*tau) = sum_l alpha_l tau^l
    std::vector<double> alpha(beta.size(), 0.0);
    for (int s = 0; s <= n; ++s) {
        for (int l = 0; l <= s; ++l) {
            alpha[static_cast<std::size_t>(l)] += beta[static_cast<std::size_t>(s)] * binomial(s, l) *
                                                  std::pow(lo, s - l) * std::pow(w, l);
        }
    }
    return enclosure(power_to_bernstein(alpha, r));
}

}  // namespace bernstein

TransformMatrix::TransformMatrix(int q, int r, double width) : q_(q), r_(r), width_(width) {
    if (q < 1) {
        throw std::invalid_argument("transform_matrix: Taylor order must be at least 1");
    }
    if (r < q - 1) {
        throw std::invalid_argument("transform_matrix: Bernstein degree below polynomial degree");
    }
    if (!(width > 0.0)) {
        throw std::invalid_argument("transform_matrix: interval width must be positive");
    }
    using bernstein::binomial;
    m_.assign(static_cast<std::size_t>((r + 1) * q), 0.0);
    double scale = 1.0;  // width^i / i!
    for (int i = 0; i < q; ++i) {
        if (i > 0) {
            scale *= width / i;
        }
        for (int j = 0; j <= r; ++j) {
            double acc = 0.0;
            for (int l = 0; l <= std::min(j, i); ++l) {
                acc += binomial(j, l) / binomial(r, l) * binomial(i, l) * std::pow(-0.5, i - l);
            }
            m_[static_cast<std::size_t>(j * q + i)] = scale * acc;
        }
    }
}

std::vector<double> TransformMatrix::apply(std::span<const double> d) const {
    if (d.size() != static_cast<std::size_t>(q_)) {
        throw std::invalid_argument("TransformMatrix::apply: derivative vector length must equal q");
    }
    std::vector<double> b(static_cast<std::size_t>(r_ + 1), 0.0);
    for (int j = 0; j <= r_; ++j) {
        double acc = 0.0;
        for (int i = 0; i < q_; ++i) {
            acc += (*this)(j, i) * d[static_cast<std::size_t>(i)];
        }
        b[static_cast<std::size_t>(j)] = acc;
    }
    return b;
}

std::vector<double> TransformMatrix::weighted_row(std::span<const double> w) const {
    if (w.size() != static_cast<std::size_t>(r_ + 1)) {
        throw std::invalid_argument("TransformMatrix::weighted_row: weight vector length must equal r+1");
    }
    std::vector<double> row(static_cast<std::size_t>(q_), 0.0);
    for (int j = 0; j <= r_; ++j) {
        for (int i = 0; i < q_; ++i) {
            row[static_cast<std::size_t>(i)] += w[static_cast<std::size_t>(j)] * (*this)(j, i);
        }
    }
    return row;
}

std::shared_ptr<const TransformMatrix> TransformCache::get(int q, int r, double width) {
    const auto key = std::make_tuple(q, r, width);
    {
        std::shared_lock lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) {
            return it->second;
        }
    }
    auto m = std::make_shared<const TransformMatrix>(q, r, width);
    std::unique_lock lock(mutex_);
    return cache_.emplace(key, std::move(m)).first->second;
}

std::size_t TransformCache::size() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
}

}  // namespace pathopt
