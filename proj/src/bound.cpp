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

#include "pathopt/bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pathopt {

double BoundParams::smoothing_bias() const { return std::log(static_cast<double>(r + 1)) / rho; }

void BoundParams::validate() const {
    if (q < 1) {
        throw std::invalid_argument("bound: Taylor order q must be at least 1");
    }
    if (r < q - 1) {
        throw std::invalid_argument("bound: Bernstein degree r must be at least q - 1");
    }
    if (!(rho > 0.0)) {
        throw std::invalid_argument("bound: smoothing parameter rho must be positive");
    }
    if (!(b_upper >= 0.0)) {
        throw std::invalid_argument("bound: remainder constant B_U must be non-negative");
    }
}

double BoundParams::b_upper_from_derivative_bounds(int q, double lambda_lo, double lambda_hi) {
    if (lambda_lo > lambda_hi) {
        throw std::invalid_argument("bound: derivative bounds out of order");
    }
    if (q % 2 == 1) {
        return std::max(std::abs(lambda_lo), std::abs(lambda_hi));
    }
    return std::max(0.0, lambda_hi);
}

namespace bound {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) {
        f *= i;
    }
    return f;
}

std::shared_ptr<const TransformMatrix> matrix_for(const BoundParams& params, double width,
                                                  TransformCache* cache) {
    if (cache != nullptr) {
        return cache->get(params.q, params.r, width);
    }
    return std::make_shared<const TransformMatrix>(params.q, params.r, width);
}

}  // namespace

double remainder_bound(const BoundParams& params, double width) {
    if (!(width > 0.0)) {
        throw std::invalid_argument("remainder_bound: width must be positive");
    }
    return std::pow(0.5 * width, params.q) * params.b_upper / factorial(params.q);
}

double lse(std::span<const double> values, double rho) {
    if (values.empty()) {
        throw std::invalid_argument("lse: empty input");
    }
    const double vmax = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) {
        sum += std::exp(rho * (v - vmax));
    }
    return vmax + std::log(sum) / rho;
}

long double lse_excess(std::span<const double> values, double rho) {
    if (values.empty()) {
        throw std::invalid_argument("lse_excess: empty input");
    }
    const auto top = std::max_element(values.begin(), values.end());
    long double tail = 0.0L;
    for (auto it = values.begin(); it != values.end(); ++it) {
        if (it == top) {
            continue;
        }
        tail += std::exp(static_cast<long double>(rho) *
                         (static_cast<long double>(*it) - static_cast<long double>(*top)));
    }
    return std::log1p(tail) / static_cast<long double>(rho);
}

double lse_log_excess(std::span<const double> values, double rho) {
    if (values.empty()) {
        throw std::invalid_argument("lse_log_excess: empty input");
    }
    const auto top = std::max_element(values.begin(), values.end());
    // log of the tail sum sum_{j != top} exp(rho (v_j - v_top)), shifted by its
    // own largest exponent so that it never underflows.
    double lead = -std::numeric_limits<double>::infinity();
    for (auto it = values.begin(); it != values.end(); ++it) {
        if (it != top) {
            lead = std::max(lead, rho * (*it - *top));
        }
    }
    if (lead == -std::numeric_limits<double>::infinity()) {
        return lead;
    }
    double scaled = 0.0;
    for (auto it = values.begin(); it != values.end(); ++it) {
        if (it != top) {
            scaled += std::exp(rho * (*it - *top) - lead);
        }
    }
    const double log_tail = lead + std::log(scaled);
    if (log_tail > -30.0) {
        return std::log(std::log1p(std::exp(log_tail))) - std::log(rho);
    }
    // log1p(x) = x (1 - x/2 + ...) for the tiny tail x.
    return log_tail + std::log1p(-0.5 * std::exp(log_tail)) - std::log(rho);
}

std::vector<double> lse_weights(std::span<const double> values, double rho) {
    if (values.empty()) {
        throw std::invalid_argument("lse_weights: empty input");
    }
    const double vmax = *std::max_element(values.begin(), values.end());
    std::vector<double> w(values.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        w[j] = std::exp(rho * (values[j] - vmax));
        sum += w[j];
    }
    for (double& wj : w) {
        wj /= sum;
    }
    return w;
}

double h_tb(const BoundParams& params, std::span<const double> d, double width,
            TransformCache* cache) {
    const auto m = matrix_for(params, width, cache);
    const std::vector<double> b = m->apply(d);
    return lse(b, params.rho) + remainder_bound(params, width);
}

BoundEval evaluate_h_tb(const BoundParams& params, std::span<const double> d,
                        const Eigen::Ref<const Eigen::MatrixXd>& grad_d, double width,
                        TransformCache* cache) {
    if (grad_d.rows() != params.q) {
        throw std::invalid_argument("evaluate_h_tb: Jacobian must have q rows");
    }
    const auto m = matrix_for(params, width, cache);
    BoundEval out;
    out.coeffs = m->apply(d);
    out.remainder = remainder_bound(params, width);
    out.value = lse(out.coeffs, params.rho) + out.remainder;
    out.weights = lse_weights(out.coeffs, params.rho);
    const std::vector<double> row = m->weighted_row(out.weights);
    out.gradient = Eigen::VectorXd::Zero(grad_d.cols());
    for (int i = 0; i < params.q; ++i) {
        out.gradient += row[static_cast<std::size_t>(i)] * grad_d.row(i).transpose();
    }
    return out;
}

Eigen::VectorXd grad_h_tb(const BoundParams& params, std::span<const double> d,
                          const Eigen::Ref<const Eigen::MatrixXd>& grad_d, double width,
                          TransformCache* cache) {
    return evaluate_h_tb(params, d, grad_d, width, cache).gradient;
}

double taylor_model_bound(const BoundParams& params, std::span<const double> d, double width) {
    if (d.size() != static_cast<std::size_t>(params.q)) {
        throw std::invalid_argument("taylor_model_bound: derivative vector length must equal q");
    }
    const Interval offset(-0.5 * width, 0.5 * width);
    // Powers of the offset are formed as repeated products, as the natural
    // extension of s * s * ... * s does.
    Interval poly(d[0]);
    Interval power(1.0);
    for (int i = 1; i < params.q; ++i) {
        power = power * offset;
        poly += Interval(d[static_cast<std::size_t>(i)] / factorial(i)) * power;
    }
    return poly.hi() + remainder_bound(params, width);
}

Eigen::MatrixXd taylor_model_pieces(int q, double width) {
    if (q < 1) {
        throw std::invalid_argument("taylor_model_pieces: q must be at least 1");
    }
    const int terms = q - 1;
    const int count = 1 << terms;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(count, q);
    for (int k = 0; k < count; ++k) {
        p(k, 0) = 1.0;
        for (int i = 1; i < q; ++i) {
            const bool bit = ((k >> (i - 1)) & 1) != 0;
            const double mag = std::pow(0.5 * width, i) / factorial(i);
            p(k, i) = bit ? mag : -mag;
        }
    }
    return p;
}

double overestimation_gap(double bound_value, const Interval& domain,
                          const std::function<double(double)>& h_at, int samples) {
    if (samples < 2) {
        throw std::invalid_argument("overestimation_gap: need at least two samples");
    }
    double hmax = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
        const double t = (k == samples - 1)
                             ? domain.hi()
                             : domain.lo() + domain.width() * static_cast<double>(k) / (samples - 1);
        hmax = std::max(hmax, h_at(t));
    }
    return bound_value - hmax;
}

}  // namespace bound

}  // namespace pathopt
