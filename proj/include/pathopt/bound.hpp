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

#ifndef PATHOPT_BOUND_HPP
#define PATHOPT_BOUND_HPP

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pathopt/bernstein.hpp"
#include "pathopt/interval.hpp"

namespace pathopt {

// Parameters of the smooth Taylor-Bernstein upper bound for one path
// constraint.
struct BoundParams {
    int q = 3;            // Taylor order
    int r = 2;            // Bernstein degree, r >= q - 1
    double rho = 1500.0;  // log-sum-exp sharpness
    double b_upper = 0.0; // bound on the q-th time derivative, as used by the remainder

    // Constant gap between the log-sum-exp term and the true maximum
    // coefficient: ln(r + 1) / rho.
    double smoothing_bias() const;

    // Throws std::invalid_argument on q < 1, r < q - 1, rho <= 0, b_upper < 0.
    void validate() const;

    // B_U from global bounds [lambda_lo, lambda_hi] on the q-th derivative:
    // max(|lo|, |hi|) for odd q, max(0, hi) for even q.
    static double b_upper_from_derivative_bounds(int q, double lambda_lo, double lambda_hi);
};

enum class BoundMethod { TaylorBernstein, TaylorModel };

struct BoundEval {
    double value = 0.0;
    Eigen::VectorXd gradient;
    std::vector<double> coeffs;
    std::vector<double> weights;
    double remainder = 0.0;
};

namespace bound {

// (1/q!) * (width/2)^q * B_U
double remainder_bound(const BoundParams& params, double width);

// (1/rho) ln sum_j exp(rho v_j), shifted by the exact maximum.
double lse(std::span<const double> values, double rho);

// lse(values) - max(values), evaluated directly in extended precision so
// that tiny but positive excesses are not lost to cancellation.
long double lse_excess(std::span<const double> values, double rho);

// Natural log of lse(values) - max(values). Finite exactly when the excess
// is positive, including excesses far below the smallest representable
// number (a coefficient e^{-15000} below the maximum gives about -15007).
// -inf for a single value.
double lse_log_excess(std::span<const double> values, double rho);

// Softmax weights exp(rho v_j) / sum_l exp(rho v_l); non-negative, sum to 1.
std::vector<double> lse_weights(std::span<const double> values, double rho);

// H_TB = lse(M(width) D) + remainder. `cache` may be null.
double h_tb(const BoundParams& params, std::span<const double> d, double width,
            TransformCache* cache = nullptr);

// Value and gradient w^T M gradD; grad_d is q x n_u.
BoundEval evaluate_h_tb(const BoundParams& params, std::span<const double> d,
                        const Eigen::Ref<const Eigen::MatrixXd>& grad_d, double width,
                        TransformCache* cache = nullptr);

Eigen::VectorXd grad_h_tb(const BoundParams& params, std::span<const double> d,
                          const Eigen::Ref<const Eigen::MatrixXd>& grad_d, double width,
                          TransformCache* cache = nullptr);

// Upper endpoint of the natural interval extension of the centered Taylor
// polynomial sum_i (D_i / i!) S^i, S = [-w/2, w/2], with S^i formed as an
// i-fold interval product (so S^2 = [-w^2/4, w^2/4]), plus the remainder.
double taylor_model_bound(const BoundParams& params, std::span<const double> d, double width);

// That upper endpoint equals D_0 + sum_i |D_i| (w/2)^i / i!, the maximum of
// the 2^(q-1) linear forms D_0 + sum_i +-(w/2)^i / i! D_i. Row k of the
// returned matrix (2^(q-1) x q) holds one form, so
// taylor_model_bound = max_k (P D)_k + remainder.
Eigen::MatrixXd taylor_model_pieces(int q, double width);

// E = bound - max_{t in T} h(t), with the maximum taken over `samples`
// uniformly spaced points supplied by `h_at`.
double overestimation_gap(double bound_value, const Interval& domain,
                          const std::function<double(double)>& h_at, int samples = 1000);

}  // namespace bound

}  // namespace pathopt

#endif  // PATHOPT_BOUND_HPP
