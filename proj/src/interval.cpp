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

#include "pathopt/interval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace pathopt {

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(lo <= hi)) {
        throw std::invalid_argument("Interval: lower bound exceeds upper bound");
    }
}

std::vector<Interval> Interval::split_equal(int n) const {
    if (n < 1) {
        throw std::invalid_argument("Interval::split_equal: part count must be positive");
    }
    std::vector<Interval> parts;
    parts.reserve(static_cast<size_t>(n));
    const double w = width();
    double left = lo_;
    for (int i = 1; i <= n; ++i) {
        // The last right endpoint is hi_ exactly so that the union is the
        // original interval without drift.
        const double right = (i == n) ? hi_ : lo_ + w * (static_cast<double>(i) / n);
        parts.emplace_back(left, std::max(left, right));
        left = parts.back().hi();
    }
    return parts;
}

Interval& Interval::operator+=(const Interval& rhs) {
    lo_ += rhs.lo_;
    hi_ += rhs.hi_;
    return *this;
}

Interval& Interval::operator-=(const Interval& rhs) {
    const double lo = lo_ - rhs.hi_;
    hi_ = hi_ - rhs.lo_;
    lo_ = lo;
    return *this;
}

Interval& Interval::operator*=(const Interval& rhs) {
    *this = *this * rhs;
    return *this;
}

Interval operator+(const Interval& a, const Interval& b) {
    return Interval(a.lo() + b.lo(), a.hi() + b.hi());
}

Interval operator-(const Interval& a, const Interval& b) {
    return Interval(a.lo() - b.hi(), a.hi() - b.lo());
}

Interval operator-(const Interval& a) { return Interval(-a.hi(), -a.lo()); }

Interval operator*(const Interval& a, const Interval& b) {
    const double p1 = a.lo() * b.lo();
    const double p2 = a.lo() * b.hi();
    const double p3 = a.hi() * b.lo();
    const double p4 = a.hi() * b.hi();
    return Interval(std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4}));
}

Interval pow_int(const Interval& a, int n) {
    if (n < 0) {
        throw std::invalid_argument("pow_int: exponent must be non-negative");
    }
    if (n == 0) {
        return Interval(1.0);
    }
    if (n == 1) {
        return a;
    }
    const double lo_n = std::pow(a.lo(), n);
    const double hi_n = std::pow(a.hi(), n);
    if (n % 2 == 1) {
        return Interval(lo_n, hi_n);
    }
    if (a.lo() >= 0.0) {
        return Interval(lo_n, hi_n);
    }
    if (a.hi() <= 0.0) {
        return Interval(hi_n, lo_n);
    }
    return Interval(0.0, std::max(lo_n, hi_n));
}

Interval reciprocal(const Interval& a) {
    if (a.contains(0.0)) {
        throw std::domain_error("reciprocal: interval contains zero");
    }
    return Interval(1.0 / a.hi(), 1.0 / a.lo());
}

Interval hull(const Interval& a, const Interval& b) {
    return Interval(std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi()));
}

namespace {

// True if lo <= phase + 2k*pi <= hi for some integer k.
bool contains_phase(double lo, double hi, double phase) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double k = std::ceil((lo - phase) / two_pi);
    return phase + k * two_pi <= hi;
}

}  // namespace

Interval sin(const Interval& a) {
    constexpr double pi = std::numbers::pi;
    if (a.width() >= 2.0 * pi) {
        return Interval(-1.0, 1.0);
    }
    double lo = std::min(std::sin(a.lo()), std::sin(a.hi()));
    double hi = std::max(std::sin(a.lo()), std::sin(a.hi()));
    if (contains_phase(a.lo(), a.hi(), 0.5 * pi)) {
        hi = 1.0;
    }
    if (contains_phase(a.lo(), a.hi(), -0.5 * pi)) {
        lo = -1.0;
    }
    return Interval(lo, hi);
}

Interval cos(const Interval& a) {
    constexpr double pi = std::numbers::pi;
    if (a.width() >= 2.0 * pi) {
        return Interval(-1.0, 1.0);
    }
    double lo = std::min(std::cos(a.lo()), std::cos(a.hi()));
    double hi = std::max(std::cos(a.lo()), std::cos(a.hi()));
    if (contains_phase(a.lo(), a.hi(), 0.0)) {
        hi = 1.0;
    }
    if (contains_phase(a.lo(), a.hi(), pi)) {
        lo = -1.0;
    }
    return Interval(lo, hi);
}

Interval exp(const Interval& a) { return Interval(std::exp(a.lo()), std::exp(a.hi())); }

Interval log(const Interval& a) {
    if (a.lo() <= 0.0) {
        throw std::domain_error("log: interval not strictly positive");
    }
    return Interval(std::log(a.lo()), std::log(a.hi()));
}

std::ostream& operator<<(std::ostream& os, const Interval& a) {
    return os << '[' << a.lo() << ", " << a.hi() << ']';
}

}  // namespace pathopt
