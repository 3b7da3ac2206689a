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

#ifndef PATHOPT_INTERVAL_HPP
#define PATHOPT_INTERVAL_HPP

#include <iosfwd>
#include <vector>

namespace pathopt {

// Closed real interval [lo, hi].
//
// No directed rounding is performed: enclosures hold to floating-point
// accuracy, which is what the bound construction downstream needs.
class Interval {
public:
    constexpr Interval() = default;
    constexpr Interval(double point) : lo_(point), hi_(point) {}  // NOLINT: implicit by intent
    Interval(double lo, double hi);

    constexpr double lo() const { return lo_; }
    constexpr double hi() const { return hi_; }

    constexpr double width() const { return hi_ - lo_; }
    constexpr double midpoint() const { return 0.5 * (lo_ + hi_); }
    constexpr double magnitude() const { return hi_ > -lo_ ? hi_ : -lo_; }

    constexpr bool contains(double x) const { return lo_ <= x && x <= hi_; }
    constexpr bool contains(const Interval& other) const {
        return lo_ <= other.lo_ && other.hi_ <= hi_;
    }
    constexpr bool is_degenerate() const { return lo_ == hi_; }

    // Splits into n contiguous parts of equal width. Adjacent parts share an
    // endpoint bit-for-bit and the outer endpoints are the original ones.
    std::vector<Interval> split_equal(int n) const;

    Interval& operator+=(const Interval& rhs);
    Interval& operator-=(const Interval& rhs);
    Interval& operator*=(const Interval& rhs);

    friend constexpr bool operator==(const Interval&, const Interval&) = default;

private:
    double lo_ = 0.0;
    double hi_ = 0.0;
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);
Interval operator*(const Interval& a, const Interval& b);

// Tight integer power: even powers of an interval straddling zero have a
// lower bound of zero.
Interval pow_int(const Interval& a, int n);

// Division is defined only when the divisor excludes zero.
Interval reciprocal(const Interval& a);

Interval hull(const Interval& a, const Interval& b);

Interval sin(const Interval& a);
Interval cos(const Interval& a);
Interval exp(const Interval& a);
Interval log(const Interval& a);

inline double width(const Interval& a) { return a.width(); }
inline double midpoint(const Interval& a) { return a.midpoint(); }
inline std::vector<Interval> split_equal(const Interval& a, int n) { return a.split_equal(n); }

std::ostream& operator<<(std::ostream& os, const Interval& a);

}  // namespace pathopt

#endif  // PATHOPT_INTERVAL_HPP
