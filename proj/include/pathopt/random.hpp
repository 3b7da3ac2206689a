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

#ifndef PATHOPT_RANDOM_HPP
#define PATHOPT_RANDOM_HPP

#include <cstdint>
#include <random>

namespace pathopt {

// All sampling uses std::mt19937_64, whose output sequence is fixed by the
// standard. Uniform doubles are formed from the top 53 bits directly, since
// std::uniform_real_distribution is implementation-defined.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

}  // namespace pathopt

#endif  // PATHOPT_RANDOM_HPP
