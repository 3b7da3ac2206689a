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

#ifndef PATHOPT_PROBLEM_IO_HPP
#define PATHOPT_PROBLEM_IO_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathopt/driver.hpp"

namespace pathopt {

// Load or schema error; the message names the file and the offending key.
class ProblemError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Integral cost carried as an extra state appended to the dynamics.
struct IntegralCost {
    Expr integrand;
    std::string text;
    int state = -1;  // zero-based index of the accumulating state
};

struct LoadedProblem {
    ProblemSpec spec;
    std::optional<IntegralCost> integral;
    std::vector<std::string> state_names;  // includes the cost state when present
    std::vector<bool> b_upper_estimated;   // per constraint
    nlohmann::json source;
};

struct LoadOptions {
    // Used when a constraint omits b_upper or gives "auto".
    std::uint64_t seed = 1;
    int estimate_samples = 64;
};

// Parses the problem schema. Formulas use x1..xN, u1..uM and t. An
// integral_cost becomes state x(N+1) with x(N+1)(t0) = 0 and is added to
// the terminal objective. Throws ProblemError.
LoadedProblem parse_problem(const nlohmann::json& doc, const LoadOptions& opts = {});
LoadedProblem load_problem(const std::string& path, const LoadOptions& opts = {});

struct SolveConfig {
    std::string problem_path;
    BoundMethod method = BoundMethod::TaylorBernstein;
    int max_iters = 20;
    int initial_splits = 1;
    std::uint64_t seed = 1;
    std::vector<double> u0;  // empty when the box midpoint was used
};

nlohmann::json report_to_json(const SolveReport& report, const LoadedProblem& problem,
                              const SolveConfig& config);

// Writes `doc` with two-space indentation and a trailing newline.
void write_json(const std::string& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::string& path);

BoundMethod parse_method(const std::string& tag);  // tb | tm | full tags

}  // namespace pathopt

#endif  // PATHOPT_PROBLEM_IO_HPP
