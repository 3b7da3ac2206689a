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

#ifndef PATHOPT_EXPR_HPP
#define PATHOPT_EXPR_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pathopt/interval.hpp"

namespace pathopt {

enum class ExprOp : std::uint8_t {
    Constant,
    State,
    Control,
    Time,
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Sin,
    Cos,
    Exp,
    Log,
};

// Identifies a differentiation variable: x_k, u_k (zero-based) or t.
struct VarId {
    enum class Kind : std::uint8_t { State, Control, Time };
    Kind kind = Kind::Time;
    int index = 0;

    static VarId state(int k) { return {Kind::State, k}; }
    static VarId control(int k) { return {Kind::Control, k}; }
    static VarId time() { return {Kind::Time, 0}; }

    friend bool operator==(const VarId&, const VarId&) = default;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " at position " + std::to_string(position)),
          position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

// Raised for ln of a non-positive argument, division by zero and the
// interval counterparts.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Immutable expression DAG over states, controls and time. Copies share
// structure; building new expressions applies light simplification
// (constant folding, 0+e, 1*e, 0*e) but never rewrites e-e.
class Expr {
public:
    Expr();  // the constant 0
    Expr(double value);  // NOLINT: constants convert implicitly

    static Expr constant(double value);
    static Expr state(int k);
    static Expr control(int k);
    static Expr time();

    ExprOp op() const;
    double value() const;     // Constant only
    int index() const;        // State / Control index, or Pow exponent
    int exponent() const { return index(); }
    std::size_t arity() const;
    Expr arg(std::size_t i) const;

    bool is_constant() const { return op() == ExprOp::Constant; }
    bool is_constant(double v) const { return is_constant() && value() == v; }

    // Node identity, used for memoization over the DAG.
    const void* id() const { return node_.get(); }

    std::string to_string() const;

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);
    friend Expr pow(const Expr& a, int n);
    friend Expr sin(const Expr& a);
    friend Expr cos(const Expr& a);
    friend Expr exp(const Expr& a);
    friend Expr log(const Expr& a);

    struct Node;

private:
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    static Expr make(ExprOp op, Expr a, Expr b = Expr(), double value = 0.0, int index = 0);

    std::shared_ptr<const Node> node_;
};

// Parses the formula grammar: real literals, x1..xN, u1..uM, t, + - * / ^,
// parentheses, sin cos exp ln, unary minus. The exponent of ^ must fold to
// an integer constant.
Expr parse(std::string_view text, int n_x, int n_u);

Expr diff(const Expr& e, VarId var);

// Total time derivative applied `order` times along x' = f(x, u, t), with u
// held constant: L g = sum_k dg/dx_k * f_k + dg/dt.
Expr lie_derivative(const Expr& h, std::span<const Expr> f, int order);

// Highest state / control index referenced (-1 when none).
int max_state_index(const Expr& e);
int max_control_index(const Expr& e);

struct Bindings {
    std::span<const double> x;
    std::span<const double> u;
    double t = 0.0;
};

struct IntervalBindings {
    std::vector<Interval> x;
    std::vector<Interval> u;
    Interval t;
};

double eval(const Expr& e, const Bindings& b);

// Natural interval extension.
Interval eval_interval(const Expr& e, const IntervalBindings& b);

// Flat instruction list for a set of expressions, with common
// subexpressions merged. Built once, evaluated many times.
class Tape {
public:
    Tape() = default;
    explicit Tape(std::span<const Expr> outputs);

    std::size_t output_count() const { return outputs_.size(); }
    std::size_t size() const { return code_.size(); }

    void eval(std::span<const double> x, std::span<const double> u, double t,
              std::span<double> out, std::vector<double>& work) const;

private:
    struct Instr {
        ExprOp op;
        int a = -1;
        int b = -1;
        int index = 0;
        double value = 0.0;
    };
    std::vector<Instr> code_;
    std::vector<int> outputs_;
};

}  // namespace pathopt

#endif  // PATHOPT_EXPR_HPP
