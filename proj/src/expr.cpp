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

#include "pathopt/expr.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace pathopt {

struct Expr::Node {
    ExprOp op = ExprOp::Constant;
    double value = 0.0;
    int index = 0;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
};

namespace {

std::shared_ptr<const Expr::Node> zero_node() {
    static const auto node = std::make_shared<const Expr::Node>();
    return node;
}

std::size_t arity_of(ExprOp op) {
    switch (op) {
    case ExprOp::Constant:
    case ExprOp::State:
    case ExprOp::Control:
    case ExprOp::Time:
        return 0;
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul:
    case ExprOp::Div:
        return 2;
    default:
        return 1;
    }
}

double apply_unary(ExprOp op, double a, int n) {
    switch (op) {
    case ExprOp::Neg:
        return -a;
    case ExprOp::Pow:
        return std::pow(a, n);
    case ExprOp::Sin:
        return std::sin(a);
    case ExprOp::Cos:
        return std::cos(a);
    case ExprOp::Exp:
        return std::exp(a);
    case ExprOp::Log:
        if (!(a > 0.0)) {
            throw DomainError("ln of non-positive argument");
        }
        return std::log(a);
    default:
        throw std::logic_error("apply_unary: not a unary op");
    }
}

double apply_binary(ExprOp op, double a, double b) {
    switch (op) {
    case ExprOp::Add:
        return a + b;
    case ExprOp::Sub:
        return a - b;
    case ExprOp::Mul:
        return a * b;
    case ExprOp::Div:
        if (b == 0.0) {
            throw DomainError("division by zero");
        }
        return a / b;
    default:
        throw std::logic_error("apply_binary: not a binary op");
    }
}

}  // namespace

Expr::Expr() : node_(zero_node()) {}

Expr::Expr(double value) {
    if (value == 0.0) {
        node_ = zero_node();
    } else {
        node_ = std::make_shared<const Node>(Node{ExprOp::Constant, value, 0, nullptr, nullptr});
    }
}

Expr Expr::constant(double value) { return Expr(value); }

Expr Expr::state(int k) {
    return Expr(std::make_shared<const Node>(Node{ExprOp::State, 0.0, k, nullptr, nullptr}));
}

Expr Expr::control(int k) {
    return Expr(std::make_shared<const Node>(Node{ExprOp::Control, 0.0, k, nullptr, nullptr}));
}

Expr Expr::time() {
    return Expr(std::make_shared<const Node>(Node{ExprOp::Time, 0.0, 0, nullptr, nullptr}));
}

ExprOp Expr::op() const { return node_->op; }
double Expr::value() const { return node_->value; }
int Expr::index() const { return node_->index; }
std::size_t Expr::arity() const { return arity_of(node_->op); }

Expr Expr::arg(std::size_t i) const {
    if (i >= arity()) {
        throw std::out_of_range("Expr::arg: index out of range");
    }
    return Expr(i == 0 ? node_->a : node_->b);
}

Expr Expr::make(ExprOp op, Expr a, Expr b, double value, int index) {
    return Expr(std::make_shared<const Node>(
        Node{op, value, index, std::move(a.node_),
             arity_of(op) == 2 ? std::move(b.node_) : nullptr}));
}

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) {
        return Expr(a.value() + b.value());
    }
    if (a.is_constant(0.0)) {
        return b;
    }
    if (b.is_constant(0.0)) {
        return a;
    }
    return Expr::make(ExprOp::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) {
        return Expr(a.value() - b.value());
    }
    if (b.is_constant(0.0)) {
        return a;
    }
    if (a.is_constant(0.0)) {
        return -b;
    }
    return Expr::make(ExprOp::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) {
        return Expr(a.value() * b.value());
    }
    if (a.is_constant(0.0) || b.is_constant(0.0)) {
        return Expr();
    }
    if (a.is_constant(1.0)) {
        return b;
    }
    if (b.is_constant(1.0)) {
        return a;
    }
    if (a.is_constant(-1.0)) {
        return -b;
    }
    if (b.is_constant(-1.0)) {
        return -a;
    }
    return Expr::make(ExprOp::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant() && b.value() != 0.0) {
        return Expr(a.value() / b.value());
    }
    if (a.is_constant(0.0) && !b.is_constant(0.0)) {
        return Expr();
    }
    if (b.is_constant(1.0)) {
        return a;
    }
    return Expr::make(ExprOp::Div, a, b);
}

Expr operator-(const Expr& a) {
    if (a.is_constant()) {
        return Expr(-a.value());
    }
    if (a.op() == ExprOp::Neg) {
        return a.arg(0);
    }
    return Expr::make(ExprOp::Neg, a);
}

Expr pow(const Expr& a, int n) {
    if (n < 0) {
        return Expr(1.0) / pow(a, -n);
    }
    if (n == 0) {
        return Expr(1.0);
    }
    if (n == 1) {
        return a;
    }
    if (a.is_constant()) {
        return Expr(std::pow(a.value(), n));
    }
    return Expr::make(ExprOp::Pow, a, Expr(), 0.0, n);
}

Expr sin(const Expr& a) {
    return a.is_constant() ? Expr(std::sin(a.value())) : Expr::make(ExprOp::Sin, a);
}

Expr cos(const Expr& a) {
    return a.is_constant() ? Expr(std::cos(a.value())) : Expr::make(ExprOp::Cos, a);
}

Expr exp(const Expr& a) {
    return a.is_constant() ? Expr(std::exp(a.value())) : Expr::make(ExprOp::Exp, a);
}

Expr log(const Expr& a) {
    if (a.is_constant() && a.value() > 0.0) {
        return Expr(std::log(a.value()));
    }
    return Expr::make(ExprOp::Log, a);
}

std::string Expr::to_string() const {
    std::ostringstream os;
    os.precision(17);
    switch (op()) {
    case ExprOp::Constant:
        os << value();
        break;
    case ExprOp::State:
        os << 'x' << index() + 1;
        break;
    case ExprOp::Control:
        os << 'u' << index() + 1;
        break;
    case ExprOp::Time:
        os << 't';
        break;
    case ExprOp::Neg:
        os << "(-" << arg(0).to_string() << ')';
        break;
    case ExprOp::Add:
        os << '(' << arg(0).to_string() << " + " << arg(1).to_string() << ')';
        break;
    case ExprOp::Sub:
        os << '(' << arg(0).to_string() << " - " << arg(1).to_string() << ')';
        break;
    case ExprOp::Mul:
        os << '(' << arg(0).to_string() << " * " << arg(1).to_string() << ')';
        break;
    case ExprOp::Div:
        os << '(' << arg(0).to_string() << " / " << arg(1).to_string() << ')';
        break;
    case ExprOp::Pow:
        os << '(' << arg(0).to_string() << '^' << index() << ')';
        break;
    case ExprOp::Sin:
        os << "sin(" << arg(0).to_string() << ')';
        break;
    case ExprOp::Cos:
        os << "cos(" << arg(0).to_string() << ')';
        break;
    case ExprOp::Exp:
        os << "exp(" << arg(0).to_string() << ')';
        break;
    case ExprOp::Log:
        os << "ln(" << arg(0).to_string() << ')';
        break;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

class Parser {
public:
    Parser(std::string_view text, int n_x, int n_u) : text_(text), n_x_(n_x), n_u_(n_u) {}

    Expr parse() {
        Expr e = parse_sum();
        skip_space();
        if (pos_ != text_.size()) {
            throw ParseError(std::string("unexpected character '") + text_[pos_] + "'", pos_);
        }
        return e;
    }

private:
    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
    }

    Expr parse_sum() {
        Expr lhs = parse_product();
        for (;;) {
            if (accept('+')) {
                lhs = lhs + parse_product();
            } else if (accept('-')) {
                lhs = lhs - parse_product();
            } else {
                return lhs;
            }
        }
    }

    Expr parse_product() {
        Expr lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = lhs * parse_unary();
            } else if (accept('/')) {
                lhs = lhs / parse_unary();
            } else {
                return lhs;
            }
        }
    }

    Expr parse_unary() {
        if (accept('-')) {
            return -parse_unary();
        }
        if (accept('+')) {
            return parse_unary();
        }
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        skip_space();
        const std::size_t at = pos_;
        if (accept('^')) {
            // Right associative, binds tighter than unary minus on the left.
            Expr exponent = parse_unary();
            if (!exponent.is_constant()) {
                throw ParseError("exponent must be a constant", at);
            }
            const double v = exponent.value();
            if (v != std::floor(v) || std::abs(v) > 1024.0) {
                throw ParseError("exponent must be an integer", at);
            }
            return pow(base, static_cast<int>(v));
        }
        return base;
    }

    Expr parse_primary() {
        skip_space();
        if (pos_ >= text_.size()) {
            throw ParseError("unexpected end of input", pos_);
        }
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_sum();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return parse_number();
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            return parse_identifier();
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    Expr parse_number() {
        const std::size_t start = pos_;
        double value = 0.0;
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr == first) {
            throw ParseError("malformed number", start);
        }
        pos_ += static_cast<std::size_t>(ptr - first);
        return Expr(value);
    }

    Expr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = text_.substr(start, pos_ - start);

        if (name == "t") {
            return Expr::time();
        }
        if (name == "sin" || name == "cos" || name == "exp" || name == "ln") {
            expect('(');
            Expr arg = parse_sum();
            expect(')');
            if (name == "sin") return sin(arg);
            if (name == "cos") return cos(arg);
            if (name == "exp") return exp(arg);
            return log(arg);
        }
        if ((name[0] == 'x' || name[0] == 'u') && name.size() > 1) {
            int k = 0;
            auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
            if (ec == std::errc() && ptr == name.data() + name.size()) {
                const int limit = name[0] == 'x' ? n_x_ : n_u_;
                if (k < 1 || k > limit) {
                    throw ParseError("variable index out of range: " + std::string(name), start);
                }
                return name[0] == 'x' ? Expr::state(k - 1) : Expr::control(k - 1);
            }
        }
        throw ParseError("unknown identifier: " + std::string(name), start);
    }

    std::string_view text_;
    int n_x_;
    int n_u_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, int n_x, int n_u) { return Parser(text, n_x, n_u).parse(); }

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

namespace {

class Differentiator {
public:
    explicit Differentiator(VarId var) : var_(var) {}

    Expr run(const Expr& e) {
        if (auto it = memo_.find(e.id()); it != memo_.end()) {
            return it->second;
        }
        Expr d = derive(e);
        memo_.emplace(e.id(), d);
        return d;
    }

private:
    Expr derive(const Expr& e) {
        switch (e.op()) {
        case ExprOp::Constant:
            return Expr();
        case ExprOp::State:
            return Expr(var_.kind == VarId::Kind::State && var_.index == e.index() ? 1.0 : 0.0);
        case ExprOp::Control:
            return Expr(var_.kind == VarId::Kind::Control && var_.index == e.index() ? 1.0 : 0.0);
        case ExprOp::Time:
            return Expr(var_.kind == VarId::Kind::Time ? 1.0 : 0.0);
        case ExprOp::Neg:
            return -run(e.arg(0));
        case ExprOp::Add:
            return run(e.arg(0)) + run(e.arg(1));
        case ExprOp::Sub:
            return run(e.arg(0)) - run(e.arg(1));
        case ExprOp::Mul: {
            const Expr a = e.arg(0);
            const Expr b = e.arg(1);
            return run(a) * b + a * run(b);
        }
        case ExprOp::Div: {
            const Expr a = e.arg(0);
            const Expr b = e.arg(1);
            const Expr da = run(a);
            const Expr db = run(b);
            if (db.is_constant(0.0)) {
                return da / b;
            }
            return (da * b - a * db) / pow(b, 2);
        }
        case ExprOp::Pow: {
            const Expr a = e.arg(0);
            const int n = e.exponent();
            return Expr(static_cast<double>(n)) * pow(a, n - 1) * run(a);
        }
        case ExprOp::Sin:
            return cos(e.arg(0)) * run(e.arg(0));
        case ExprOp::Cos:
            return -(sin(e.arg(0)) * run(e.arg(0)));
        case ExprOp::Exp:
            return e * run(e.arg(0));
        case ExprOp::Log:
            return run(e.arg(0)) / e.arg(0);
        }
        throw std::logic_error("diff: unknown op");
    }

    VarId var_;
    std::unordered_map<const void*, Expr> memo_;
};

template <typename Visit>
void walk(const Expr& e, std::unordered_map<const void*, bool>& seen, Visit&& visit) {
    if (!seen.emplace(e.id(), true).second) {
        return;
    }
    visit(e);
    for (std::size_t i = 0; i < e.arity(); ++i) {
        walk(e.arg(i), seen, visit);
    }
}

}  // namespace

Expr diff(const Expr& e, VarId var) { return Differentiator(var).run(e); }

Expr lie_derivative(const Expr& h, std::span<const Expr> f, int order) {
    if (order < 0) {
        throw std::invalid_argument("lie_derivative: order must be non-negative");
    }
    Expr g = h;
    for (int i = 0; i < order; ++i) {
        Expr next = diff(g, VarId::time());
        for (std::size_t k = 0; k < f.size(); ++k) {
            next = next + diff(g, VarId::state(static_cast<int>(k))) * f[k];
        }
        g = next;
    }
    return g;
}

int max_state_index(const Expr& e) {
    int best = -1;
    std::unordered_map<const void*, bool> seen;
    walk(e, seen, [&](const Expr& n) {
        if (n.op() == ExprOp::State) best = std::max(best, n.index());
    });
    return best;
}

int max_control_index(const Expr& e) {
    int best = -1;
    std::unordered_map<const void*, bool> seen;
    walk(e, seen, [&](const Expr& n) {
        if (n.op() == ExprOp::Control) best = std::max(best, n.index());
    });
    return best;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

template <typename T, typename Leaf, typename Unary, typename Binary>
class MemoEval {
public:
    MemoEval(Leaf leaf, Unary unary, Binary binary)
        : leaf_(std::move(leaf)), unary_(std::move(unary)), binary_(std::move(binary)) {}

    T run(const Expr& e) {
        if (auto it = memo_.find(e.id()); it != memo_.end()) {
            return it->second;
        }
        T v;
        switch (e.arity()) {
        case 0:
            v = leaf_(e);
            break;
        case 1:
            v = unary_(e.op(), run(e.arg(0)), e.exponent());
            break;
        default:
            v = binary_(e.op(), run(e.arg(0)), run(e.arg(1)));
            break;
        }
        memo_.emplace(e.id(), v);
        return v;
    }

private:
    Leaf leaf_;
    Unary unary_;
    Binary binary_;
    std::unordered_map<const void*, T> memo_;
};

template <typename T, typename Leaf, typename Unary, typename Binary>
MemoEval<T, Leaf, Unary, Binary> make_eval(Leaf leaf, Unary unary, Binary binary) {
    return MemoEval<T, Leaf, Unary, Binary>(std::move(leaf), std::move(unary), std::move(binary));
}

}  // namespace

double eval(const Expr& e, const Bindings& b) {
    auto leaf = [&](const Expr& n) -> double {
        switch (n.op()) {
        case ExprOp::Constant:
            return n.value();
        case ExprOp::State:
            if (static_cast<std::size_t>(n.index()) >= b.x.size()) {
                throw std::out_of_range("eval: state binding missing");
            }
            return b.x[static_cast<std::size_t>(n.index())];
        case ExprOp::Control:
            if (static_cast<std::size_t>(n.index()) >= b.u.size()) {
                throw std::out_of_range("eval: control binding missing");
            }
            return b.u[static_cast<std::size_t>(n.index())];
        default:
            return b.t;
        }
    };
    auto ev = make_eval<double>(leaf, apply_unary, apply_binary);
    return ev.run(e);
}

Interval eval_interval(const Expr& e, const IntervalBindings& b) {
    auto leaf = [&](const Expr& n) -> Interval {
        switch (n.op()) {
        case ExprOp::Constant:
            return Interval(n.value());
        case ExprOp::State:
            return b.x.at(static_cast<std::size_t>(n.index()));
        case ExprOp::Control:
            return b.u.at(static_cast<std::size_t>(n.index()));
        default:
            return b.t;
        }
    };
    auto unary = [](ExprOp op, const Interval& a, int n) -> Interval {
        try {
            switch (op) {
            case ExprOp::Neg:
                return -a;
            case ExprOp::Pow:
                return pow_int(a, n);
            case ExprOp::Sin:
                return sin(a);
            case ExprOp::Cos:
                return cos(a);
            case ExprOp::Exp:
                return exp(a);
            default:
                return log(a);
            }
        } catch (const std::domain_error& err) {
            throw DomainError(err.what());
        }
    };
    auto binary = [](ExprOp op, const Interval& a, const Interval& c) -> Interval {
        switch (op) {
        case ExprOp::Add:
            return a + c;
        case ExprOp::Sub:
            return a - c;
        case ExprOp::Mul:
            return a * c;
        default:
            try {
                return a * reciprocal(c);
            } catch (const std::domain_error& err) {
                throw DomainError(err.what());
            }
        }
    };
    auto ev = make_eval<Interval>(leaf, unary, binary);
    return ev.run(e);
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

namespace {

using InstrKey = std::tuple<int, int, int, int, std::uint64_t>;

}  // namespace

Tape::Tape(std::span<const Expr> outputs) {
    std::map<InstrKey, int> interned;
    std::unordered_map<const void*, int> slot_of;

    auto emit = [&](auto&& self, const Expr& e) -> int {
        if (auto it = slot_of.find(e.id()); it != slot_of.end()) {
            return it->second;
        }
        Instr ins{e.op()};
        if (e.arity() >= 1) ins.a = self(self, e.arg(0));
        if (e.arity() == 2) ins.b = self(self, e.arg(1));
        if (e.op() == ExprOp::Constant) ins.value = e.value();
        if (e.op() == ExprOp::State || e.op() == ExprOp::Control || e.op() == ExprOp::Pow) {
            ins.index = e.index();
        }
        const InstrKey key{static_cast<int>(ins.op), ins.a, ins.b, ins.index,
                           std::bit_cast<std::uint64_t>(ins.value)};
        int slot = 0;
        if (auto it = interned.find(key); it != interned.end()) {
            slot = it->second;
        } else {
            slot = static_cast<int>(code_.size());
            code_.push_back(ins);
            interned.emplace(key, slot);
        }
        slot_of.emplace(e.id(), slot);
        return slot;
    };

    outputs_.reserve(outputs.size());
    for (const Expr& e : outputs) {
        outputs_.push_back(emit(emit, e));
    }
}

void Tape::eval(std::span<const double> x, std::span<const double> u, double t,
                std::span<double> out, std::vector<double>& work) const {
    work.resize(code_.size());
    double* w = work.data();
    for (std::size_t i = 0; i < code_.size(); ++i) {
        const Instr& ins = code_[i];
        switch (ins.op) {
        case ExprOp::Constant:
            w[i] = ins.value;
            break;
        case ExprOp::State:
            w[i] = x[static_cast<std::size_t>(ins.index)];
            break;
        case ExprOp::Control:
            w[i] = u[static_cast<std::size_t>(ins.index)];
            break;
        case ExprOp::Time:
            w[i] = t;
            break;
        case ExprOp::Neg:
            w[i] = -w[ins.a];
            break;
        case ExprOp::Add:
            w[i] = w[ins.a] + w[ins.b];
            break;
        case ExprOp::Sub:
            w[i] = w[ins.a] - w[ins.b];
            break;
        case ExprOp::Mul:
            w[i] = w[ins.a] * w[ins.b];
            break;
        case ExprOp::Div:
            if (w[ins.b] == 0.0) {
                throw DomainError("division by zero");
            }
            w[i] = w[ins.a] / w[ins.b];
            break;
        case ExprOp::Pow: {
            const double a = w[ins.a];
            switch (ins.index) {
            case 2:
                w[i] = a * a;
                break;
            case 3:
                w[i] = a * a * a;
                break;
            default:
                w[i] = std::pow(a, ins.index);
            }
            break;
        }
        case ExprOp::Sin:
            w[i] = std::sin(w[ins.a]);
            break;
        case ExprOp::Cos:
            w[i] = std::cos(w[ins.a]);
            break;
        case ExprOp::Exp:
            w[i] = std::exp(w[ins.a]);
            break;
        case ExprOp::Log:
            if (!(w[ins.a] > 0.0)) {
                throw DomainError("ln of non-positive argument");
            }
            w[i] = std::log(w[ins.a]);
            break;
        }
    }
    for (std::size_t k = 0; k < outputs_.size(); ++k) {
        out[k] = w[outputs_[k]];
    }
}

}  // namespace pathopt
