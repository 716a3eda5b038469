#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "liouville/jet.hpp"

namespace liouville {

enum class NodeKind {
    constant,
    variable,
    negate,
    add,
    sub,
    mul,
    div,
    ipow,
    exp_fn,
    log_fn,
    sin_fn,
    cos_fn,
    sinh_fn,
    cosh_fn,
};

inline const char* node_kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::constant: return "constant";
        case NodeKind::variable: return "x";
        case NodeKind::negate: return "negate";
        case NodeKind::add: return "add";
        case NodeKind::sub: return "sub";
        case NodeKind::mul: return "mul";
        case NodeKind::div: return "div";
        case NodeKind::ipow: return "pow";
        case NodeKind::exp_fn: return "exp";
        case NodeKind::log_fn: return "log";
        case NodeKind::sin_fn: return "sin";
        case NodeKind::cos_fn: return "cos";
        case NodeKind::sinh_fn: return "sinh";
        case NodeKind::cosh_fn: return "cosh";
    }
    return "?";
}

/// Syntax error with the byte offset of the failure and the tokens that
/// would have been accepted there.
class parse_error : public std::runtime_error {
public:
    parse_error(std::string msg, std::size_t offset, std::vector<std::string> expected)
        : std::runtime_error(std::move(msg)), offset_(offset), expected_(std::move(expected)) {}

    std::size_t offset() const { return offset_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

/// Evaluation failed at a specific node (log of a nonpositive value,
/// division by zero, ...).
class eval_error : public std::domain_error {
public:
    eval_error(const std::string& msg, NodeKind kind, std::string node_text)
        : std::domain_error(msg + " in node `" + node_text + "`"),
          kind_(kind),
          node_text_(std::move(node_text)) {}

    NodeKind node() const { return kind_; }
    const std::string& node_text() const { return node_text_; }

private:
    NodeKind kind_;
    std::string node_text_;
};

class order_cap_error : public std::runtime_error {
public:
    explicit order_cap_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Maximum supported symbolic derivative / jet order.
inline constexpr int kMaxDerivativeOrder = 16;

/// Scalar operations for evaluation over double.
struct DoubleOps {
    static double from_double(double v) { return v; }
    static bool is_zero(double v) { return v == 0.0; }
    static bool is_positive(double v) { return v > 0.0; }
    static double exp(double v) { return std::exp(v); }
    static double log(double v) { return std::log(v); }
    static double sin(double v) { return std::sin(v); }
    static double cos(double v) { return std::cos(v); }
    static double sinh(double v) { return std::sinh(v); }
    static double cosh(double v) { return std::cosh(v); }
};

/// Immutable expression tree over one real variable, closed under exact
/// differentiation.  Copies are cheap (shared structure).
class SmoothExpr {
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct Node {
        NodeKind kind;
        double value = 0.0;  // constant
        int power = 0;       // ipow
        NodePtr a, b;
    };

public:
    SmoothExpr() : root_(make_const_node(0.0)) {}

    // ---- construction ----

    static SmoothExpr constant(double v) { return SmoothExpr(make_const_node(v)); }
    static SmoothExpr variable() {
        Node n{NodeKind::variable, 0.0, 0, nullptr, nullptr};
        return SmoothExpr(std::make_shared<const Node>(n));
    }

    friend SmoothExpr operator+(const SmoothExpr& l, const SmoothExpr& r) {
        if (is_const(l.root_) && is_const(r.root_)) return constant(l.root_->value + r.root_->value);
        if (is_const_value(l.root_, 0.0)) return r;
        if (is_const_value(r.root_, 0.0)) return l;
        return binary(NodeKind::add, l, r);
    }
    friend SmoothExpr operator-(const SmoothExpr& l, const SmoothExpr& r) {
        if (is_const(l.root_) && is_const(r.root_)) return constant(l.root_->value - r.root_->value);
        if (is_const_value(r.root_, 0.0)) return l;
        return binary(NodeKind::sub, l, r);
    }
    friend SmoothExpr operator*(const SmoothExpr& l, const SmoothExpr& r) {
        if (is_const(l.root_) && is_const(r.root_)) return constant(l.root_->value * r.root_->value);
        if (is_const_value(l.root_, 1.0)) return r;
        if (is_const_value(r.root_, 1.0)) return l;
        return binary(NodeKind::mul, l, r);
    }
    friend SmoothExpr operator/(const SmoothExpr& l, const SmoothExpr& r) {
        if (is_const(l.root_) && is_const(r.root_) && r.root_->value != 0.0)
            return constant(l.root_->value / r.root_->value);
        return binary(NodeKind::div, l, r);
    }
    SmoothExpr operator-() const {
        if (is_const(root_)) return constant(-root_->value);
        Node n{NodeKind::negate, 0.0, 0, root_, nullptr};
        return SmoothExpr(std::make_shared<const Node>(n));
    }

    static SmoothExpr pow(const SmoothExpr& base, int k) {
        if (k == 1) return base;
        if (is_const(base.root_)) {
            const double f = std::pow(base.root_->value, k);
            if (std::isfinite(f)) return constant(f);
        }
        Node n{NodeKind::ipow, 0.0, k, base.root_, nullptr};
        return SmoothExpr(std::make_shared<const Node>(n));
    }

    static SmoothExpr exp(const SmoothExpr& e) { return unary_fold(NodeKind::exp_fn, e); }
    static SmoothExpr log(const SmoothExpr& e) { return unary(NodeKind::log_fn, e); }
    static SmoothExpr sin(const SmoothExpr& e) { return unary_fold(NodeKind::sin_fn, e); }
    static SmoothExpr cos(const SmoothExpr& e) { return unary_fold(NodeKind::cos_fn, e); }
    static SmoothExpr sinh(const SmoothExpr& e) { return unary_fold(NodeKind::sinh_fn, e); }
    static SmoothExpr cosh(const SmoothExpr& e) { return unary_fold(NodeKind::cosh_fn, e); }

    NodeKind kind() const { return root_->kind; }

    // ---- differentiation ----

    /// Exact first derivative as a new expression.
    SmoothExpr derivative() const { return SmoothExpr(diff(root_)); }

    /// Exact n-th derivative; n = 0 returns the expression itself.
    SmoothExpr derivative(int n) const {
        if (n < 0) throw std::invalid_argument("derivative order must be nonnegative");
        if (n > kMaxDerivativeOrder)
            throw order_cap_error("derivative order " + std::to_string(n) + " exceeds cap " +
                                  std::to_string(kMaxDerivativeOrder));
        SmoothExpr e = *this;
        for (int i = 0; i < n; ++i) e = e.derivative();
        return e;
    }

    // ---- evaluation ----

    template <class T, class Ops>
    T eval_with(const T& x, const Ops& ops) const {
        return eval_node<T>(root_, x, ops);
    }

    double operator()(double x) const { return eval_with<double>(x, DoubleOps{}); }

    /// Truncated Taylor coefficients c_k = f^(k)(x0)/k!, k = 0..n, computed by
    /// series arithmetic over the tree (no symbolic expansion).
    template <class T, class Ops>
    std::vector<T> taylor_with(const T& x0, int n, const Ops& ops) const {
        if (n < 0) throw std::invalid_argument("jet order must be nonnegative");
        if (n > kMaxDerivativeOrder)
            throw order_cap_error("jet order " + std::to_string(n) + " exceeds cap " +
                                  std::to_string(kMaxDerivativeOrder));
        return taylor_node<T>(root_, x0, n, ops);
    }

    /// Derivative values f^(k)(x), k = 0..n.
    Jet jet(double x, int n) const {
        std::vector<double> c = taylor_with<double>(x, n, DoubleOps{});
        double fact = 1.0;
        for (int k = 0; k <= n; ++k) {
            if (k > 1) fact *= k;
            c[static_cast<std::size_t>(k)] *= fact;
        }
        return Jet{x, std::move(c)};
    }

    /// k-th derivative value at x (used by the seminorm machinery).
    double derivative_value(double x, int k) const { return jet(x, k).values[static_cast<std::size_t>(k)]; }

    // ---- printing ----

    /// Canonical form accepted by parse_expression.
    std::string str() const {
        std::string out;
        print(root_, out, 0);
        return out;
    }

private:
    explicit SmoothExpr(NodePtr n) : root_(std::move(n)) {}

    static NodePtr make_const_node(double v) {
        Node n{NodeKind::constant, v, 0, nullptr, nullptr};
        return std::make_shared<const Node>(n);
    }
    static bool is_const(const NodePtr& n) { return n->kind == NodeKind::constant; }
    static bool is_const_value(const NodePtr& n, double v) {
        return n->kind == NodeKind::constant && n->value == v;
    }

    static SmoothExpr binary(NodeKind k, const SmoothExpr& l, const SmoothExpr& r) {
        Node n{k, 0.0, 0, l.root_, r.root_};
        return SmoothExpr(std::make_shared<const Node>(n));
    }
    static SmoothExpr unary(NodeKind k, const SmoothExpr& e) {
        Node n{k, 0.0, 0, e.root_, nullptr};
        return SmoothExpr(std::make_shared<const Node>(n));
    }
    static SmoothExpr unary_fold(NodeKind k, const SmoothExpr& e) {
        if (is_const(e.root_)) {
            const double v = e.root_->value;
            switch (k) {
                case NodeKind::exp_fn: return constant(std::exp(v));
                case NodeKind::sin_fn: return constant(std::sin(v));
                case NodeKind::cos_fn: return constant(std::cos(v));
                case NodeKind::sinh_fn: return constant(std::sinh(v));
                case NodeKind::cosh_fn: return constant(std::cosh(v));
                default: break;
            }
        }
        return unary(k, e);
    }

    static SmoothExpr wrap(const NodePtr& n) { return SmoothExpr(n); }

    // derivative of a node
    static NodePtr diff(const NodePtr& n) {
        const SmoothExpr a = n->a ? wrap(n->a) : SmoothExpr();
        const SmoothExpr da = n->a ? wrap(diff(n->a)) : SmoothExpr();
        switch (n->kind) {
            case NodeKind::constant: return make_const_node(0.0);
            case NodeKind::variable: return make_const_node(1.0);
            case NodeKind::negate: return (-da).root_;
            case NodeKind::add: return (da + wrap(diff(n->b))).root_;
            case NodeKind::sub: return (da - wrap(diff(n->b))).root_;
            case NodeKind::mul: {
                const SmoothExpr b = wrap(n->b), db = wrap(diff(n->b));
                return (da * b + a * db).root_;
            }
            case NodeKind::div: {
                const SmoothExpr b = wrap(n->b), db = wrap(diff(n->b));
                return ((da * b - a * db) / pow(b, 2)).root_;
            }
            case NodeKind::ipow: {
                if (n->power == 0) return (constant(0.0) * da).root_;
                return (constant(n->power) * pow(a, n->power - 1) * da).root_;
            }
            case NodeKind::exp_fn: return (exp(a) * da).root_;
            case NodeKind::log_fn: return (da / a).root_;
            case NodeKind::sin_fn: return (cos(a) * da).root_;
            case NodeKind::cos_fn: return (-(sin(a) * da)).root_;
            case NodeKind::sinh_fn: return (cosh(a) * da).root_;
            case NodeKind::cosh_fn: return (sinh(a) * da).root_;
        }
        return make_const_node(0.0);
    }

    static std::string short_text(const NodePtr& n) {
        std::string s;
        print(n, s, 0);
        if (s.size() > 64) s = s.substr(0, 61) + "...";
        return s;
    }

    template <class T, class Ops>
    static T eval_node(const NodePtr& n, const T& x, const Ops& ops) {
        switch (n->kind) {
            case NodeKind::constant: return ops.from_double(n->value);
            case NodeKind::variable: return x;
            case NodeKind::negate: return -eval_node<T>(n->a, x, ops);
            case NodeKind::add: return eval_node<T>(n->a, x, ops) + eval_node<T>(n->b, x, ops);
            case NodeKind::sub: return eval_node<T>(n->a, x, ops) - eval_node<T>(n->b, x, ops);
            case NodeKind::mul: return eval_node<T>(n->a, x, ops) * eval_node<T>(n->b, x, ops);
            case NodeKind::div: {
                T num = eval_node<T>(n->a, x, ops);
                T den = eval_node<T>(n->b, x, ops);
                if (ops.is_zero(den)) throw eval_error("division by zero", n->kind, short_text(n));
                return num / den;
            }
            case NodeKind::ipow: {
                T base = eval_node<T>(n->a, x, ops);
                int k = n->power;
                if (k < 0 && ops.is_zero(base))
                    throw eval_error("zero raised to a negative power", n->kind, short_text(n));
                T r = ops.from_double(1.0);
                T b = base;
                int e = k < 0 ? -k : k;
                while (e > 0) {
                    if (e & 1) r = r * b;
                    b = b * b;
                    e >>= 1;
                }
                if (k < 0) r = ops.from_double(1.0) / r;
                return r;
            }
            case NodeKind::exp_fn: return ops.exp(eval_node<T>(n->a, x, ops));
            case NodeKind::log_fn: {
                T v = eval_node<T>(n->a, x, ops);
                if (!ops.is_positive(v))
                    throw eval_error("log of nonpositive argument", n->kind, short_text(n));
                return ops.log(v);
            }
            case NodeKind::sin_fn: return ops.sin(eval_node<T>(n->a, x, ops));
            case NodeKind::cos_fn: return ops.cos(eval_node<T>(n->a, x, ops));
            case NodeKind::sinh_fn: return ops.sinh(eval_node<T>(n->a, x, ops));
            case NodeKind::cosh_fn: return ops.cosh(eval_node<T>(n->a, x, ops));
        }
        return ops.from_double(0.0);
    }

    // ---- Taylor series kernels (normalized coefficients) ----

    template <class T>
    static std::vector<T> series_mul(const std::vector<T>& a, const std::vector<T>& b) {
        const std::size_t n = a.size();
        std::vector<T> r(n, a[0] - a[0]);  // T zero
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j <= k; ++j) r[k] = r[k] + a[j] * b[k - j];
        return r;
    }

    template <class T, class Ops>
    static std::vector<T> series_div(const std::vector<T>& a, const std::vector<T>& b, const Ops& ops,
                                     const NodePtr& n) {
        if (ops.is_zero(b[0])) throw eval_error("division by zero", n->kind, short_text(n));
        const std::size_t sz = a.size();
        std::vector<T> r(sz, a[0] - a[0]);
        for (std::size_t k = 0; k < sz; ++k) {
            T acc = a[k];
            for (std::size_t j = 0; j < k; ++j) acc = acc - r[j] * b[k - j];
            r[k] = acc / b[0];
        }
        return r;
    }

    template <class T, class Ops>
    static std::vector<T> taylor_node(const NodePtr& n, const T& x0, int order, const Ops& ops) {
        const std::size_t sz = static_cast<std::size_t>(order) + 1;
        const T zero = ops.from_double(0.0);
        switch (n->kind) {
            case NodeKind::constant: {
                std::vector<T> r(sz, zero);
                r[0] = ops.from_double(n->value);
                return r;
            }
            case NodeKind::variable: {
                std::vector<T> r(sz, zero);
                r[0] = x0;
                if (order >= 1) r[1] = ops.from_double(1.0);
                return r;
            }
            case NodeKind::negate: {
                std::vector<T> r = taylor_node<T>(n->a, x0, order, ops);
                for (T& v : r) v = -v;
                return r;
            }
            case NodeKind::add: {
                std::vector<T> r = taylor_node<T>(n->a, x0, order, ops);
                std::vector<T> s = taylor_node<T>(n->b, x0, order, ops);
                for (std::size_t k = 0; k < sz; ++k) r[k] = r[k] + s[k];
                return r;
            }
            case NodeKind::sub: {
                std::vector<T> r = taylor_node<T>(n->a, x0, order, ops);
                std::vector<T> s = taylor_node<T>(n->b, x0, order, ops);
                for (std::size_t k = 0; k < sz; ++k) r[k] = r[k] - s[k];
                return r;
            }
            case NodeKind::mul:
                return series_mul(taylor_node<T>(n->a, x0, order, ops),
                                  taylor_node<T>(n->b, x0, order, ops));
            case NodeKind::div:
                return series_div(taylor_node<T>(n->a, x0, order, ops),
                                  taylor_node<T>(n->b, x0, order, ops), ops, n);
            case NodeKind::ipow: {
                std::vector<T> base = taylor_node<T>(n->a, x0, order, ops);
                int k = n->power;
                std::vector<T> r(sz, zero);
                r[0] = ops.from_double(1.0);
                if (k == 0) return r;
                std::vector<T> b = base;
                int e = k < 0 ? -k : k;
                while (e > 0) {
                    if (e & 1) r = series_mul(r, b);
                    b = series_mul(b, b);
                    e >>= 1;
                }
                if (k < 0) {
                    if (ops.is_zero(r[0]))
                        throw eval_error("zero raised to a negative power", n->kind, short_text(n));
                    std::vector<T> one(sz, zero);
                    one[0] = ops.from_double(1.0);
                    r = series_div(one, r, ops, n);
                }
                return r;
            }
            case NodeKind::exp_fn: {
                std::vector<T> a = taylor_node<T>(n->a, x0, order, ops);
                std::vector<T> r(sz, zero);
                r[0] = ops.exp(a[0]);
                for (std::size_t k = 1; k < sz; ++k) {
                    T acc = zero;
                    for (std::size_t j = 1; j <= k; ++j)
                        acc = acc + ops.from_double(static_cast<double>(j)) * a[j] * r[k - j];
                    r[k] = acc / ops.from_double(static_cast<double>(k));
                }
                return r;
            }
            case NodeKind::log_fn: {
                std::vector<T> a = taylor_node<T>(n->a, x0, order, ops);
                if (!ops.is_positive(a[0]))
                    throw eval_error("log of nonpositive argument", n->kind, short_text(n));
                std::vector<T> r(sz, zero);
                r[0] = ops.log(a[0]);
                for (std::size_t k = 1; k < sz; ++k) {
                    T acc = ops.from_double(static_cast<double>(k)) * a[k];
                    for (std::size_t j = 1; j < k; ++j)
                        acc = acc - ops.from_double(static_cast<double>(k - j)) * a[j] * r[k - j];
                    r[k] = acc / (ops.from_double(static_cast<double>(k)) * a[0]);
                }
                return r;
            }
            case NodeKind::sin_fn:
            case NodeKind::cos_fn: {
                std::vector<T> a = taylor_node<T>(n->a, x0, order, ops);
                std::vector<T> s(sz, zero), c(sz, zero);
                s[0] = ops.sin(a[0]);
                c[0] = ops.cos(a[0]);
                for (std::size_t k = 1; k < sz; ++k) {
                    T accs = zero;
                    T accc = zero;
                    for (std::size_t j = 1; j <= k; ++j) {
                        const T ja = ops.from_double(static_cast<double>(j)) * a[j];
                        accs = accs + ja * c[k - j];
                        accc = accc - ja * s[k - j];
                    }
                    s[k] = accs / ops.from_double(static_cast<double>(k));
                    c[k] = accc / ops.from_double(static_cast<double>(k));
                }
                return n->kind == NodeKind::sin_fn ? s : c;
            }
            case NodeKind::sinh_fn:
            case NodeKind::cosh_fn: {
                std::vector<T> a = taylor_node<T>(n->a, x0, order, ops);
                std::vector<T> s(sz, zero), c(sz, zero);
                s[0] = ops.sinh(a[0]);
                c[0] = ops.cosh(a[0]);
                for (std::size_t k = 1; k < sz; ++k) {
                    T accs = zero;
                    T accc = zero;
                    for (std::size_t j = 1; j <= k; ++j) {
                        const T ja = ops.from_double(static_cast<double>(j)) * a[j];
                        accs = accs + ja * c[k - j];
                        accc = accc + ja * s[k - j];
                    }
                    s[k] = accs / ops.from_double(static_cast<double>(k));
                    c[k] = accc / ops.from_double(static_cast<double>(k));
                }
                return n->kind == NodeKind::sinh_fn ? s : c;
            }
        }
        return std::vector<T>(sz, zero);
    }

    // ---- printing ----

    // precedence: add/sub 1, mul/div 2, negate 3, pow 4, atoms 5
    static int precedence(const NodePtr& n) {
        switch (n->kind) {
            case NodeKind::add:
            case NodeKind::sub: return 1;
            case NodeKind::mul:
            case NodeKind::div: return 2;
            case NodeKind::negate: return 3;
            case NodeKind::ipow: return 4;
            case NodeKind::constant: return n->value < 0 ? 3 : 5;
            default: return 5;
        }
    }

    static void print_const(double v, std::string& out) {
        char buf[40];
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
        (void)ec;
        out.append(buf, p);
    }

    static void print(const NodePtr& n, std::string& out, int parent_prec) {
        const int prec = precedence(n);
        const bool need_parens = prec < parent_prec;
        if (need_parens) out += '(';
        switch (n->kind) {
            case NodeKind::constant: print_const(n->value, out); break;
            case NodeKind::variable: out += 'x'; break;
            case NodeKind::negate:
                out += '-';
                print(n->a, out, 3);
                break;
            case NodeKind::add:
            case NodeKind::sub:
                print(n->a, out, 1);
                out += (n->kind == NodeKind::add ? '+' : '-');
                print(n->b, out, 2);  // parenthesize equal-precedence right operands
                break;
            case NodeKind::mul:
            case NodeKind::div:
                print(n->a, out, 2);
                out += (n->kind == NodeKind::mul ? '*' : '/');
                print(n->b, out, 3);
                break;
            case NodeKind::ipow:
                print(n->a, out, 5);
                out += '^';
                out += std::to_string(n->power);
                break;
            case NodeKind::exp_fn:
            case NodeKind::log_fn:
            case NodeKind::sin_fn:
            case NodeKind::cos_fn:
            case NodeKind::sinh_fn:
            case NodeKind::cosh_fn:
                out += node_kind_name(n->kind);
                out += '(';
                print(n->a, out, 0);
                out += ')';
                break;
        }
        if (need_parens) out += ')';
    }

    NodePtr root_;

    friend SmoothExpr parse_expression(std::string_view);
};

// ------------------------------------------------------------------
// Recursive-descent parser for:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ('^' integer)? | '-' factor
//   atom   := number | 'x' | func '(' expr ')' | '(' expr ')'
//   func   := exp|log|sin|cos|sinh|cosh
// ------------------------------------------------------------------

namespace detail {

struct ExprParser {
    std::string_view text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n' ||
                                     text[pos] == '\r'))
            ++pos;
    }

    bool at_end() {
        skip_ws();
        return pos >= text.size();
    }

    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    [[noreturn]] void fail(std::vector<std::string> expected) {
        skip_ws();
        std::string msg = "syntax error at offset " + std::to_string(pos);
        if (pos < text.size())
            msg += " near '" + std::string(1, text[pos]) + "'";
        else
            msg += " (unexpected end of input)";
        if (!expected.empty()) {
            msg += "; expected ";
            for (std::size_t i = 0; i < expected.size(); ++i) {
                if (i) msg += i + 1 == expected.size() ? " or " : ", ";
                msg += expected[i];
            }
        }
        throw parse_error(msg, pos, std::move(expected));
    }

    SmoothExpr parse() {
        SmoothExpr e = parse_expr();
        if (!at_end()) fail({"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"});
        return e;
    }

    SmoothExpr parse_expr() {
        SmoothExpr e = parse_term();
        while (true) {
            const char c = peek();
            if (c == '+' || c == '-') {
                ++pos;
                SmoothExpr t = parse_term();
                e = (c == '+') ? e + t : e - t;
            } else {
                return e;
            }
        }
    }

    SmoothExpr parse_term() {
        SmoothExpr e = parse_factor();
        while (true) {
            const char c = peek();
            if (c == '*' || c == '/') {
                ++pos;
                SmoothExpr f = parse_factor();
                e = (c == '*') ? e * f : e / f;
            } else {
                return e;
            }
        }
    }

    SmoothExpr parse_factor() {
        if (peek() == '-') {
            ++pos;
            return -parse_factor();
        }
        SmoothExpr a = parse_atom();
        if (peek() == '^') {
            ++pos;
            return SmoothExpr::pow(a, parse_int());
        }
        return a;
    }

    int parse_int() {
        skip_ws();
        int sign = 1;
        if (pos < text.size() && text[pos] == '-') {
            sign = -1;
            ++pos;
        }
        if (pos >= text.size() || !is_digit(text[pos])) fail({"integer exponent"});
        long v = 0;
        while (pos < text.size() && is_digit(text[pos])) {
            v = v * 10 + (text[pos] - '0');
            if (v > 64) fail({"integer exponent in [-64, 64]"});
            ++pos;
        }
        return static_cast<int>(sign * v);
    }

    SmoothExpr parse_atom() {
        skip_ws();
        if (pos >= text.size()) fail(atom_expectation());
        const char c = text[pos];
        if (is_digit(c)) return parse_number();
        if (c == '(') {
            ++pos;
            SmoothExpr e = parse_expr();
            if (peek() != ')') fail({"')'"});
            ++pos;
            return e;
        }
        if (is_alpha(c)) return parse_ident();
        fail(atom_expectation());
    }

    static std::vector<std::string> atom_expectation() {
        return {"number", "'x'", "function name", "'('"};
    }

    static bool is_digit(char c) { return c >= '0' && c <= '9'; }
    static bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

    SmoothExpr parse_number() {
        const std::size_t start = pos;
        while (pos < text.size() && is_digit(text[pos])) ++pos;
        if (pos < text.size() && text[pos] == '.') {
            ++pos;
            while (pos < text.size() && is_digit(text[pos])) ++pos;
        }
        if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
            std::size_t mark = pos;
            ++pos;
            if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
            if (pos < text.size() && is_digit(text[pos])) {
                while (pos < text.size() && is_digit(text[pos])) ++pos;
            } else {
                pos = mark;  // 'e' belonged to something else; not a valid exponent
            }
        }
        double v = 0.0;
        auto [p, ec] = std::from_chars(text.data() + start, text.data() + pos, v);
        if (ec != std::errc() || p != text.data() + pos) {
            pos = start;
            fail({"number"});
        }
        return SmoothExpr::constant(v);
    }

    SmoothExpr parse_ident() {
        const std::size_t start = pos;
        while (pos < text.size() && is_alpha(text[pos])) ++pos;
        const std::string_view name = text.substr(start, pos - start);
        if (name == "x") return SmoothExpr::variable();
        const bool is_func = name == "exp" || name == "log" || name == "sin" || name == "cos" ||
                             name == "sinh" || name == "cosh";
        if (!is_func) {
            pos = start;
            throw parse_error("unknown identifier '" + std::string(name) + "' at offset " +
                                  std::to_string(start),
                              start, {"'x'", "exp", "log", "sin", "cos", "sinh", "cosh"});
        }
        if (peek() != '(') fail({"'('"});
        ++pos;
        SmoothExpr arg = parse_expr();
        if (peek() != ')') fail({"')'"});
        ++pos;
        if (name == "exp") return SmoothExpr::exp(arg);
        if (name == "log") return SmoothExpr::log(arg);
        if (name == "sin") return SmoothExpr::sin(arg);
        if (name == "cos") return SmoothExpr::cos(arg);
        if (name == "sinh") return SmoothExpr::sinh(arg);
        return SmoothExpr::cosh(arg);
    }
};

}  // namespace detail

inline SmoothExpr parse_expression(std::string_view text) {
    if (text.empty()) throw parse_error("empty expression", 0, {"expression"});
    detail::ExprParser p{text};
    return p.parse();
}

}  // namespace liouville
