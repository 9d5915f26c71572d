#include "wicksde/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>

namespace wicksde::expr {

ParseError::ParseError(const std::string& msg, size_t pos, const std::string& exp)
    : ConfigError(msg + " at offset " + std::to_string(pos) +
                  (exp.empty() ? "" : " (expected " + exp + ")")),
      position(pos),
      expected(exp) {}

enum class Kind { Number, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp };

struct Expr::Node {
    Kind kind;
    double value = 0.0;   // Number
    long exponent = 0;    // Pow
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr num(double v) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = Kind::Number;
    n->value = v;
    return n;
}

NodePtr pow_node(NodePtr base, long e) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = Kind::Pow;
    n->exponent = e;
    n->a = std::move(base);
    return n;
}

bool is_num(const NodePtr& n, double v) { return n->kind == Kind::Number && n->value == v; }

// ---- parsing ----------------------------------------------------------------

class Parser {
  public:
    explicit Parser(std::string_view s) : src_(s) {}

    NodePtr run() {
        NodePtr e = sum();
        skip_ws();
        if (pos_ != src_.size())
            throw ParseError("unexpected input", pos_, "operator or end of input");
        return e;
    }

  private:
    std::string_view src_;
    size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
    }
    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }
    bool eat(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr sum() {
        NodePtr e = product();
        while (true) {
            const char c = peek();
            if (c == '+' || c == '-') {
                ++pos_;
                e = make(c == '+' ? Kind::Add : Kind::Sub, e, product());
            } else {
                return e;
            }
        }
    }

    NodePtr product() {
        NodePtr e = unary();
        while (true) {
            const char c = peek();
            if (c == '*' || c == '/') {
                ++pos_;
                e = make(c == '*' ? Kind::Mul : Kind::Div, e, unary());
            } else {
                return e;
            }
        }
    }

    NodePtr unary() {
        if (eat('-')) return make(Kind::Neg, unary());
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        if (peek() == '^') {
            ++pos_;
            return pow_node(std::move(base), exponent());
        }
        return base;
    }

    // Right-associative integer tower: 2^3^2 reads as 2^(3^2).
    long exponent() {
        skip_ws();
        bool neg = eat('-');
        skip_ws();
        const size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
        if (pos_ == start) throw ParseError("malformed exponent", start, "integer");
        long v = 0;
        auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (res.ec != std::errc{})
            throw ParseError("exponent out of range", start, "small integer");
        if (peek() == '^') {
            ++pos_;
            const long inner = exponent();
            if (inner < 0) throw ParseError("negative inner exponent", pos_, "non-negative integer");
            long acc = 1;
            for (long i = 0; i < inner; ++i) {
                acc *= v;
                if (std::abs(acc) > (1L << 40))
                    throw ParseError("exponent tower overflow", pos_, "smaller exponent");
            }
            v = acc;
        }
        return neg ? -v : v;
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= src_.size())
            throw ParseError("unexpected end of input", pos_, "number, 's', '(', or function");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = sum();
            if (!eat(')')) throw ParseError("unbalanced parenthesis", pos_, "')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        throw ParseError("unexpected character", pos_, "number, 's', '(', or function");
    }

    NodePtr number() {
        const size_t start = pos_;
        double v = 0.0;
        auto res = std::from_chars(src_.data() + start, src_.data() + src_.size(), v);
        if (res.ec != std::errc{}) throw ParseError("malformed number", start, "numeric literal");
        pos_ = static_cast<size_t>(res.ptr - src_.data());
        return num(v);
    }

    NodePtr identifier() {
        const size_t start = pos_;
        while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);
        if (name == "s") return make(Kind::Var);
        Kind k;
        if (name == "sin")
            k = Kind::Sin;
        else if (name == "cos")
            k = Kind::Cos;
        else if (name == "exp")
            k = Kind::Exp;
        else
            throw ParseError("unknown identifier '" + std::string(name) + "'", start,
                             "'s', 'sin', 'cos', or 'exp'");
        if (!eat('(')) throw ParseError("function call needs parentheses", pos_, "'('");
        NodePtr arg = sum();
        if (!eat(')')) throw ParseError("unbalanced parenthesis", pos_, "')'");
        return make(k, std::move(arg));
    }
};

// ---- evaluation -------------------------------------------------------------

double eval_node(const Expr::Node& n, double s) {
    switch (n.kind) {
        case Kind::Number: return n.value;
        case Kind::Var: return s;
        case Kind::Add: return eval_node(*n.a, s) + eval_node(*n.b, s);
        case Kind::Sub: return eval_node(*n.a, s) - eval_node(*n.b, s);
        case Kind::Mul: return eval_node(*n.a, s) * eval_node(*n.b, s);
        case Kind::Div: {
            const double d = eval_node(*n.b, s);
            if (d == 0.0) throw DomainError("division by zero while evaluating expression");
            return eval_node(*n.a, s) / d;
        }
        case Kind::Pow: {
            const double base = eval_node(*n.a, s);
            if (base == 0.0 && n.exponent < 0)
                throw DomainError("zero raised to a negative power");
            if (n.exponent == 0) return 1.0;
            double acc = 1.0, b = base;
            long e = std::abs(n.exponent);
            while (e > 0) {
                if (e & 1) acc *= b;
                b *= b;
                e >>= 1;
            }
            return n.exponent > 0 ? acc : 1.0 / acc;
        }
        case Kind::Neg: return -eval_node(*n.a, s);
        case Kind::Sin: return std::sin(eval_node(*n.a, s));
        case Kind::Cos: return std::cos(eval_node(*n.a, s));
        case Kind::Exp: return std::exp(eval_node(*n.a, s));
    }
    throw Error("corrupt expression node");
}

// ---- derivative with constant folding ---------------------------------------

bool constant_node(const Expr::Node& n) {
    switch (n.kind) {
        case Kind::Number: return true;
        case Kind::Var: return false;
        case Kind::Neg:
        case Kind::Sin:
        case Kind::Cos:
        case Kind::Exp:
        case Kind::Pow: return constant_node(*n.a);
        default: return constant_node(*n.a) && constant_node(*n.b);
    }
}

NodePtr fold_add(NodePtr a, NodePtr b) {
    if (is_num(a, 0.0)) return b;
    if (is_num(b, 0.0)) return a;
    if (a->kind == Kind::Number && b->kind == Kind::Number) return num(a->value + b->value);
    return make(Kind::Add, std::move(a), std::move(b));
}

NodePtr fold_sub(NodePtr a, NodePtr b) {
    if (is_num(b, 0.0)) return a;
    if (a->kind == Kind::Number && b->kind == Kind::Number) return num(a->value - b->value);
    if (is_num(a, 0.0)) return make(Kind::Neg, std::move(b));
    return make(Kind::Sub, std::move(a), std::move(b));
}

NodePtr fold_mul(NodePtr a, NodePtr b) {
    if (is_num(a, 0.0) || is_num(b, 0.0)) return num(0.0);
    if (is_num(a, 1.0)) return b;
    if (is_num(b, 1.0)) return a;
    if (a->kind == Kind::Number && b->kind == Kind::Number) return num(a->value * b->value);
    return make(Kind::Mul, std::move(a), std::move(b));
}

NodePtr deriv_node(const NodePtr& n) {
    switch (n->kind) {
        case Kind::Number: return num(0.0);
        case Kind::Var: return num(1.0);
        case Kind::Add: return fold_add(deriv_node(n->a), deriv_node(n->b));
        case Kind::Sub: return fold_sub(deriv_node(n->a), deriv_node(n->b));
        case Kind::Mul:
            return fold_add(fold_mul(deriv_node(n->a), n->b), fold_mul(n->a, deriv_node(n->b)));
        case Kind::Div: {
            // (u/v)' = u'/v - u v'/v^2
            NodePtr u = n->a, v = n->b;
            NodePtr left = make(Kind::Div, deriv_node(u), v);
            NodePtr vp = deriv_node(v);
            if (is_num(vp, 0.0)) return left;
            NodePtr right = make(Kind::Div, fold_mul(u, vp), pow_node(v, 2));
            return fold_sub(std::move(left), std::move(right));
        }
        case Kind::Pow: {
            if (n->exponent == 0) return num(0.0);
            NodePtr inner = deriv_node(n->a);
            NodePtr coeff = num(static_cast<double>(n->exponent));
            NodePtr powered =
                n->exponent == 1 ? num(1.0) : pow_node(n->a, n->exponent - 1);
            return fold_mul(fold_mul(std::move(coeff), std::move(powered)), std::move(inner));
        }
        case Kind::Neg: {
            NodePtr d = deriv_node(n->a);
            if (is_num(d, 0.0)) return d;
            if (d->kind == Kind::Number) return num(-d->value);
            return make(Kind::Neg, std::move(d));
        }
        case Kind::Sin: return fold_mul(make(Kind::Cos, n->a), deriv_node(n->a));
        case Kind::Cos:
            return fold_mul(make(Kind::Neg, make(Kind::Sin, n->a)), deriv_node(n->a));
        case Kind::Exp: return fold_mul(make(Kind::Exp, n->a), deriv_node(n->a));
    }
    throw Error("corrupt expression node");
}

// ---- printing ---------------------------------------------------------------

std::string fmt_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // trim to the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[32];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        double back = 0.0;
        std::from_chars(shorter, shorter + std::char_traits<char>::length(shorter), back);
        if (back == v) return shorter;
    }
    return buf;
}

void print_node(const Expr::Node& n, std::string& out) {
    switch (n.kind) {
        case Kind::Number:
            if (n.value < 0.0 || std::signbit(n.value)) {
                out += "(-";
                out += fmt_number(-n.value);
                out += ')';
            } else {
                out += fmt_number(n.value);
            }
            return;
        case Kind::Var: out += 's'; return;
        case Kind::Add:
        case Kind::Sub:
        case Kind::Mul:
        case Kind::Div: {
            const char op = n.kind == Kind::Add   ? '+'
                            : n.kind == Kind::Sub ? '-'
                            : n.kind == Kind::Mul ? '*'
                                                  : '/';
            out += '(';
            print_node(*n.a, out);
            out += op;
            print_node(*n.b, out);
            out += ')';
            return;
        }
        case Kind::Pow:
            out += '(';
            print_node(*n.a, out);
            out += '^';
            if (n.exponent < 0) out += '-';
            out += std::to_string(std::abs(n.exponent));
            out += ')';
            return;
        case Kind::Neg:
            out += "(-";
            print_node(*n.a, out);
            out += ')';
            return;
        case Kind::Sin:
        case Kind::Cos:
        case Kind::Exp:
            out += n.kind == Kind::Sin ? "sin(" : n.kind == Kind::Cos ? "cos(" : "exp(";
            print_node(*n.a, out);
            out += ')';
            return;
    }
}

}  // namespace

Expr Expr::parse(std::string_view src) { return Expr(Parser(src).run()); }

Expr Expr::number(double v) { return Expr(num(v)); }

Expr Expr::var() { return Expr(make(Kind::Var)); }

double Expr::operator()(double s) const { return eval_node(*root_, s); }

Expr Expr::derivative() const { return Expr(deriv_node(root_)); }

std::string Expr::str() const {
    std::string out;
    print_node(*root_, out);
    return out;
}

bool Expr::is_constant() const { return constant_node(*root_); }

}  // namespace wicksde::expr
