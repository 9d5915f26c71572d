#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "wicksde/errors.hpp"

namespace wicksde::expr {

// Raised on malformed input; position is the byte offset of the offending
// token, expected describes what would have been legal there.
struct ParseError : ConfigError {
    ParseError(const std::string& msg, size_t pos, const std::string& exp);
    size_t position;
    std::string expected;
};

// One-variable scalar expressions over the time variable `s`.
//
// Grammar (s is the only variable):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := atom ('^' exponent)?        -- binds tighter than '*' and unary '-'
//   exponent:= '-'? integer ('^' exponent)?  -- right-associative integer tower
//   atom    := number | 's' | '(' sum ')' | ('sin'|'cos'|'exp') '(' sum ')'
//
// '**' is not an operator; "s**2" is a syntax error at the second '*'.
class Expr {
  public:
    static Expr parse(std::string_view src);
    static Expr number(double v);
    static Expr var();

    // Evaluates at s; throws DomainError on division by zero or 0^-k.
    double operator()(double s) const;

    // Symbolic derivative d/ds, simplified by constant folding only.
    Expr derivative() const;

    // Canonical fully parenthesized rendering; parse(str()) round-trips.
    std::string str() const;

    bool is_constant() const;  // no occurrence of s

    struct Node;

  private:
    explicit Expr(std::shared_ptr<const Node> n) : root_(std::move(n)) {}
    std::shared_ptr<const Node> root_;
};

}  // namespace wicksde::expr
