#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace oogrisk::expr {

// expr   := term (('+'|'-') term)*
// term   := factor (('*'|'/') factor)*
// factor := NUMBER | IDENT | '-' factor | '(' expr ')'

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  enum class Kind { Number, Ident, Neg, Add, Sub, Mul, Div };
  Kind kind;
  double value = 0.0;  // Number
  std::string name;    // Ident
  NodePtr lhs, rhs;    // Neg uses lhs only
};

using Bindings = std::map<std::string, double, std::less<>>;

struct Interval {
  double lo, hi;
};
using IntervalBindings = std::map<std::string, Interval, std::less<>>;

/// Throws Error(SyntaxError) with the 1-based column of the offending token.
/// `where` prefixes error paths (e.g. "plant.A[1][2]").
NodePtr parse(std::string_view text, const std::string& where = {});

/// Throws UnboundIdentifier, DivisionByZero.
double eval(const Node& n, const Bindings& b, const std::string& where = {});

/// Conservative range of the expression over a box. Throws DivisionByZero when
/// a divisor's range contains zero and UnknownParameter for undeclared names.
Interval eval_interval(const Node& n, const IntervalBindings& b, const std::string& where = {});

/// Identifiers referenced, sorted and unique.
std::vector<std::string> identifiers(const Node& n);

/// Canonical text; parse(to_string(n)) is structurally equal to n.
std::string to_string(const Node& n);

bool equal(const Node& a, const Node& b);

}  // namespace oogrisk::expr
