#include "oogrisk/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "oogrisk/error.hpp"

namespace oogrisk::expr {

namespace {

NodePtr make(Node::Kind k, NodePtr l = {}, NodePtr r = {}) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->lhs = std::move(l);
  n->rhs = std::move(r);
  return n;
}

class Parser {
 public:
  Parser(std::string_view s, const std::string& where) : s_(s), where_(where) {}

  NodePtr run() {
    skip();
    if (pos_ >= s_.size()) fail("empty expression");
    NodePtr e = expr();
    skip();
    if (pos_ < s_.size()) fail(std::string("unexpected '") + s_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::SyntaxError,
                msg + " at line 1, column " + std::to_string(pos_ + 1) + " in \"" +
                    std::string(s_) + "\"",
                where_);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr l = term();
    for (;;) {
      if (accept('+'))
        l = make(Node::Kind::Add, l, term());
      else if (accept('-'))
        l = make(Node::Kind::Sub, l, term());
      else
        return l;
    }
  }

  NodePtr term() {
    NodePtr l = factor();
    for (;;) {
      if (accept('*'))
        l = make(Node::Kind::Mul, l, factor());
      else if (accept('/'))
        l = make(Node::Kind::Div, l, factor());
      else
        return l;
    }
  }

  NodePtr factor() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '-') {
      ++pos_;
      return make(Node::Kind::Neg, factor());
    }
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Ident;
      n->name = std::string(s_.substr(start, pos_ - start));
      return n;
    }
    fail(std::string("unexpected '") + c + "'");
  }

  NodePtr number() {
    const size_t start = pos_;
    auto digits = [&] {
      size_t k = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, ++k;
      return k;
    };
    size_t nd = digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      nd += digits();
    }
    if (nd == 0) {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail("malformed exponent");
    }
    double v = 0.0;
    const auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (res.ec != std::errc() || !std::isfinite(v)) {
      pos_ = start;
      fail("number out of range");
    }
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Number;
    n->value = v;
    return n;
  }

  std::string_view s_;
  const std::string& where_;
  size_t pos_ = 0;
};

int precedence(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Add:
    case Node::Kind::Sub:
      return 1;
    case Node::Kind::Mul:
    case Node::Kind::Div:
      return 2;
    default:
      return 3;
  }
}

void print(const Node& n, int min_prec, std::string& out) {
  const bool wrap = precedence(n) < min_prec;
  if (wrap) out += '(';
  switch (n.kind) {
    case Node::Kind::Number: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      break;
    }
    case Node::Kind::Ident:
      out += n.name;
      break;
    case Node::Kind::Neg:
      out += '-';
      print(*n.lhs, 3, out);
      break;
    case Node::Kind::Add:
    case Node::Kind::Sub:
      print(*n.lhs, 1, out);
      out += n.kind == Node::Kind::Add ? " + " : " - ";
      print(*n.rhs, 2, out);
      break;
    case Node::Kind::Mul:
    case Node::Kind::Div:
      print(*n.lhs, 2, out);
      out += n.kind == Node::Kind::Mul ? "*" : "/";
      print(*n.rhs, 3, out);
      break;
  }
  if (wrap) out += ')';
}

void collect(const Node& n, std::set<std::string>& ids) {
  if (n.kind == Node::Kind::Ident) ids.insert(n.name);
  if (n.lhs) collect(*n.lhs, ids);
  if (n.rhs) collect(*n.rhs, ids);
}

std::string binding_summary(const Bindings& b) {
  std::string s;
  for (const auto& [k, v] : b) {
    if (!s.empty()) s += ", ";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    s += k + "=" + buf;
  }
  return s;
}

}  // namespace

NodePtr parse(std::string_view text, const std::string& where) {
  return Parser(text, where).run();
}

double eval(const Node& n, const Bindings& b, const std::string& where) {
  switch (n.kind) {
    case Node::Kind::Number:
      return n.value;
    case Node::Kind::Ident: {
      const auto it = b.find(n.name);
      if (it == b.end())
        throw Error(ErrorCode::UnboundIdentifier, "identifier '" + n.name + "' is not bound",
                    where);
      return it->second;
    }
    case Node::Kind::Neg:
      return -eval(*n.lhs, b, where);
    case Node::Kind::Add:
      return eval(*n.lhs, b, where) + eval(*n.rhs, b, where);
    case Node::Kind::Sub:
      return eval(*n.lhs, b, where) - eval(*n.rhs, b, where);
    case Node::Kind::Mul:
      return eval(*n.lhs, b, where) * eval(*n.rhs, b, where);
    case Node::Kind::Div: {
      const double num = eval(*n.lhs, b, where);
      const double den = eval(*n.rhs, b, where);
      if (den == 0.0)
        throw Error(ErrorCode::DivisionByZero,
                    "division by zero in '" + to_string(n) + "' with " + binding_summary(b),
                    where);
      return num / den;
    }
  }
  return 0.0;
}

Interval eval_interval(const Node& n, const IntervalBindings& b, const std::string& where) {
  switch (n.kind) {
    case Node::Kind::Number:
      return {n.value, n.value};
    case Node::Kind::Ident: {
      const auto it = b.find(n.name);
      if (it == b.end())
        throw Error(ErrorCode::UnknownParameter, "unknown parameter '" + n.name + "'", where);
      return it->second;
    }
    case Node::Kind::Neg: {
      const Interval x = eval_interval(*n.lhs, b, where);
      return {-x.hi, -x.lo};
    }
    case Node::Kind::Add: {
      const Interval x = eval_interval(*n.lhs, b, where), y = eval_interval(*n.rhs, b, where);
      return {x.lo + y.lo, x.hi + y.hi};
    }
    case Node::Kind::Sub: {
      const Interval x = eval_interval(*n.lhs, b, where), y = eval_interval(*n.rhs, b, where);
      return {x.lo - y.hi, x.hi - y.lo};
    }
    case Node::Kind::Mul:
    case Node::Kind::Div: {
      const Interval x = eval_interval(*n.lhs, b, where);
      Interval y = eval_interval(*n.rhs, b, where);
      if (n.kind == Node::Kind::Div) {
        if (y.lo <= 0.0 && y.hi >= 0.0)
          throw Error(ErrorCode::DivisionByZero,
                      "divisor '" + to_string(*n.rhs) + "' can be zero over the parameter box",
                      where);
        y = {1.0 / y.hi, 1.0 / y.lo};
      }
      const double c[4] = {x.lo * y.lo, x.lo * y.hi, x.hi * y.lo, x.hi * y.hi};
      return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
    }
  }
  return {0.0, 0.0};
}

std::vector<std::string> identifiers(const Node& n) {
  std::set<std::string> ids;
  collect(n, ids);
  return {ids.begin(), ids.end()};
}

std::string to_string(const Node& n) {
  std::string out;
  print(n, 0, out);
  return out;
}

bool equal(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Node::Kind::Number:
      return a.value == b.value;
    case Node::Kind::Ident:
      return a.name == b.name;
    case Node::Kind::Neg:
      return equal(*a.lhs, *b.lhs);
    default:
      return equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
  }
}

}  // namespace oogrisk::expr
