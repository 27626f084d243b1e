#include "cvnverify/expr.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace cvnverify {

std::string to_string(BaseType t) {
  switch (t) {
    case BaseType::Bool: return "Bool";
    case BaseType::Int: return "Int";
    case BaseType::Float: return "Float";
    case BaseType::String: return "String";
    case BaseType::Enum: return "Enum";
  }
  return "?";
}

BaseType Value::type() const {
  if (std::holds_alternative<bool>(v)) return BaseType::Bool;
  if (std::holds_alternative<std::int64_t>(v)) return BaseType::Int;
  if (std::holds_alternative<double>(v)) return BaseType::Float;
  if (std::holds_alternative<std::string>(v)) return BaseType::String;
  if (std::holds_alternative<Value::EnumV>(v)) return BaseType::Enum;
  throw std::logic_error("Value::type on Top");
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

// Floats must keep a marker so they reparse as floats, not ints.
std::string float_repr(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  std::string s = os.str();
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
    s += ".0";
  }
  return s;
}

}  // namespace

std::string to_string(const Value& v) {
  if (v.is_top()) return "TOP";
  if (auto* b = std::get_if<bool>(&v.v)) return *b ? "true" : "false";
  if (auto* i = std::get_if<std::int64_t>(&v.v)) return std::to_string(*i);
  if (auto* d = std::get_if<double>(&v.v)) return float_repr(*d);
  if (auto* s = std::get_if<std::string>(&v.v)) return "\"" + escape(*s) + "\"";
  return std::get<Value::EnumV>(v.v).name;
}

std::size_t hash_value(const Value& v) {
  std::size_t seed = v.v.index();
  auto mix = [&seed](std::size_t h) {
    seed ^= h + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  };
  if (auto* b = std::get_if<bool>(&v.v)) {
    mix(std::hash<bool>{}(*b));
  } else if (auto* i = std::get_if<std::int64_t>(&v.v)) {
    mix(std::hash<std::int64_t>{}(*i));
  } else if (auto* d = std::get_if<double>(&v.v)) {
    mix(std::hash<double>{}(*d));
  } else if (auto* s = std::get_if<std::string>(&v.v)) {
    mix(std::hash<std::string>{}(*s));
  } else if (auto* e = std::get_if<Value::EnumV>(&v.v)) {
    mix(std::hash<std::string>{}(e->name));
  }
  return seed;
}

std::string to_string(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
    case ArithOp::Div: return "/";
  }
  return "?";
}

std::string to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

bool Expr::operator==(const Expr& other) const {
  if (node.index() != other.node.index()) return false;
  if (auto* l = std::get_if<Lit>(&node)) {
    return l->value == std::get<Lit>(other.node).value;
  }
  if (auto* r = std::get_if<Ref>(&node)) {
    return r->name == std::get<Ref>(other.node).name;
  }
  const auto& a = std::get<Bin>(node);
  const auto& b = std::get<Bin>(other.node);
  return a.op == b.op && *a.lhs == *b.lhs && *a.rhs == *b.rhs;
}

bool BoolExpr::operator==(const BoolExpr& other) const {
  if (node.index() != other.node.index()) return false;
  if (std::holds_alternative<TrueC>(node) || std::holds_alternative<FalseC>(node)) {
    return true;
  }
  if (auto* c = std::get_if<Cmp>(&node)) {
    const auto& d = std::get<Cmp>(other.node);
    return c->op == d.op && c->lhs == d.lhs && c->rhs == d.rhs;
  }
  if (auto* a = std::get_if<And>(&node)) {
    const auto& b = std::get<And>(other.node);
    return *a->lhs == *b.lhs && *a->rhs == *b.rhs;
  }
  if (auto* a = std::get_if<Or>(&node)) {
    const auto& b = std::get<Or>(other.node);
    return *a->lhs == *b.lhs && *a->rhs == *b.rhs;
  }
  const auto& a = std::get<Not>(node);
  const auto& b = std::get<Not>(other.node);
  return *a.arg == *b.arg;
}

namespace {

// Precedence: factor > mul/div > add/sub; cmp > not > and > or.
int arith_prec(ArithOp op) {
  return (op == ArithOp::Mul || op == ArithOp::Div) ? 2 : 1;
}

void print_expr(const Expr& e, std::string& out, int parent_prec) {
  if (auto* l = std::get_if<Expr::Lit>(&e.node)) {
    out += to_string(l->value);
    return;
  }
  if (auto* r = std::get_if<Expr::Ref>(&e.node)) {
    out += r->name;
    return;
  }
  const auto& b = std::get<Expr::Bin>(e.node);
  int prec = arith_prec(b.op);
  bool parens = prec < parent_prec;
  if (parens) out += "(";
  print_expr(*b.lhs, out, prec);
  out += " " + to_string(b.op) + " ";
  print_expr(*b.rhs, out, prec + 1);  // left associative
  if (parens) out += ")";
}

void print_bool(const BoolExpr& e, std::string& out, int parent_prec) {
  // 3 = not, 2 = and, 1 = or, atoms bind tightest.
  if (std::holds_alternative<BoolExpr::TrueC>(e.node)) {
    out += "true";
    return;
  }
  if (std::holds_alternative<BoolExpr::FalseC>(e.node)) {
    out += "false";
    return;
  }
  if (auto* c = std::get_if<BoolExpr::Cmp>(&e.node)) {
    print_expr(c->lhs, out, 0);
    out += " " + to_string(c->op) + " ";
    print_expr(c->rhs, out, 0);
    return;
  }
  if (auto* n = std::get_if<BoolExpr::Not>(&e.node)) {
    out += "!";
    bool parens = !std::holds_alternative<BoolExpr::TrueC>(n->arg->node) &&
                  !std::holds_alternative<BoolExpr::FalseC>(n->arg->node) &&
                  !std::holds_alternative<BoolExpr::Not>(n->arg->node);
    if (parens) out += "(";
    print_bool(*n->arg, out, 3);
    if (parens) out += ")";
    return;
  }
  if (auto* a = std::get_if<BoolExpr::And>(&e.node)) {
    bool parens = 2 < parent_prec;
    if (parens) out += "(";
    print_bool(*a->lhs, out, 2);
    out += " && ";
    print_bool(*a->rhs, out, 2);
    if (parens) out += ")";
    return;
  }
  const auto& o = std::get<BoolExpr::Or>(e.node);
  bool parens = 1 < parent_prec;
  if (parens) out += "(";
  print_bool(*o.lhs, out, 1);
  out += " || ";
  print_bool(*o.rhs, out, 1);
  if (parens) out += ")";
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print_expr(e, out, 0);
  return out;
}

std::string to_string(const BoolExpr& e) {
  std::string out;
  print_bool(e, out, 0);
  return out;
}

Truth3 kleene_and(Truth3 a, Truth3 b) {
  if (a == Truth3::False || b == Truth3::False) return Truth3::False;
  if (a == Truth3::True && b == Truth3::True) return Truth3::True;
  return Truth3::Unknown;
}

Truth3 kleene_or(Truth3 a, Truth3 b) {
  if (a == Truth3::True || b == Truth3::True) return Truth3::True;
  if (a == Truth3::False && b == Truth3::False) return Truth3::False;
  return Truth3::Unknown;
}

Truth3 kleene_not(Truth3 a) {
  if (a == Truth3::True) return Truth3::False;
  if (a == Truth3::False) return Truth3::True;
  return Truth3::Unknown;
}

std::string to_string(Truth3 t) {
  switch (t) {
    case Truth3::True: return "true";
    case Truth3::False: return "false";
    case Truth3::Unknown: return "unknown";
  }
  return "?";
}

namespace {

Value arith(ArithOp op, const Value& a, const Value& b) {
  if (a.is_top() || b.is_top()) return Value::top();
  if (a.type() == BaseType::Int && b.type() == BaseType::Int) {
    std::int64_t x = std::get<std::int64_t>(a.v);
    std::int64_t y = std::get<std::int64_t>(b.v);
    switch (op) {
      case ArithOp::Add: return Value::integer(x + y);
      case ArithOp::Sub: return Value::integer(x - y);
      case ArithOp::Mul: return Value::integer(x * y);
      case ArithOp::Div: return y == 0 ? Value::top() : Value::integer(x / y);
    }
  }
  if (a.type() == BaseType::Float && b.type() == BaseType::Float) {
    double x = std::get<double>(a.v);
    double y = std::get<double>(b.v);
    switch (op) {
      case ArithOp::Add: return Value::real(x + y);
      case ArithOp::Sub: return Value::real(x - y);
      case ArithOp::Mul: return Value::real(x * y);
      case ArithOp::Div: return y == 0.0 ? Value::top() : Value::real(x / y);
    }
  }
  return Value::top();  // ill-typed operands degrade to unknown
}

Truth3 from_bool(bool b) { return b ? Truth3::True : Truth3::False; }

Truth3 compare(CmpOp op, const Value& a, const Value& b) {
  if (a.is_top() || b.is_top()) return Truth3::Unknown;
  if (a.type() != b.type()) return Truth3::Unknown;
  switch (a.type()) {
    case BaseType::Bool: {
      bool x = std::get<bool>(a.v), y = std::get<bool>(b.v);
      if (op == CmpOp::Eq) return from_bool(x == y);
      if (op == CmpOp::Ne) return from_bool(x != y);
      return Truth3::Unknown;
    }
    case BaseType::Int: {
      std::int64_t x = std::get<std::int64_t>(a.v), y = std::get<std::int64_t>(b.v);
      switch (op) {
        case CmpOp::Eq: return from_bool(x == y);
        case CmpOp::Ne: return from_bool(x != y);
        case CmpOp::Lt: return from_bool(x < y);
        case CmpOp::Le: return from_bool(x <= y);
        case CmpOp::Gt: return from_bool(x > y);
        case CmpOp::Ge: return from_bool(x >= y);
      }
      return Truth3::Unknown;
    }
    case BaseType::Float: {
      double x = std::get<double>(a.v), y = std::get<double>(b.v);
      switch (op) {
        case CmpOp::Eq: return from_bool(x == y);
        case CmpOp::Ne: return from_bool(x != y);
        case CmpOp::Lt: return from_bool(x < y);
        case CmpOp::Le: return from_bool(x <= y);
        case CmpOp::Gt: return from_bool(x > y);
        case CmpOp::Ge: return from_bool(x >= y);
      }
      return Truth3::Unknown;
    }
    case BaseType::String: {
      const auto& x = std::get<std::string>(a.v);
      const auto& y = std::get<std::string>(b.v);
      if (op == CmpOp::Eq) return from_bool(x == y);
      if (op == CmpOp::Ne) return from_bool(x != y);
      return Truth3::Unknown;
    }
    case BaseType::Enum: {
      const auto& x = std::get<Value::EnumV>(a.v).name;
      const auto& y = std::get<Value::EnumV>(b.v).name;
      if (op == CmpOp::Eq) return from_bool(x == y);
      if (op == CmpOp::Ne) return from_bool(x != y);
      return Truth3::Unknown;
    }
  }
  return Truth3::Unknown;
}

}  // namespace

Value eval_expr(const Expr& e, const Valuation& v) {
  if (auto* l = std::get_if<Expr::Lit>(&e.node)) return l->value;
  if (auto* r = std::get_if<Expr::Ref>(&e.node)) {
    auto it = v.find(r->name);
    if (it == v.end()) throw UnknownVariable(r->name);
    return it->second;
  }
  const auto& b = std::get<Expr::Bin>(e.node);
  return arith(b.op, eval_expr(*b.lhs, v), eval_expr(*b.rhs, v));
}

Truth3 eval_guard(const BoolExpr& g, const Valuation& v) {
  if (std::holds_alternative<BoolExpr::TrueC>(g.node)) return Truth3::True;
  if (std::holds_alternative<BoolExpr::FalseC>(g.node)) return Truth3::False;
  if (auto* c = std::get_if<BoolExpr::Cmp>(&g.node)) {
    return compare(c->op, eval_expr(c->lhs, v), eval_expr(c->rhs, v));
  }
  if (auto* a = std::get_if<BoolExpr::And>(&g.node)) {
    return kleene_and(eval_guard(*a->lhs, v), eval_guard(*a->rhs, v));
  }
  if (auto* o = std::get_if<BoolExpr::Or>(&g.node)) {
    return kleene_or(eval_guard(*o->lhs, v), eval_guard(*o->rhs, v));
  }
  return kleene_not(eval_guard(*std::get<BoolExpr::Not>(g.node).arg, v));
}

}  // namespace cvnverify
