#pragma once

// Value domain and expression trees shared by the CIR front end and the net
// semantics: concrete typed values plus the absorbing unknown value (Top),
// arithmetic/boolean expressions, and three-valued guard evaluation.

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>

namespace cvnverify {

enum class BaseType { Bool, Int, Float, String, Enum };

std::string to_string(BaseType t);

// A value is either Concrete(type, payload) or Top (unknown).
struct Value {
  struct Top {
    bool operator==(const Top&) const = default;
  };
  struct EnumV {
    std::string name;
    bool operator==(const EnumV&) const = default;
  };

  std::variant<Top, bool, std::int64_t, double, std::string, EnumV> v;

  Value() : v(Top{}) {}

  static Value top() { return Value{}; }
  static Value boolean(bool b) { return make(b); }
  static Value integer(std::int64_t i) { return make(i); }
  static Value real(double d) { return make(d); }
  static Value str(std::string s) { return make(std::move(s)); }
  static Value enumerator(std::string name) { return make(EnumV{std::move(name)}); }

  bool is_top() const { return std::holds_alternative<Top>(v); }
  bool is_concrete() const { return !is_top(); }
  BaseType type() const;  // precondition: concrete

  bool operator==(const Value&) const = default;

 private:
  template <typename T>
  static Value make(T x) {
    Value val;
    val.v = std::move(x);
    return val;
  }
};

std::string to_string(const Value& v);
std::size_t hash_value(const Value& v);

enum class ArithOp { Add, Sub, Mul, Div };
enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string to_string(ArithOp op);
std::string to_string(CmpOp op);

// Value expressions. Trees are immutable; copies share subtrees.
struct Expr {
  struct Lit {
    Value value;
  };
  struct Ref {
    std::string name;
  };
  struct Bin {
    ArithOp op;
    std::shared_ptr<const Expr> lhs, rhs;
  };

  std::variant<Lit, Ref, Bin> node;

  static Expr lit(Value v) { return Expr{Lit{std::move(v)}}; }
  static Expr ref(std::string name) { return Expr{Ref{std::move(name)}}; }
  static Expr bin(ArithOp op, Expr lhs, Expr rhs) {
    return Expr{Bin{op, std::make_shared<Expr>(std::move(lhs)),
                    std::make_shared<Expr>(std::move(rhs))}};
  }

  bool operator==(const Expr& other) const;
};

// Boolean expressions over comparisons; guards default to TrueC.
struct BoolExpr {
  struct TrueC {};
  struct FalseC {};
  struct Cmp {
    CmpOp op;
    Expr lhs, rhs;
  };
  struct And {
    std::shared_ptr<const BoolExpr> lhs, rhs;
  };
  struct Or {
    std::shared_ptr<const BoolExpr> lhs, rhs;
  };
  struct Not {
    std::shared_ptr<const BoolExpr> arg;
  };

  std::variant<TrueC, FalseC, Cmp, And, Or, Not> node;

  static BoolExpr truec() { return BoolExpr{TrueC{}}; }
  static BoolExpr falsec() { return BoolExpr{FalseC{}}; }
  static BoolExpr cmp(CmpOp op, Expr lhs, Expr rhs) {
    return BoolExpr{Cmp{op, std::move(lhs), std::move(rhs)}};
  }
  static BoolExpr conj(BoolExpr lhs, BoolExpr rhs) {
    return BoolExpr{And{std::make_shared<BoolExpr>(std::move(lhs)),
                        std::make_shared<BoolExpr>(std::move(rhs))}};
  }
  static BoolExpr disj(BoolExpr lhs, BoolExpr rhs) {
    return BoolExpr{Or{std::make_shared<BoolExpr>(std::move(lhs)),
                       std::make_shared<BoolExpr>(std::move(rhs))}};
  }
  static BoolExpr negate(BoolExpr arg) {
    return BoolExpr{Not{std::make_shared<BoolExpr>(std::move(arg))}};
  }

  bool operator==(const BoolExpr& other) const;
};

std::string to_string(const Expr& e);
std::string to_string(const BoolExpr& e);

// Strong Kleene truth values.
enum class Truth3 { True, False, Unknown };

Truth3 kleene_and(Truth3 a, Truth3 b);
Truth3 kleene_or(Truth3 a, Truth3 b);
Truth3 kleene_not(Truth3 a);

std::string to_string(Truth3 t);

using Valuation = std::map<std::string, Value>;

struct UnknownVariable : std::runtime_error {
  explicit UnknownVariable(const std::string& name)
      : std::runtime_error("unknown variable: " + name) {}
};

// Top is absorbing: any operation with a Top operand yields Top, any
// comparison with a Top operand yields Unknown. Partial operations on bad
// concrete operands (division by zero, mismatched types) also yield Top.
Value eval_expr(const Expr& e, const Valuation& v);
Truth3 eval_guard(const BoolExpr& g, const Valuation& v);

}  // namespace cvnverify
