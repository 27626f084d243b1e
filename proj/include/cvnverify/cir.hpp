#pragma once

// CIR artifact model: resource declarations, protection map, function bodies
// with single-statement granularity, function summaries, business goals, and
// the text format parser/serializer.

#include <optional>
#include <string>
#include <vector>

#include "cvnverify/expr.hpp"

namespace cvnverify {

enum class ResourceKind { Mutex, RwLock, Condvar, Semaphore, Channel, Var, Atomic };

std::string to_string(ResourceKind k);
bool is_lock_kind(ResourceKind k);        // Mutex or RwLock
bool is_sync_primitive(ResourceKind k);   // everything except Var/Atomic

struct ResourceDecl {
  std::string name;
  ResourceKind kind = ResourceKind::Mutex;
  std::string paired_with;                // Condvar: its mutex
  std::int64_t initial_count = 0;         // Semaphore
  BaseType value_type = BaseType::Bool;   // Var/Atomic
  Value init;                             // Var/Atomic
  std::vector<std::string> enum_values;   // Var/Atomic of Enum type

  bool operator==(const ResourceDecl&) const = default;
};

enum class OpKind {
  Lock, Drop, ReadLock, WriteLock,
  Wait, NotifyOne, NotifyAll,
  Acquire, Release,
  Send, Recv,
  Read, Write, Load, Store, Cas,
  Spawn, Join, SpawnAsync, Await, Call,
  Nop,
};

std::string to_string(OpKind k);

struct Operation {
  OpKind kind = OpKind::Nop;
  std::string target;       // resource or function operand
  std::string mutex_arg;    // wait: the paired mutex
  std::optional<Expr> value;          // write/store payload
  std::optional<Expr> cas_expected;   // cas
  std::optional<Expr> cas_new;        // cas

  bool operator==(const Operation&) const = default;
};

std::string to_string(const Operation& op);

struct Transfer {
  enum class Kind { Next, Branch, Switch, Return, Omitted };

  Kind kind = Kind::Omitted;
  std::string next;                     // Next
  std::optional<BoolExpr> cond;         // Branch (absent for cas)
  std::string on_true, on_false;        // Branch
  std::string switch_var;               // Switch
  std::vector<std::pair<Value, std::string>> arms;  // Switch
  std::string switch_default;           // Switch

  static Transfer to(std::string sid) {
    Transfer t;
    t.kind = Kind::Next;
    t.next = std::move(sid);
    return t;
  }
  static Transfer ret() {
    Transfer t;
    t.kind = Kind::Return;
    return t;
  }

  bool operator==(const Transfer&) const = default;
};

struct Statement {
  std::string sid;
  Operation op;
  Transfer transfer;

  bool operator==(const Statement&) const = default;
};

enum class FunctionKind { Normal, Async, Closure };

std::string to_string(FunctionKind k);

struct FunctionDef {
  std::string name;
  FunctionKind kind = FunctionKind::Normal;
  std::vector<Statement> body;
  // True for the entry generated from the threads: sugar; such functions are
  // regenerated on serialization instead of being written out.
  bool synthetic = false;

  const Statement* find_statement(const std::string& sid) const;
  const std::string* entry_sid() const {
    return body.empty() ? nullptr : &body.front().sid;
  }

  bool operator==(const FunctionDef&) const = default;
};

struct FunctionSummary {
  std::string name;
  std::vector<std::string> reads, writes, calls;
  bool has_concurrency = false;

  bool operator==(const FunctionSummary&) const = default;
};

struct BusinessGoal {
  std::string id;
  std::string description;
  std::vector<std::string> completion;    // function names
  std::vector<std::string> availability;  // resource names
  std::vector<std::pair<std::string, Value>> variables;

  bool operator==(const BusinessGoal&) const = default;
};

struct CirArtifact {
  std::vector<ResourceDecl> resources;
  std::vector<std::pair<std::string, std::vector<std::string>>> protection;
  std::vector<FunctionDef> functions;
  std::vector<FunctionSummary> summaries;
  std::string entry;
  std::vector<BusinessGoal> goals;
  bool threads_form = false;  // written back as a threads: section

  const ResourceDecl* find_resource(const std::string& name) const;
  const FunctionDef* find_function(const std::string& name) const;
  const FunctionSummary* find_summary(const std::string& name) const;
  const std::vector<std::string>* protection_of(const std::string& var) const;
  bool sid_exists(const std::string& sid) const;

  bool operator==(const CirArtifact&) const = default;
};

struct ParseError {
  int line = 0;
  int column = 0;
  std::string code;  // E0xx
  std::string message;

  bool operator==(const ParseError&) const = default;
};

struct ParseResult {
  std::optional<CirArtifact> artifact;
  std::vector<ParseError> errors;
  std::vector<std::string> warnings;  // unknown keys and other tolerated oddities

  bool ok() const { return artifact.has_value() && errors.empty(); }
};

ParseResult parse_cir(std::string_view text);
std::string serialize_cir(const CirArtifact& artifact);

// Expression text parsing, shared with the config front end and tests.
// Returns nullopt and fills `error` on malformed input.
std::optional<Expr> parse_value_expr(std::string_view text, std::string& error);
std::optional<BoolExpr> parse_bool_expr(std::string_view text, std::string& error);

}  // namespace cvnverify
