#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "cvnverify/checker.hpp"

namespace cvnverify {

namespace {

// ---------------------------------------------------------------------------
// catalogue

const std::vector<RuleInfo>& catalogue() {
  static const std::vector<RuleInfo> rules = {
      {"E001", "structure", "statement in the middle of a body has no transfer", true},
      {"E002", "structure", "function has an empty body", false},
      {"E003", "structure", "artifact declares no functions", false},
      {"E004", "structure", "branch condition is missing or misplaced", false},
      {"E005", "structure", "switch transfer has no arms", false},
      {"E101", "names", "operation targets an undeclared resource", false},
      {"E102", "names", "duplicate statement id", true},
      {"E103", "names", "operation targets an undefined function", false},
      {"E104", "names", "duplicate declaration name", false},
      {"E107", "names", "entry does not name a defined function", false},
      {"E108", "names", "goal references an unknown name", false},
      {"E109", "names", "availability goal targets a resource without a token pool", false},
      {"E110", "names", "expression references an undefined name", false},
      {"E201", "types", "branch condition is ill-typed", false},
      {"E202", "types", "written value does not match the variable type", false},
      {"E203", "types", "switch arm literal does not match the selector type", false},
      {"E204", "types", "cas operand types do not match the target", false},
      {"E205", "types", "goal literal does not match the variable type", false},
      {"E301", "resource-use", "lock or drop applied to a non-lockable resource", false},
      {"E302", "resource-use", "read_lock or write_lock applied to a non-RwLock", false},
      {"E303", "resource-use", "wait or notify applied to a non-condvar", false},
      {"E304", "resource-use", "wait uses a mutex other than the condvar's pair", false},
      {"E305", "resource-use", "acquire or release applied to a non-semaphore", false},
      {"E306", "resource-use", "send or recv applied to a non-channel", false},
      {"E307", "resource-use", "read or write applied to a non-Var resource", false},
      {"E308", "resource-use", "load, store or cas applied to a non-Atomic resource", false},
      {"E309", "resource-use", "condvar pairing declaration is missing or invalid", false},
      {"E310", "resource-use", "protected variable accessed without its locks", false},
      {"E401", "threads", "spawn without a matching join in the same function", false},
      {"E402", "threads", "spawn may execute more than once on a loop", false},
      {"E403", "threads", "join without a prior spawn in the same function", false},
      {"E404", "threads", "function is spawned more than once", false},
      {"E405", "threads", "spawn or join target has no body", false},
      {"E406", "threads", "entry function used as a spawn or join target", false},
      {"E501", "locks", "lock still held at function exit", true},
      {"E503", "locks", "lock may already be held when re-acquired", false},
      {"E504", "locks", "drop of a lock that is not held", false},
      {"E505", "locks", "drop cannot decide between read and write modes", false},
      {"E506", "locks", "wait called without holding the paired mutex", false},
      {"E507", "locks", "lock held on some exit paths but not all", false},
      {"E601", "control", "transfer targets a sid that does not exist", false},
      {"E602", "control", "statement is unreachable from the function entry", false},
      {"E603", "control", "no return is reachable from the function entry", false},
      {"E604", "control", "operation and transfer kinds are incompatible", false},
      {"E701", "protection", "protection key is not a plain variable", false},
      {"E702", "protection", "protection key is not declared", false},
      {"E703", "protection", "protection entry names a non-lock", false},
      {"E704", "protection", "protection entry has an empty lock set", false},
      {"E705", "protection", "duplicate protection key", false},
      {"E801", "summaries", "body writes a variable the summary omits", false},
      {"E802", "summaries", "summary lists a write the body never performs", false},
      {"E803", "summaries", "summary reads disagree with the body", false},
      {"E804", "summaries", "summary calls disagree with the body", false},
      {"E805", "summaries", "has_concurrency flag contradicts the body", false},
      {"E806", "summaries", "summary references undeclared names", false},
  };
  return rules;
}

bool rule_is_autofixable(const std::string& code) {
  for (const auto& r : catalogue()) {
    if (r.code == code) return r.autofixable;
  }
  return false;
}

// ---------------------------------------------------------------------------
// reporting

struct Reporter {
  std::vector<Finding>* out;

  void add(std::string code, std::string message, std::string anchor,
           std::string function_name) {
    Finding f;
    f.autofixable = rule_is_autofixable(code);
    f.code = std::move(code);
    f.message = std::move(message);
    f.anchor = std::move(anchor);
    f.function_name = std::move(function_name);
    out->push_back(std::move(f));
  }
};

// ---------------------------------------------------------------------------
// control-flow graph per function

std::vector<std::string> targets_of(const Transfer& t) {
  switch (t.kind) {
    case Transfer::Kind::Next:
      return {t.next};
    case Transfer::Kind::Branch:
      return {t.on_true, t.on_false};
    case Transfer::Kind::Switch: {
      std::vector<std::string> out;
      for (const auto& [_, sid] : t.arms) out.push_back(sid);
      out.push_back(t.switch_default);
      return out;
    }
    case Transfer::Kind::Return:
    case Transfer::Kind::Omitted:
      return {};
  }
  return {};
}

struct Cfg {
  std::map<std::string, size_t> first_index;
  std::vector<std::vector<size_t>> succ;
  std::vector<char> reachable;
  // (statement index, missing target), deduplicated
  std::vector<std::pair<size_t, std::string>> dangling;
  bool has_duplicate_sids = false;

  explicit Cfg(const FunctionDef& fn) {
    succ.resize(fn.body.size());
    for (size_t i = 0; i < fn.body.size(); ++i) {
      auto [it, inserted] = first_index.emplace(fn.body[i].sid, i);
      if (!inserted) has_duplicate_sids = true;
    }
    std::set<std::pair<size_t, std::string>> dangle_seen;
    for (size_t i = 0; i < fn.body.size(); ++i) {
      for (const auto& target : targets_of(fn.body[i].transfer)) {
        auto it = first_index.find(target);
        if (it == first_index.end()) {
          if (dangle_seen.emplace(i, target).second) dangling.emplace_back(i, target);
        } else {
          succ[i].push_back(it->second);
        }
      }
    }
    reachable.assign(fn.body.size(), 0);
    if (!fn.body.empty()) {
      std::vector<size_t> stack{0};
      reachable[0] = 1;
      while (!stack.empty()) {
        size_t i = stack.back();
        stack.pop_back();
        for (size_t j : succ[i]) {
          if (!reachable[j]) {
            reachable[j] = 1;
            stack.push_back(j);
          }
        }
      }
    }
  }

  bool on_cycle(size_t start) const {
    std::vector<char> seen(succ.size(), 0);
    std::vector<size_t> stack(succ[start].begin(), succ[start].end());
    while (!stack.empty()) {
      size_t i = stack.back();
      stack.pop_back();
      if (i == start) return true;
      if (seen[i]) continue;
      seen[i] = 1;
      for (size_t j : succ[i]) stack.push_back(j);
    }
    return false;
  }
};

// ---------------------------------------------------------------------------
// name and type environment

struct NameInfo {
  enum Kind { StoreVar, EnumValue, OtherResource, Unknown } kind = Unknown;
  BaseType type = BaseType::Bool;
  const ResourceDecl* decl = nullptr;  // for StoreVar: the variable; for
                                       // EnumValue: the declaring enum
};

struct Env {
  const CirArtifact* art;

  NameInfo lookup(const std::string& name) const {
    if (const ResourceDecl* r = art->find_resource(name)) {
      if (r->kind == ResourceKind::Var || r->kind == ResourceKind::Atomic) {
        return {NameInfo::StoreVar, r->value_type, r};
      }
      return {NameInfo::OtherResource, BaseType::Bool, r};
    }
    for (const auto& r : art->resources) {
      if ((r.kind == ResourceKind::Var || r.kind == ResourceKind::Atomic) &&
          r.value_type == BaseType::Enum) {
        for (const auto& v : r.enum_values) {
          if (v == name) return {NameInfo::EnumValue, BaseType::Enum, &r};
        }
      }
    }
    return {};
  }
};

// Infers the type of an expression, reporting undefined names (E110) and
// type clashes under `clash_code` (the code depends on where the expression
// sits: condition, write, or cas). Returns nullopt when a sub-problem was
// already reported, to stop cascading.
class TypeChecker {
 public:
  TypeChecker(const Env& env, Reporter& rep, std::string anchor, std::string fn)
      : env_(env), rep_(rep), anchor_(std::move(anchor)), fn_(std::move(fn)) {}

  std::optional<BaseType> infer(const Expr& e, const std::string& clash_code) {
    if (const auto* lit = std::get_if<Expr::Lit>(&e.node)) {
      return lit->value.is_top() ? std::nullopt
                                 : std::optional<BaseType>(lit->value.type());
    }
    if (const auto* ref = std::get_if<Expr::Ref>(&e.node)) {
      NameInfo info = env_.lookup(ref->name);
      if (info.kind == NameInfo::StoreVar || info.kind == NameInfo::EnumValue) {
        return info.type;
      }
      report_undefined(ref->name,
                       info.kind == NameInfo::OtherResource
                           ? "'" + ref->name + "' is not a store variable"
                           : "undefined name '" + ref->name + "'");
      return std::nullopt;
    }
    const auto& bin = std::get<Expr::Bin>(e.node);
    auto l = infer(*bin.lhs, clash_code);
    auto r = infer(*bin.rhs, clash_code);
    if (!l || !r) return std::nullopt;
    if (*l != *r || (*l != BaseType::Int && *l != BaseType::Float)) {
      rep_.add(clash_code,
               "'" + to_string(bin.op) + "' applied to " + to_string(*l) + " and " +
                   to_string(*r),
               anchor_, fn_);
      return std::nullopt;
    }
    return l;
  }

  void check_condition(const BoolExpr& b) {
    if (std::holds_alternative<BoolExpr::TrueC>(b.node) ||
        std::holds_alternative<BoolExpr::FalseC>(b.node)) {
      return;
    }
    if (const auto* c = std::get_if<BoolExpr::Cmp>(&b.node)) {
      auto l = infer(c->lhs, "E201");
      auto r = infer(c->rhs, "E201");
      if (!l || !r) return;
      if (*l != *r) {
        rep_.add("E201", "comparison between " + to_string(*l) + " and " + to_string(*r),
                 anchor_, fn_);
        return;
      }
      bool ordered = *l == BaseType::Int || *l == BaseType::Float;
      if (!ordered && c->op != CmpOp::Eq && c->op != CmpOp::Ne) {
        rep_.add("E201", "ordering comparison on " + to_string(*l), anchor_, fn_);
      }
      return;
    }
    if (const auto* a = std::get_if<BoolExpr::And>(&b.node)) {
      check_condition(*a->lhs);
      check_condition(*a->rhs);
      return;
    }
    if (const auto* o = std::get_if<BoolExpr::Or>(&b.node)) {
      check_condition(*o->lhs);
      check_condition(*o->rhs);
      return;
    }
    if (const auto* n = std::get_if<BoolExpr::Not>(&b.node)) {
      check_condition(*n->arg);
    }
  }

 private:
  void report_undefined(const std::string& name, const std::string& message) {
    // one report per name and anchor
    if (seen_.emplace(anchor_, name).second) {
      rep_.add("E110", message, anchor_, fn_);
    }
  }

  const Env& env_;
  Reporter& rep_;
  std::string anchor_;
  std::string fn_;
  std::set<std::pair<std::string, std::string>> seen_;
};

void collect_expr_refs(const Expr& e, std::set<std::string>& out) {
  if (const auto* ref = std::get_if<Expr::Ref>(&e.node)) {
    out.insert(ref->name);
    return;
  }
  if (const auto* bin = std::get_if<Expr::Bin>(&e.node)) {
    collect_expr_refs(*bin->lhs, out);
    collect_expr_refs(*bin->rhs, out);
  }
}

void collect_bool_refs(const BoolExpr& b, std::set<std::string>& out) {
  if (const auto* c = std::get_if<BoolExpr::Cmp>(&b.node)) {
    collect_expr_refs(c->lhs, out);
    collect_expr_refs(c->rhs, out);
  } else if (const auto* a = std::get_if<BoolExpr::And>(&b.node)) {
    collect_bool_refs(*a->lhs, out);
    collect_bool_refs(*a->rhs, out);
  } else if (const auto* o = std::get_if<BoolExpr::Or>(&b.node)) {
    collect_bool_refs(*o->lhs, out);
    collect_bool_refs(*o->rhs, out);
  } else if (const auto* n = std::get_if<BoolExpr::Not>(&b.node)) {
    collect_bool_refs(*n->arg, out);
  }
}

// ---------------------------------------------------------------------------
// lock discipline dataflow
//
// Forward analysis over the statement graph. must: locks held on every path
// into the statement; may: locks held on some path, with the acquisition
// modes that reach it. wait keeps its mutex held as a net effect.

enum class LockMode { Plain, Read, Write };

struct HeldState {
  std::set<std::string> must;
  std::map<std::string, std::set<LockMode>> may;

  bool operator==(const HeldState&) const = default;
};

HeldState apply_op(const Operation& op, HeldState in) {
  switch (op.kind) {
    case OpKind::Lock:
      in.must.insert(op.target);
      in.may[op.target].insert(LockMode::Plain);
      break;
    case OpKind::ReadLock:
      in.must.insert(op.target);
      in.may[op.target].insert(LockMode::Read);
      break;
    case OpKind::WriteLock:
      in.must.insert(op.target);
      in.may[op.target].insert(LockMode::Write);
      break;
    case OpKind::Drop:
      in.must.erase(op.target);
      in.may.erase(op.target);
      break;
    default:
      break;
  }
  return in;
}

struct LockFlow {
  std::vector<HeldState> in;   // before the operation
  std::vector<HeldState> out;  // after the operation
};

LockFlow lock_dataflow(const FunctionDef& fn, const Cfg& cfg,
                       const std::set<std::string>& all_locks) {
  size_t n = fn.body.size();
  LockFlow flow;
  flow.in.resize(n);
  flow.out.resize(n);

  // predecessors of reachable statements
  std::vector<std::vector<size_t>> preds(n);
  for (size_t i = 0; i < n; ++i) {
    if (!cfg.reachable[i]) continue;
    for (size_t j : cfg.succ[i]) preds[j].push_back(i);
  }

  HeldState top;
  top.must = all_locks;
  for (const auto& l : all_locks) {
    top.may[l] = {LockMode::Plain, LockMode::Read, LockMode::Write};
  }
  for (size_t i = 0; i < n; ++i) {
    flow.in[i] = (i == 0) ? HeldState{} : top;
    // must is intersected at meets, so not-yet-visited predecessors have to
    // look optimistic; may is unioned and grows from empty instead
    flow.out[i] = apply_op(fn.body[i].op, flow.in[i]);
    flow.out[i].may.clear();
    flow.in[i].may.clear();
  }

  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < n; ++i) {
      if (!cfg.reachable[i]) continue;
      HeldState in_state;
      if (i == 0 && preds[i].empty()) {
        in_state = HeldState{};
      } else if (i == 0) {
        // entry with loop-back edges: start empty, then meet predecessors'
        // may; must stays the intersection with the empty entry state
        in_state = HeldState{};
        for (size_t p : preds[i]) {
          for (const auto& [l, modes] : flow.out[p].may) {
            in_state.may[l].insert(modes.begin(), modes.end());
          }
        }
      } else {
        bool first = true;
        for (size_t p : preds[i]) {
          if (first) {
            in_state = flow.out[p];
            first = false;
          } else {
            std::set<std::string> met;
            for (const auto& l : in_state.must) {
              if (flow.out[p].must.count(l)) met.insert(l);
            }
            in_state.must = std::move(met);
            for (const auto& [l, modes] : flow.out[p].may) {
              in_state.may[l].insert(modes.begin(), modes.end());
            }
          }
        }
        if (first) in_state = top;  // unreachable via preds; stays pessimistic
      }
      HeldState out_state = apply_op(fn.body[i].op, in_state);
      if (in_state != flow.in[i] || out_state != flow.out[i]) {
        flow.in[i] = std::move(in_state);
        flow.out[i] = std::move(out_state);
        changed = true;
      }
    }
  }
  return flow;
}

// Locks held on every path at a reachable return. Used by the checker to
// report and by the autofixer to insert drops.
std::vector<std::pair<size_t, std::string>> exit_leaks(const FunctionDef& fn,
                                                       const Cfg& cfg,
                                                       const LockFlow& flow) {
  std::vector<std::pair<size_t, std::string>> leaks;
  for (size_t i = 0; i < fn.body.size(); ++i) {
    if (!cfg.reachable[i]) continue;
    if (fn.body[i].transfer.kind != Transfer::Kind::Return) continue;
    for (const auto& l : flow.out[i].must) leaks.emplace_back(i, l);
  }
  return leaks;
}

// ---------------------------------------------------------------------------
// rule passes

bool concurrency_relevant(OpKind k) {
  switch (k) {
    case OpKind::Read:
    case OpKind::Write:
    case OpKind::Call:
    case OpKind::Nop:
      return false;
    default:
      return true;
  }
}

struct FnAnalysis {
  const FunctionDef* fn = nullptr;
  Cfg cfg;
  bool structural_errors = false;

  FnAnalysis(const FunctionDef& f) : fn(&f), cfg(f) {}
};

class Checker {
 public:
  explicit Checker(const CirArtifact& art) : art_(art), env_{&art}, rep_{&findings_} {}

  std::vector<Finding> run() {
    check_declarations();
    check_protection();
    check_entry();

    for (const auto& fn : art_.functions) {
      analyses_.emplace_back(fn);
    }
    check_duplicate_sids();

    for (auto& a : analyses_) {
      check_structure(a);
      scan_operations(a);
    }
    check_thread_pairing();
    for (auto& a : analyses_) {
      if (a.structural_errors) continue;
      check_control(a);
      check_locks(a);
    }
    check_summaries();
    check_goals();

    std::sort(findings_.begin(), findings_.end(), [](const Finding& x, const Finding& y) {
      return std::tie(x.anchor, x.code, x.message) <
             std::tie(y.anchor, y.code, y.message);
    });
    return std::move(findings_);
  }

 private:
  // --- declarations, E104 / E309 -------------------------------------------
  void check_declarations() {
    std::set<std::string> seen;
    for (const auto& r : art_.resources) {
      if (!seen.insert(r.name).second) {
        rep_.add("E104", "resource '" + r.name + "' is declared more than once",
                 r.name, "");
      }
    }
    std::set<std::string> fn_seen;
    for (const auto& f : art_.functions) {
      if (!fn_seen.insert(f.name).second) {
        rep_.add("E104", "function '" + f.name + "' is defined more than once",
                 f.name, "");
      }
    }
    std::set<std::string> sum_seen;
    for (const auto& s : art_.summaries) {
      if (!sum_seen.insert(s.name).second) {
        rep_.add("E104", "summary '" + s.name + "' appears more than once", s.name, "");
      }
    }
    for (const auto& r : art_.resources) {
      if (r.kind == ResourceKind::Condvar) {
        const ResourceDecl* m =
            r.paired_with.empty() ? nullptr : art_.find_resource(r.paired_with);
        if (r.paired_with.empty()) {
          rep_.add("E309", "condvar '" + r.name + "' declares no paired mutex",
                   r.name, "");
        } else if (m == nullptr || m->kind != ResourceKind::Mutex) {
          rep_.add("E309",
                   "condvar '" + r.name + "' is paired with '" + r.paired_with +
                       "', which is not a mutex",
                   r.name, "");
        }
      } else if (!r.paired_with.empty()) {
        rep_.add("E309",
                 "'" + r.name + "' carries paired_with but is not a condvar",
                 r.name, "");
      }
    }
  }

  // --- protection map, E7xx -------------------------------------------------
  void check_protection() {
    std::set<std::string> keys;
    for (const auto& [var, locks] : art_.protection) {
      if (!keys.insert(var).second) {
        rep_.add("E705", "protection key '" + var + "' appears more than once",
                 var, "");
        continue;
      }
      const ResourceDecl* r = art_.find_resource(var);
      bool key_ok = true;
      if (r == nullptr) {
        rep_.add("E702", "protection key '" + var + "' is not declared", var, "");
        key_ok = false;
      } else if (r->kind != ResourceKind::Var) {
        rep_.add("E701",
                 "protection key '" + var + "' is a " + to_string(r->kind) +
                     ", not a plain variable",
                 var, "");
        key_ok = false;
      }
      if (locks.empty()) {
        rep_.add("E704", "protection entry for '" + var + "' lists no locks", var, "");
        key_ok = false;
      }
      for (const auto& l : locks) {
        const ResourceDecl* lr = art_.find_resource(l);
        if (lr == nullptr || !is_lock_kind(lr->kind)) {
          rep_.add("E703",
                   "protection entry for '" + var + "' names '" + l +
                       "', which is not a lock",
                   var, "");
          key_ok = false;
        }
      }
      if (key_ok) valid_protection_.insert(var);
    }
  }

  // --- entry, E107 / E003 ----------------------------------------------------
  void check_entry() {
    if (art_.functions.empty()) {
      rep_.add("E003", "artifact declares no functions", "", "");
    }
    const FunctionDef* entry =
        art_.entry.empty() ? nullptr : art_.find_function(art_.entry);
    if (art_.entry.empty()) {
      rep_.add("E107", "artifact does not name an entry function", "", "");
    } else if (entry == nullptr) {
      rep_.add("E107", "entry '" + art_.entry + "' is not a defined function", "", "");
    }
  }

  // --- duplicate sids, E102 ---------------------------------------------------
  void check_duplicate_sids() {
    std::set<std::string> seen;
    for (const auto& fn : art_.functions) {
      for (const auto& st : fn.body) {
        if (!seen.insert(st.sid).second) {
          rep_.add("E102", "duplicate statement id '" + st.sid + "'", st.sid, fn.name);
          // duplicate resolution poisons path analyses in every function
          // holding an occurrence
          for (auto& a : analyses_) {
            if (a.fn->find_statement(st.sid) != nullptr) a.structural_errors = true;
          }
        }
      }
    }
  }

  // --- structure, E001 / E002 / E004 / E005 / E601 / E604 ----------------------
  void check_structure(FnAnalysis& a) {
    const FunctionDef& fn = *a.fn;
    if (fn.body.empty()) {
      rep_.add("E002", "function '" + fn.name + "' has an empty body", fn.name,
               fn.name);
      a.structural_errors = true;
      return;
    }
    for (size_t i = 0; i < fn.body.size(); ++i) {
      const Statement& st = fn.body[i];
      const Transfer& t = st.transfer;
      if (t.kind == Transfer::Kind::Omitted) {
        rep_.add("E001", "statement '" + st.sid + "' has no transfer", st.sid, fn.name);
        a.structural_errors = true;
        continue;
      }
      if (t.kind == Transfer::Kind::Branch) {
        if (st.op.kind == OpKind::Cas && t.cond) {
          rep_.add("E004",
                   "cas at '" + st.sid + "' takes its condition from the operation",
                   st.sid, fn.name);
          a.structural_errors = true;
        } else if (st.op.kind != OpKind::Cas && !t.cond) {
          rep_.add("E004", "branch at '" + st.sid + "' has no condition", st.sid,
                   fn.name);
          a.structural_errors = true;
        }
      }
      if (t.kind == Transfer::Kind::Switch && t.arms.empty()) {
        rep_.add("E005", "switch at '" + st.sid + "' has no arms", st.sid, fn.name);
        a.structural_errors = true;
      }
      // operation/transfer compatibility
      bool compat_error = false;
      if (st.op.kind == OpKind::Wait && t.kind != Transfer::Kind::Next) {
        rep_.add("E604", "wait at '" + st.sid + "' must continue with a plain next",
                 st.sid, fn.name);
        compat_error = true;
      } else if (st.op.kind == OpKind::Cas && t.kind != Transfer::Kind::Branch) {
        rep_.add("E604", "cas at '" + st.sid + "' must branch on its outcome",
                 st.sid, fn.name);
        compat_error = true;
      } else if (t.kind == Transfer::Kind::Branch && st.op.kind != OpKind::Cas &&
                 st.op.kind != OpKind::Nop && st.op.kind != OpKind::Read &&
                 st.op.kind != OpKind::Load) {
        rep_.add("E604",
                 "branch at '" + st.sid + "' is not allowed on a " +
                     to_string(st.op.kind) + " operation",
                 st.sid, fn.name);
        compat_error = true;
      } else if (t.kind == Transfer::Kind::Switch && st.op.kind != OpKind::Nop &&
                 st.op.kind != OpKind::Read && st.op.kind != OpKind::Load) {
        rep_.add("E604",
                 "switch at '" + st.sid + "' is not allowed on a " +
                     to_string(st.op.kind) + " operation",
                 st.sid, fn.name);
        compat_error = true;
      }
      if (compat_error) a.structural_errors = true;
    }
    for (const auto& [idx, target] : a.cfg.dangling) {
      rep_.add("E601",
               "transfer at '" + fn.body[idx].sid + "' targets unknown sid '" +
                   target + "'",
               fn.body[idx].sid, fn.name);
      a.structural_errors = true;
    }
  }

  // --- per-operation scan: E101 / E103 / E3xx / E2xx -----------------------------
  void scan_operations(FnAnalysis& a) {
    const FunctionDef& fn = *a.fn;
    for (const auto& st : fn.body) {
      TypeChecker types(env_, rep_, st.sid, fn.name);
      scan_one(fn, st, types);
    }
  }

  const ResourceDecl* resolve_resource(const FunctionDef& fn, const Statement& st,
                                       const std::string& name) {
    const ResourceDecl* r = art_.find_resource(name);
    if (r == nullptr) {
      rep_.add("E101", "'" + name + "' is not a declared resource", st.sid, fn.name);
    }
    return r;
  }

  void scan_one(const FunctionDef& fn, const Statement& st, TypeChecker& types) {
    const Operation& op = st.op;
    switch (op.kind) {
      case OpKind::Lock: {
        const ResourceDecl* r = resolve_resource(fn, st, op.target);
        if (!r) break;
        if (r->kind == ResourceKind::RwLock) {
          rep_.add("E302",
                   "lock at '" + st.sid + "' targets RwLock '" + op.target +
                       "'; use read_lock or write_lock",
                   st.sid, fn.name);
        } else if (r->kind != ResourceKind::Mutex) {
          rep_.add("E301",
                   "lock at '" + st.sid + "' targets " + to_string(r->kind) + " '" +
                       op.target + "'",
                   st.sid, fn.name);
        }
        break;
      }
      case OpKind::Drop: {
        const ResourceDecl* r = resolve_resource(fn, st, op.target);
        if (r && r->kind != ResourceKind::Mutex && r->kind != ResourceKind::RwLock) {
          rep_.add("E301",
                   "drop at '" + st.sid + "' targets " + to_string(r->kind) + " '" +
                       op.target + "'",
                   st.sid, fn.name);
        }
        break;
      }
      case OpKind::ReadLock:
      case OpKind::WriteLock: {
        const ResourceDecl* r = resolve_resource(fn, st, op.target);
        if (r && r->kind != ResourceKind::RwLock) {
          rep_.add("E302",
                   to_string(op.kind) + " at '" + st.sid + "' targets " +
                       to_string(r->kind) + " '" + op.target + "'",
                   st.sid, fn.name);
        }
        break;
      }
      case OpKind::Wait: {
        const ResourceDecl* cv = resolve_resource(fn, st, op.target);
        const ResourceDecl* m = resolve_resource(fn, st, op.mutex_arg);
        if (cv && cv->kind != ResourceKind::Condvar) {
          rep_.add("E303",
                   "wait at '" + st.sid + "' targets " + to_string(cv->kind) + " '" +
                       op.target + "'",
                   st.sid, fn.name);
          cv = nullptr;
        }
        if (m && m->kind != ResourceKind::Mutex) {
          rep_.add("E301",
                   "wait at '" + st.sid + "' passes " + to_string(m->kind) + " '" +
                       op.mutex_arg + "' as its mutex",
                   st.sid, fn.name);
          m = nullptr;
        }
        if (cv && m && !cv->paired_with.empty() && cv->paired_with != op.mutex_arg) {
          rep_.add("E304",
                   "wait at '" + st.sid + "' uses '" + op.mutex_arg + "' but '" +
                       cv->name + "' is paired with '" + cv->paired_with + "'",
                   st.sid, fn.name);
        }
        break;
      }
      case OpKind::NotifyOne:
      case OpKind::NotifyAll: {
        const ResourceDecl* r = resolve_resource(fn, st, op.target);
        if (r && r->kind != ResourceKind::Condvar) {
          rep_.add("E303",
                   to_string(op.kind) + " at '" + st.sid + "' targets " +
                       to_string(r->kind) + " '" + op.target + "'",
                   st.sid, fn.name);
        }
        break;
      }
      case OpKind::Acquire:
      case OpKind::Release: {
        const ResourceDecl* r = resolve_resource(fn, st, op.target);
        if (r && r->kind != ResourceKind::Semaphore) {
          rep_.add("E305",
                   to_string(op.kind) + " at '" + st.sid + "' targets " +
                       to_string(r->kind) + " '" + op.target + "'",
                   st.sid, fn.name);
        }
        break;
      }
      case OpKind::Send:
      case OpKind::Recv: {
        const ResourceDecl* r = resolve_resource(fn, st, op.target);
        if (r && r->kind != ResourceKind::Channel) {
          rep_.add("E306",
                   to_string(op.kind) + " at '" + st.sid + "' targets " +
                       to_string(r->kind) + " '" + op.target + "'",
                   st.sid, fn.name);
        }
        break;
      }
      case OpKind::Read: {
        const ResourceDecl* r = resolve_resource(fn, st, op.target);
        if (r && r->kind != ResourceKind::Var) {
          rep_.add("E307",
                   "read at '" + st.sid + "' targets " + to_string(r->kind) + " '" +
                       op.target + "'",
                   st.sid, fn.name);
        }
        break;
      }
      case OpKind::Write: {
        const ResourceDecl* r = resolve_resource(fn, st, op.target);
        if (r && r->kind != ResourceKind::Var) {
          rep_.add("E307",
                   "write at '" + st.sid + "' targets " + to_string(r->kind) + " '" +
                       op.target + "'",
                   st.sid, fn.name);
          r = nullptr;
        }
        if (r) check_stored_value(fn, st, *r, *op.value, types, "E202");
        break;
      }
      case OpKind::Load: {
        const ResourceDecl* r = resolve_resource(fn, st, op.target);
        if (r && r->kind != ResourceKind::Atomic) {
          rep_.add("E308",
                   "load at '" + st.sid + "' targets " + to_string(r->kind) + " '" +
                       op.target + "'",
                   st.sid, fn.name);
        }
        break;
      }
      case OpKind::Store: {
        const ResourceDecl* r = resolve_resource(fn, st, op.target);
        if (r && r->kind != ResourceKind::Atomic) {
          rep_.add("E308",
                   "store at '" + st.sid + "' targets " + to_string(r->kind) + " '" +
                       op.target + "'",
                   st.sid, fn.name);
          r = nullptr;
        }
        if (r) check_stored_value(fn, st, *r, *op.value, types, "E202");
        break;
      }
      case OpKind::Cas: {
        const ResourceDecl* r = resolve_resource(fn, st, op.target);
        if (r && r->kind != ResourceKind::Atomic) {
          rep_.add("E308",
                   "cas at '" + st.sid + "' targets " + to_string(r->kind) + " '" +
                       op.target + "'",
                   st.sid, fn.name);
          r = nullptr;
        }
        if (r) {
          check_stored_value(fn, st, *r, *op.cas_expected, types, "E204");
          check_stored_value(fn, st, *r, *op.cas_new, types, "E204");
        }
        break;
      }
      case OpKind::Spawn:
      case OpKind::SpawnAsync:
      case OpKind::Join:
      case OpKind::Await: {
        const FunctionDef* f = art_.find_function(op.target);
        if (f == nullptr) {
          if (art_.find_summary(op.target) != nullptr) {
            rep_.add("E405",
                     to_string(op.kind) + " at '" + st.sid + "' targets '" +
                         op.target + "', which has only a summary and no body",
                     st.sid, fn.name);
          } else {
            rep_.add("E103",
                     to_string(op.kind) + " at '" + st.sid +
                         "' targets undefined function '" + op.target + "'",
                     st.sid, fn.name);
          }
        } else if (!art_.entry.empty() && op.target == art_.entry) {
          rep_.add("E406",
                   to_string(op.kind) + " at '" + st.sid +
                       "' targets the entry function",
                   st.sid, fn.name);
        }
        break;
      }
      case OpKind::Call: {
        if (art_.find_function(op.target) == nullptr &&
            art_.find_summary(op.target) == nullptr) {
          rep_.add("E103",
                   "call at '" + st.sid + "' targets undefined function '" +
                       op.target + "'",
                   st.sid, fn.name);
        }
        break;
      }
      case OpKind::Nop:
        break;
    }

    // transfer expressions
    const Transfer& t = st.transfer;
    if (t.kind == Transfer::Kind::Branch && t.cond) {
      types.check_condition(*t.cond);
    }
    if (t.kind == Transfer::Kind::Switch) {
      check_switch(fn, st, types);
    }
  }

  void check_stored_value(const FunctionDef& fn, const Statement& st,
                          const ResourceDecl& var, const Expr& e, TypeChecker& types,
                          const std::string& code) {
    auto ty = types.infer(e, code);
    if (!ty) return;
    if (*ty != var.value_type) {
      rep_.add(code,
               "value of type " + to_string(*ty) + " stored into " +
                   to_string(var.value_type) + " '" + var.name + "'",
               st.sid, fn.name);
      return;
    }
    if (var.value_type == BaseType::Enum) {
      if (const auto* lit = std::get_if<Expr::Lit>(&e.node)) {
        const auto& name = std::get<Value::EnumV>(lit->value.v).name;
        if (std::find(var.enum_values.begin(), var.enum_values.end(), name) ==
            var.enum_values.end()) {
          rep_.add(code,
                   "'" + name + "' is not a value of enum '" + var.name + "'",
                   st.sid, fn.name);
        }
      }
    }
  }

  void check_switch(const FunctionDef& fn, const Statement& st, TypeChecker& types) {
    const Transfer& t = st.transfer;
    NameInfo info = env_.lookup(t.switch_var);
    if (info.kind != NameInfo::StoreVar) {
      rep_.add("E110",
               "switch at '" + st.sid + "' selects on undefined variable '" +
                   t.switch_var + "'",
               st.sid, fn.name);
      return;
    }
    (void)types;
    std::set<std::string> seen_arms;
    for (const auto& [value, _] : t.arms) {
      if (!seen_arms.insert(to_string(value)).second) {
        rep_.add("E203", "duplicate switch arm " + to_string(value) + " at '" +
                             st.sid + "'",
                 st.sid, fn.name);
        continue;
      }
      if (value.type() != info.type) {
        rep_.add("E203",
                 "switch arm " + to_string(value) + " does not match " +
                     to_string(info.type) + " '" + t.switch_var + "'",
                 st.sid, fn.name);
        continue;
      }
      if (info.type == BaseType::Enum) {
        const auto& name = std::get<Value::EnumV>(value.v).name;
        const auto& vals = info.decl->enum_values;
        if (std::find(vals.begin(), vals.end(), name) == vals.end()) {
          rep_.add("E203",
                   "'" + name + "' is not a value of enum '" + t.switch_var + "'",
                   st.sid, fn.name);
        }
      }
    }
  }

  // --- spawn/join pairing, E401..E404 -----------------------------------------
  void check_thread_pairing() {
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> spawns;
    for (const auto& fn : art_.functions) {
      std::set<std::string> spawned, joined, spawned_async, awaited;
      for (const auto& st : fn.body) {
        switch (st.op.kind) {
          case OpKind::Spawn:
            spawned.insert(st.op.target);
            spawns[st.op.target].emplace_back(st.sid, fn.name);
            break;
          case OpKind::SpawnAsync:
            spawned_async.insert(st.op.target);
            spawns[st.op.target].emplace_back(st.sid, fn.name);
            break;
          case OpKind::Join:
            joined.insert(st.op.target);
            break;
          case OpKind::Await:
            awaited.insert(st.op.target);
            break;
          default:
            break;
        }
      }
      if (!fn.synthetic) {
        for (const auto& st : fn.body) {
          if (st.op.kind == OpKind::Spawn && !joined.count(st.op.target)) {
            rep_.add("E401",
                     "spawn of '" + st.op.target + "' at '" + st.sid +
                         "' has no matching join in '" + fn.name + "'",
                     st.sid, fn.name);
          }
          if (st.op.kind == OpKind::SpawnAsync && !awaited.count(st.op.target)) {
            rep_.add("E401",
                     "spawn_async of '" + st.op.target + "' at '" + st.sid +
                         "' has no matching await in '" + fn.name + "'",
                     st.sid, fn.name);
          }
          if (st.op.kind == OpKind::Join && !spawned.count(st.op.target)) {
            rep_.add("E403",
                     "join of '" + st.op.target + "' at '" + st.sid +
                         "' has no prior spawn in '" + fn.name + "'",
                     st.sid, fn.name);
          }
          if (st.op.kind == OpKind::Await && !spawned_async.count(st.op.target)) {
            rep_.add("E403",
                     "await of '" + st.op.target + "' at '" + st.sid +
                         "' has no prior spawn_async in '" + fn.name + "'",
                     st.sid, fn.name);
          }
        }
      }
    }
    for (const auto& [target, sites] : spawns) {
      if (sites.size() > 1) {
        for (size_t i = 1; i < sites.size(); ++i) {
          rep_.add("E404",
                   "'" + target + "' is spawned more than once; extra spawn at '" +
                       sites[i].first + "'",
                   sites[i].first, sites[i].second);
        }
      }
    }
    // spawn inside a loop
    for (auto& a : analyses_) {
      if (a.structural_errors) continue;
      const FunctionDef& fn = *a.fn;
      for (size_t i = 0; i < fn.body.size(); ++i) {
        if ((fn.body[i].op.kind == OpKind::Spawn ||
             fn.body[i].op.kind == OpKind::SpawnAsync) &&
            a.cfg.reachable[i] && a.cfg.on_cycle(i)) {
          rep_.add("E402",
                   "spawn at '" + fn.body[i].sid + "' sits on a control-flow loop",
                   fn.body[i].sid, fn.name);
        }
      }
    }
  }

  // --- control flow, E602 / E603 ------------------------------------------------
  void check_control(FnAnalysis& a) {
    const FunctionDef& fn = *a.fn;
    bool any_return = false;
    for (size_t i = 0; i < fn.body.size(); ++i) {
      if (!a.cfg.reachable[i]) {
        rep_.add("E602", "statement '" + fn.body[i].sid + "' is unreachable",
                 fn.body[i].sid, fn.name);
      } else if (fn.body[i].transfer.kind == Transfer::Kind::Return) {
        any_return = true;
      }
    }
    if (!any_return && !fn.body.empty()) {
      rep_.add("E603", "no return is reachable from the entry of '" + fn.name + "'",
               fn.name, fn.name);
    }
  }

  // --- lock discipline, E5xx + E310 ----------------------------------------------
  void check_locks(FnAnalysis& a) {
    const FunctionDef& fn = *a.fn;
    std::set<std::string> all_locks;
    for (const auto& r : art_.resources) {
      if (is_lock_kind(r.kind)) all_locks.insert(r.name);
    }
    LockFlow flow = lock_dataflow(fn, a.cfg, all_locks);

    for (size_t i = 0; i < fn.body.size(); ++i) {
      if (!a.cfg.reachable[i]) continue;
      const Statement& st = fn.body[i];
      const HeldState& in = flow.in[i];
      switch (st.op.kind) {
        case OpKind::Lock:
        case OpKind::ReadLock:
        case OpKind::WriteLock:
          if (in.may.count(st.op.target)) {
            rep_.add("E503",
                     "'" + st.op.target + "' may already be held when re-acquired at '" +
                         st.sid + "'",
                     st.sid, fn.name);
          }
          break;
        case OpKind::Drop: {
          auto it = in.may.find(st.op.target);
          if (it == in.may.end()) {
            rep_.add("E504",
                     "drop at '" + st.sid + "' releases '" + st.op.target +
                         "', which is not held",
                     st.sid, fn.name);
          } else if (it->second.count(LockMode::Read) &&
                     it->second.count(LockMode::Write)) {
            rep_.add("E505",
                     "drop at '" + st.sid + "' cannot decide between read and "
                     "write acquisition of '" + st.op.target + "'",
                     st.sid, fn.name);
          }
          break;
        }
        case OpKind::Wait:
          if (!in.must.count(st.op.mutex_arg)) {
            rep_.add("E506",
                     "wait at '" + st.sid + "' does not hold mutex '" +
                         st.op.mutex_arg + "'",
                     st.sid, fn.name);
          }
          break;
        case OpKind::Read:
        case OpKind::Write: {
          if (!valid_protection_.count(st.op.target)) break;
          const auto* locks = art_.protection_of(st.op.target);
          if (locks == nullptr) break;
          std::vector<std::string> missing;
          for (const auto& l : *locks) {
            if (!in.must.count(l)) missing.push_back(l);
          }
          if (!missing.empty()) {
            std::string list;
            for (size_t k = 0; k < missing.size(); ++k) {
              if (k) list += ", ";
              list += "'" + missing[k] + "'";
            }
            rep_.add("E310",
                     to_string(st.op.kind) + " of protected '" + st.op.target +
                         "' at '" + st.sid + "' without holding " + list,
                     st.sid, fn.name);
          }
          break;
        }
        default:
          break;
      }
    }

    for (const auto& [idx, lock] : exit_leaks(fn, a.cfg, flow)) {
      rep_.add("E501",
               "lock '" + lock + "' is still held when '" + fn.name +
                   "' returns at '" + fn.body[idx].sid + "'",
               fn.body[idx].sid, fn.name);
    }
    // held on some paths into an exit, but not all
    for (size_t i = 0; i < fn.body.size(); ++i) {
      if (!a.cfg.reachable[i]) continue;
      if (fn.body[i].transfer.kind != Transfer::Kind::Return) continue;
      for (const auto& [lock, _] : flow.out[i].may) {
        if (!flow.out[i].must.count(lock)) {
          rep_.add("E507",
                   "lock '" + lock + "' is held on some paths reaching the exit "
                   "at '" + fn.body[i].sid + "' but not on all",
                   fn.body[i].sid, fn.name);
        }
      }
    }
  }

  // --- summaries, E8xx -------------------------------------------------------
  void check_summaries() {
    for (const auto& s : art_.summaries) {
      for (const auto& name : s.reads) {
        if (env_.lookup(name).kind != NameInfo::StoreVar) {
          rep_.add("E806",
                   "summary '" + s.name + "' reads undeclared variable '" + name + "'",
                   s.name, "");
        }
      }
      for (const auto& name : s.writes) {
        if (env_.lookup(name).kind != NameInfo::StoreVar) {
          rep_.add("E806",
                   "summary '" + s.name + "' writes undeclared variable '" + name + "'",
                   s.name, "");
        }
      }
      for (const auto& name : s.calls) {
        if (art_.find_function(name) == nullptr &&
            art_.find_summary(name) == nullptr) {
          rep_.add("E806",
                   "summary '" + s.name + "' calls undefined function '" + name + "'",
                   s.name, "");
        }
      }
      const FunctionDef* fn = art_.find_function(s.name);
      if (fn == nullptr || fn->body.empty()) continue;
      compare_summary(s, *fn);
    }
  }

  void compare_summary(const FunctionSummary& s, const FunctionDef& fn) {
    std::set<std::string> body_reads, body_writes, body_calls;
    bool concurrency = false;
    auto note_refs = [&](const std::set<std::string>& refs) {
      for (const auto& name : refs) {
        if (env_.lookup(name).kind == NameInfo::StoreVar) body_reads.insert(name);
      }
    };
    for (const auto& st : fn.body) {
      const Operation& op = st.op;
      if (concurrency_relevant(op.kind)) concurrency = true;
      switch (op.kind) {
        case OpKind::Read:
        case OpKind::Load:
          body_reads.insert(op.target);
          break;
        case OpKind::Write:
        case OpKind::Store: {
          body_writes.insert(op.target);
          std::set<std::string> refs;
          collect_expr_refs(*op.value, refs);
          note_refs(refs);
          break;
        }
        case OpKind::Cas: {
          body_reads.insert(op.target);
          body_writes.insert(op.target);
          std::set<std::string> refs;
          collect_expr_refs(*op.cas_expected, refs);
          collect_expr_refs(*op.cas_new, refs);
          note_refs(refs);
          break;
        }
        case OpKind::Call:
          body_calls.insert(op.target);
          break;
        default:
          break;
      }
      if (st.transfer.kind == Transfer::Kind::Branch && st.transfer.cond) {
        std::set<std::string> refs;
        collect_bool_refs(*st.transfer.cond, refs);
        note_refs(refs);
      }
      if (st.transfer.kind == Transfer::Kind::Switch) {
        if (env_.lookup(st.transfer.switch_var).kind == NameInfo::StoreVar) {
          body_reads.insert(st.transfer.switch_var);
        }
      }
    }
    std::set<std::string> sum_reads(s.reads.begin(), s.reads.end());
    std::set<std::string> sum_writes(s.writes.begin(), s.writes.end());
    std::set<std::string> sum_calls(s.calls.begin(), s.calls.end());
    for (const auto& w : body_writes) {
      if (!sum_writes.count(w)) {
        rep_.add("E801",
                 "body of '" + s.name + "' writes '" + w +
                     "' but the summary does not list it",
                 s.name, s.name);
      }
    }
    for (const auto& w : sum_writes) {
      if (env_.lookup(w).kind == NameInfo::StoreVar && !body_writes.count(w)) {
        rep_.add("E802",
                 "summary of '" + s.name + "' lists write of '" + w +
                     "' but the body never writes it",
                 s.name, s.name);
      }
    }
    for (const auto& r : body_reads) {
      if (!sum_reads.count(r)) {
        rep_.add("E803",
                 "body of '" + s.name + "' reads '" + r +
                     "' but the summary does not list it",
                 s.name, s.name);
      }
    }
    for (const auto& r : sum_reads) {
      if (env_.lookup(r).kind == NameInfo::StoreVar && !body_reads.count(r)) {
        rep_.add("E803",
                 "summary of '" + s.name + "' lists read of '" + r +
                     "' but the body never reads it",
                 s.name, s.name);
      }
    }
    for (const auto& c : body_calls) {
      if (!sum_calls.count(c)) {
        rep_.add("E804",
                 "body of '" + s.name + "' calls '" + c +
                     "' but the summary does not list it",
                 s.name, s.name);
      }
    }
    for (const auto& c : sum_calls) {
      if (!body_calls.count(c)) {
        rep_.add("E804",
                 "summary of '" + s.name + "' lists call of '" + c +
                     "' but the body never calls it",
                 s.name, s.name);
      }
    }
    if (s.has_concurrency != concurrency) {
      rep_.add("E805",
               "summary of '" + s.name + "' sets has_concurrency to " +
                   (s.has_concurrency ? "true" : "false") +
                   " but the body disagrees",
               s.name, s.name);
    }
  }

  // --- goals, E108 / E109 / E205 ----------------------------------------------
  void check_goals() {
    for (const auto& g : art_.goals) {
      for (const auto& f : g.completion) {
        const FunctionDef* fn = art_.find_function(f);
        if (fn == nullptr) {
          rep_.add("E108",
                   "goal '" + g.id + "' requires completion of undefined function '" +
                       f + "'",
                   g.id, "");
        }
      }
      for (const auto& r : g.availability) {
        const ResourceDecl* res = art_.find_resource(r);
        if (res == nullptr) {
          rep_.add("E108",
                   "goal '" + g.id + "' requires availability of undeclared "
                   "resource '" + r + "'",
                   g.id, "");
          continue;
        }
        switch (res->kind) {
          case ResourceKind::Mutex:
          case ResourceKind::RwLock:
          case ResourceKind::Semaphore:
          case ResourceKind::Channel:
            break;
          default:
            rep_.add("E109",
                     "goal '" + g.id + "' requires availability of " +
                         to_string(res->kind) + " '" + r +
                         "', which has no token pool",
                     g.id, "");
        }
      }
      for (const auto& [var, value] : g.variables) {
        NameInfo info = env_.lookup(var);
        if (info.kind != NameInfo::StoreVar) {
          rep_.add("E108",
                   "goal '" + g.id + "' constrains '" + var +
                       "', which is not a store variable",
                   g.id, "");
          continue;
        }
        if (value.is_top() || value.type() != info.type) {
          rep_.add("E205",
                   "goal '" + g.id + "' expects " +
                       (value.is_top() ? std::string("an unknown value")
                                       : to_string(value.type())) +
                       " for " + to_string(info.type) + " '" + var + "'",
                   g.id, "");
          continue;
        }
        if (info.type == BaseType::Enum) {
          const auto& name = std::get<Value::EnumV>(value.v).name;
          const auto& vals = info.decl->enum_values;
          if (std::find(vals.begin(), vals.end(), name) == vals.end()) {
            rep_.add("E205",
                     "goal '" + g.id + "' uses '" + name +
                         "', which is not a value of enum '" + var + "'",
                     g.id, "");
          }
        }
      }
    }
  }

  const CirArtifact& art_;
  Env env_;
  std::vector<Finding> findings_;
  Reporter rep_;
  std::vector<FnAnalysis> analyses_;
  std::set<std::string> valid_protection_;
};

// ---------------------------------------------------------------------------
// autofixes

// Renames later occurrences of duplicated sids. Within the function holding a
// renamed occurrence, transfer targets between that occurrence and the next
// local occurrence of the same sid are redirected to the new name; targets
// before the first renamed occurrence keep pointing at the first definition.
std::vector<Finding> fix_duplicate_sids(CirArtifact& art) {
  std::vector<Finding> applied;
  std::set<std::string> seen;
  for (auto& fn : art.functions) {
    // positions of each base sid within this function
    std::map<std::string, std::vector<size_t>> local;
    for (size_t i = 0; i < fn.body.size(); ++i) {
      local[fn.body[i].sid].push_back(i);
    }
    struct Rename {
      size_t from;  // window start (inclusive)
      size_t to;    // window end (exclusive)
      std::string old_name, new_name;
    };
    std::vector<Rename> renames;
    auto fresh = [&](const std::string& base) {
      for (int k = 1;; ++k) {
        std::string cand = base + "__" + std::to_string(k);
        bool taken = seen.count(cand) > 0;
        for (const auto& f2 : art.functions) {
          if (taken) break;
          taken = f2.find_statement(cand) != nullptr;
        }
        if (!taken) return cand;
      }
    };
    for (size_t i = 0; i < fn.body.size(); ++i) {
      std::string base = fn.body[i].sid;
      if (seen.insert(base).second) continue;
      std::string renamed = fresh(base);
      const auto& occ = local[base];
      auto it = std::find(occ.begin(), occ.end(), i);
      size_t window_start = (it == occ.begin()) ? 0 : i;
      size_t window_end = (it + 1 != occ.end()) ? *(it + 1) : fn.body.size();
      renames.push_back({window_start, window_end, base, renamed});
      Finding f;
      f.code = "E102";
      f.message = "duplicate statement id '" + base + "' renamed to '" + renamed + "'";
      f.anchor = base;
      f.function_name = fn.name;
      f.autofixable = true;
      applied.push_back(std::move(f));
      fn.body[i].sid = renamed;
      seen.insert(renamed);
    }
    for (const auto& r : renames) {
      for (size_t i = r.from; i < r.to; ++i) {
        Transfer& t = fn.body[i].transfer;
        auto fix = [&](std::string& target) {
          if (target == r.old_name) target = r.new_name;
        };
        fix(t.next);
        fix(t.on_true);
        fix(t.on_false);
        for (auto& [_, sid] : t.arms) fix(sid);
        fix(t.switch_default);
      }
    }
  }
  return applied;
}

std::vector<Finding> fix_omitted_transfers(CirArtifact& art) {
  std::vector<Finding> applied;
  for (auto& fn : art.functions) {
    for (size_t i = 0; i < fn.body.size(); ++i) {
      if (fn.body[i].transfer.kind != Transfer::Kind::Omitted) continue;
      fn.body[i].transfer = (i + 1 < fn.body.size())
                                ? Transfer::to(fn.body[i + 1].sid)
                                : Transfer::ret();
      Finding f;
      f.code = "E001";
      f.message = "statement '" + fn.body[i].sid + "' has no transfer; linked to " +
                  (i + 1 < fn.body.size() ? "'" + fn.body[i + 1].sid + "'"
                                          : std::string("return"));
      f.anchor = fn.body[i].sid;
      f.function_name = fn.name;
      f.autofixable = true;
      applied.push_back(std::move(f));
    }
  }
  return applied;
}

std::vector<Finding> fix_exit_leaks(CirArtifact& art) {
  std::vector<Finding> applied;
  std::set<std::string> all_locks;
  for (const auto& r : art.resources) {
    if (is_lock_kind(r.kind)) all_locks.insert(r.name);
  }
  for (auto& fn : art.functions) {
    Cfg cfg(fn);
    if (cfg.has_duplicate_sids || !cfg.dangling.empty()) continue;
    bool structural = fn.body.empty();
    for (const auto& st : fn.body) {
      if (st.transfer.kind == Transfer::Kind::Omitted) structural = true;
    }
    if (structural) continue;
    LockFlow flow = lock_dataflow(fn, cfg, all_locks);
    auto leaks = exit_leaks(fn, cfg, flow);
    if (leaks.empty()) continue;

    // group by exit statement, keep lock order deterministic
    std::map<size_t, std::vector<std::string>> by_exit;
    for (const auto& [idx, lock] : leaks) by_exit[idx].push_back(lock);

    // insert from the back so recorded indices stay valid
    for (auto it = by_exit.rbegin(); it != by_exit.rend(); ++it) {
      size_t idx = it->first;
      std::vector<std::string>& locks = it->second;
      std::sort(locks.begin(), locks.end());
      const std::string base = fn.body[idx].sid;
      // find a suffix start that keeps every inserted sid fresh
      int start = 0;
      auto taken = [&](const std::string& sid) {
        for (const auto& f2 : art.functions) {
          if (f2.find_statement(sid) != nullptr) return true;
        }
        return false;
      };
      for (bool ok = false; !ok; ++start) {
        ok = true;
        for (size_t k = 0; k < locks.size(); ++k) {
          if (taken(base + "_fix" + std::to_string(start + static_cast<int>(k)))) {
            ok = false;
            break;
          }
        }
        if (ok) break;
      }
      std::vector<Statement> drops;
      for (size_t k = 0; k < locks.size(); ++k) {
        Statement d;
        d.sid = base + "_fix" + std::to_string(start + static_cast<int>(k));
        d.op.kind = OpKind::Drop;
        d.op.target = locks[k];
        d.transfer = (k + 1 == locks.size())
                         ? Transfer::ret()
                         : Transfer::to(base + "_fix" +
                                        std::to_string(start + static_cast<int>(k) + 1));
        drops.push_back(std::move(d));
      }
      fn.body[idx].transfer = Transfer::to(drops.front().sid);
      fn.body.insert(fn.body.begin() + static_cast<std::ptrdiff_t>(idx) + 1,
                     drops.begin(), drops.end());
      for (const auto& l : locks) {
        Finding f;
        f.code = "E501";
        f.message = "lock '" + l + "' is still held when '" + fn.name +
                    "' returns at '" + base + "'; drop inserted";
        f.anchor = base;
        f.function_name = fn.name;
        f.autofixable = true;
        applied.push_back(std::move(f));
      }
    }
  }
  return applied;
}

}  // namespace

const std::vector<RuleInfo>& rule_catalogue() { return catalogue(); }

CheckResult check_artifact(const CirArtifact& artifact) {
  Checker checker(artifact);
  CheckResult result;
  result.findings = checker.run();
  return result;
}

FixResult apply_autofixes(const CirArtifact& artifact) {
  FixResult result;
  result.artifact = artifact;
  auto a = fix_duplicate_sids(result.artifact);
  auto b = fix_omitted_transfers(result.artifact);
  auto c = fix_exit_leaks(result.artifact);
  result.applied.insert(result.applied.end(), a.begin(), a.end());
  result.applied.insert(result.applied.end(), b.begin(), b.end());
  result.applied.insert(result.applied.end(), c.begin(), c.end());
  result.remaining = check_artifact(result.artifact).findings;
  return result;
}

}  // namespace cvnverify
