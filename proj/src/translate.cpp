#include <map>
#include <set>
#include <stdexcept>

#include "cvnverify/translate.hpp"

namespace cvnverify {

std::string control_place_name(const std::string& fn, const std::string& sid) {
  return "cp(" + fn + "," + sid + ")";
}
std::string return_place_name(const std::string& fn) {
  return "cp(" + fn + ",ret)";
}
std::string resource_place_name(const std::string& resource) {
  return "rp(" + resource + ")";
}
std::string wait_place_name(const std::string& sid) { return "wp(" + sid + ")"; }
std::string reacquire_place_name(const std::string& sid) {
  return "ra(" + sid + ")";
}
std::string waiter_count_var(const std::string& cv) { return "nw(" + cv + ")"; }
std::string notify_all_flag_var(const std::string& sid) {
  return "na(" + sid + ")";
}

namespace {

// Rewrites bare references that name declared enum values into literals;
// references to store variables stay symbolic.
Expr resolve_enum_refs(const Expr& e, const CirArtifact& art) {
  if (const auto* ref = std::get_if<Expr::Ref>(&e.node)) {
    const ResourceDecl* r = art.find_resource(ref->name);
    if (r != nullptr &&
        (r->kind == ResourceKind::Var || r->kind == ResourceKind::Atomic)) {
      return e;
    }
    for (const auto& res : art.resources) {
      for (const auto& v : res.enum_values) {
        if (v == ref->name) return Expr::lit(Value::enumerator(ref->name));
      }
    }
    return e;
  }
  if (const auto* bin = std::get_if<Expr::Bin>(&e.node)) {
    return Expr::bin(bin->op, resolve_enum_refs(*bin->lhs, art),
                     resolve_enum_refs(*bin->rhs, art));
  }
  return e;
}

BoolExpr resolve_enum_refs(const BoolExpr& b, const CirArtifact& art) {
  if (const auto* c = std::get_if<BoolExpr::Cmp>(&b.node)) {
    return BoolExpr::cmp(c->op, resolve_enum_refs(c->lhs, art),
                         resolve_enum_refs(c->rhs, art));
  }
  if (const auto* a = std::get_if<BoolExpr::And>(&b.node)) {
    return BoolExpr::conj(resolve_enum_refs(*a->lhs, art),
                          resolve_enum_refs(*a->rhs, art));
  }
  if (const auto* o = std::get_if<BoolExpr::Or>(&b.node)) {
    return BoolExpr::disj(resolve_enum_refs(*o->lhs, art),
                          resolve_enum_refs(*o->rhs, art));
  }
  if (const auto* n = std::get_if<BoolExpr::Not>(&b.node)) {
    return BoolExpr::negate(resolve_enum_refs(*n->arg, art));
  }
  return b;
}

// Which acquisition mode reaches each RwLock drop. The checker guarantees the
// answer is unique; a simple forward pass suffices.
enum class RwMode { Read, Write };

std::map<std::string, RwMode> rwlock_drop_modes(const FunctionDef& fn,
                                                const CirArtifact& art) {
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < fn.body.size(); ++i) index.emplace(fn.body[i].sid, i);

  auto successors = [&](const Statement& st) {
    std::vector<size_t> out;
    const Transfer& t = st.transfer;
    auto push = [&](const std::string& sid) {
      auto it = index.find(sid);
      if (it != index.end()) out.push_back(it->second);
    };
    switch (t.kind) {
      case Transfer::Kind::Next: push(t.next); break;
      case Transfer::Kind::Branch:
        push(t.on_true);
        push(t.on_false);
        break;
      case Transfer::Kind::Switch:
        for (const auto& [_, sid] : t.arms) push(sid);
        push(t.switch_default);
        break;
      default:
        break;
    }
    return out;
  };

  std::map<std::string, RwMode> result;
  std::vector<std::map<std::string, RwMode>> state(fn.body.size());
  std::vector<char> seen(fn.body.size(), 0);
  if (fn.body.empty()) return result;
  std::vector<size_t> work{0};
  seen[0] = 1;
  while (!work.empty()) {
    size_t i = work.back();
    work.pop_back();
    const Statement& st = fn.body[i];
    std::map<std::string, RwMode> after = state[i];
    const ResourceDecl* r = art.find_resource(st.op.target);
    bool is_rw = r != nullptr && r->kind == ResourceKind::RwLock;
    if (st.op.kind == OpKind::ReadLock && is_rw) {
      after[st.op.target] = RwMode::Read;
    } else if (st.op.kind == OpKind::WriteLock && is_rw) {
      after[st.op.target] = RwMode::Write;
    } else if (st.op.kind == OpKind::Drop && is_rw) {
      auto it = after.find(st.op.target);
      if (it != after.end()) {
        result.emplace(st.sid, it->second);
        after.erase(it);
      }
    }
    for (size_t j : successors(st)) {
      if (!seen[j]) {
        seen[j] = 1;
        state[j] = after;
        work.push_back(j);
      }
    }
  }
  return result;
}

class Translator {
 public:
  explicit Translator(const CirArtifact& art) : art_(art) {}

  Cvn run() {
    count_threads();
    collect_wait_sites();
    build_places();
    build_valuation();
    for (const auto& fn : art_.functions) {
      build_transitions(fn);
    }
    net_.initial_marking.assign(net_.places.size(), 0);
    for (const auto& [id, count] : initial_tokens_) {
      net_.initial_marking[static_cast<size_t>(id)] = count;
    }
    return std::move(net_);
  }

 private:
  void count_threads() {
    int spawns = 0;
    for (const auto& fn : art_.functions) {
      for (const auto& st : fn.body) {
        if (st.op.kind == OpKind::Spawn || st.op.kind == OpKind::SpawnAsync) {
          ++spawns;
        }
      }
    }
    net_.thread_bound = 1 + spawns;
  }

  void collect_wait_sites() {
    for (const auto& fn : art_.functions) {
      for (const auto& st : fn.body) {
        if (st.op.kind == OpKind::Wait) {
          wait_sites_[st.op.target].push_back(st.sid);
        }
      }
    }
  }

  int add_place(const std::string& name, PlaceKind kind, const std::string& fn,
                const std::string& sid, const std::string& resource) {
    Place p;
    p.id = static_cast<int>(net_.places.size());
    p.name = name;
    p.kind = kind;
    p.function = fn;
    p.sid = sid;
    p.resource = resource;
    net_.places.push_back(std::move(p));
    return net_.places.back().id;
  }

  void build_places() {
    for (const auto& r : art_.resources) {
      switch (r.kind) {
        case ResourceKind::Mutex:
          initial_tokens_[add_place(resource_place_name(r.name), PlaceKind::Resource,
                                    "", "", r.name)] = 1;
          break;
        case ResourceKind::RwLock:
          initial_tokens_[add_place(resource_place_name(r.name), PlaceKind::Resource,
                                    "", "", r.name)] = net_.thread_bound;
          break;
        case ResourceKind::Semaphore:
          initial_tokens_[add_place(resource_place_name(r.name), PlaceKind::Resource,
                                    "", "", r.name)] = r.initial_count;
          break;
        case ResourceKind::Channel:
          initial_tokens_[add_place(resource_place_name(r.name), PlaceKind::Resource,
                                    "", "", r.name)] = r.initial_count;
          break;
        case ResourceKind::Condvar:
          add_place(resource_place_name(r.name), PlaceKind::Resource, "", "", r.name);
          break;
        case ResourceKind::Var:
        case ResourceKind::Atomic:
          break;
      }
    }
    for (const auto& fn : art_.functions) {
      for (const auto& st : fn.body) {
        add_place(control_place_name(fn.name, st.sid), PlaceKind::Control, fn.name,
                  st.sid, "");
        if (st.op.kind == OpKind::Wait) {
          add_place(wait_place_name(st.sid), PlaceKind::Wait, fn.name, st.sid, "");
          add_place(reacquire_place_name(st.sid), PlaceKind::Reacquire, fn.name,
                    st.sid, "");
        }
      }
      add_place(return_place_name(fn.name), PlaceKind::Return, fn.name, "", "");
    }
    const FunctionDef* entry = art_.find_function(art_.entry);
    if (entry == nullptr || entry->body.empty()) {
      throw std::logic_error("translate_artifact requires a checked artifact");
    }
    initial_tokens_[place(control_place_name(entry->name, entry->body[0].sid))] = 1;
  }

  void build_valuation() {
    for (const auto& r : art_.resources) {
      if (r.kind == ResourceKind::Var || r.kind == ResourceKind::Atomic) {
        net_.initial_valuation[r.name] = r.init;
      } else if (r.kind == ResourceKind::Condvar) {
        net_.initial_valuation[waiter_count_var(r.name)] = Value::integer(0);
      }
    }
    for (const auto& [cv, sites] : wait_sites_) {
      for (const auto& sid : sites) {
        net_.initial_valuation[notify_all_flag_var(sid)] = Value::boolean(false);
      }
    }
  }

  int place(const std::string& name) const {
    int id = net_.place_id(name);
    if (id < 0) throw std::logic_error("missing place " + name);
    return id;
  }

  Transition& add_transition(const std::string& sid, const std::string& fn,
                             const std::string& suffix, TransitionTag tag) {
    Transition t;
    t.id = static_cast<int>(net_.transitions.size());
    t.name = sid + ":" + suffix;
    t.anchor = sid;
    t.function = fn;
    t.tag = tag;
    t.hidden = hidden_sids_.count(sid) > 0;
    net_.transitions.push_back(std::move(t));
    return net_.transitions.back();
  }

  // control place the statement's single successor maps to
  int succ_place(const FunctionDef& fn, const Statement& st) const {
    if (st.transfer.kind == Transfer::Kind::Return) {
      return place(return_place_name(fn.name));
    }
    return place(control_place_name(fn.name, st.transfer.next));
  }

  void build_transitions(const FunctionDef& fn) {
    if (fn.synthetic) {
      for (const auto& st : fn.body) hidden_sids_.insert(st.sid);
    }
    auto drop_modes = rwlock_drop_modes(fn, art_);
    for (const auto& st : fn.body) {
      translate_statement(fn, st, drop_modes);
    }
  }

  void translate_statement(const FunctionDef& fn, const Statement& st,
                           const std::map<std::string, RwMode>& drop_modes) {
    const int self = place(control_place_name(fn.name, st.sid));
    const Operation& op = st.op;

    // branch and switch transfers pair only with effect-free operations, so
    // they are handled before the operation dispatch
    if (st.transfer.kind == Transfer::Kind::Branch && op.kind != OpKind::Cas) {
      BoolExpr cond = resolve_enum_refs(*st.transfer.cond, art_);
      Transition& tt = add_transition(st.sid, fn.name, "branch_true",
                                      TransitionTag::BranchTrue);
      tt.inputs = {{self, 1}};
      tt.outputs = {{place(control_place_name(fn.name, st.transfer.on_true)), 1}};
      tt.guard = cond;
      Transition& tf = add_transition(st.sid, fn.name, "branch_false",
                                      TransitionTag::BranchFalse);
      tf.inputs = {{self, 1}};
      tf.outputs = {{place(control_place_name(fn.name, st.transfer.on_false)), 1}};
      tf.guard = BoolExpr::negate(std::move(cond));
      return;
    }
    if (st.transfer.kind == Transfer::Kind::Switch) {
      Expr selector = Expr::ref(st.transfer.switch_var);
      std::optional<BoolExpr> none_match;
      for (size_t i = 0; i < st.transfer.arms.size(); ++i) {
        const auto& [value, target] = st.transfer.arms[i];
        Transition& ta = add_transition(st.sid, fn.name, "arm" + std::to_string(i),
                                        TransitionTag::SwitchArm);
        ta.inputs = {{self, 1}};
        ta.outputs = {{place(control_place_name(fn.name, target)), 1}};
        ta.guard = BoolExpr::cmp(CmpOp::Eq, selector, Expr::lit(value));
        BoolExpr miss = BoolExpr::cmp(CmpOp::Ne, selector, Expr::lit(value));
        none_match = none_match ? BoolExpr::conj(std::move(*none_match), std::move(miss))
                                : std::move(miss);
      }
      Transition& td = add_transition(st.sid, fn.name, "default",
                                      TransitionTag::SwitchDefault);
      td.inputs = {{self, 1}};
      td.outputs = {{place(control_place_name(fn.name, st.transfer.switch_default)), 1}};
      td.guard = std::move(none_match);
      return;
    }

    const bool returns = st.transfer.kind == Transfer::Kind::Return;
    // a cas arrives with a branch transfer and resolves its own successors
    const int succ = st.transfer.kind == Transfer::Kind::Branch
                         ? -1
                         : succ_place(fn, st);

    switch (op.kind) {
      case OpKind::Lock:
      case OpKind::Acquire: {
        Transition& t = add_transition(
            st.sid, fn.name, op.kind == OpKind::Lock ? "lock" : "acquire",
            op.kind == OpKind::Lock ? TransitionTag::Lock : TransitionTag::Acquire);
        t.inputs = {{self, 1}, {place(resource_place_name(op.target)), 1}};
        t.outputs = {{succ, 1}};
        break;
      }
      case OpKind::Release: {
        Transition& t = add_transition(st.sid, fn.name, "release",
                                       TransitionTag::Release);
        t.inputs = {{self, 1}};
        t.outputs = {{succ, 1}, {place(resource_place_name(op.target)), 1}};
        break;
      }
      case OpKind::Drop: {
        const ResourceDecl* r = art_.find_resource(op.target);
        int weight = 1;
        TransitionTag tag = TransitionTag::Unlock;
        std::string suffix = "unlock";
        if (r != nullptr && r->kind == ResourceKind::RwLock) {
          auto it = drop_modes.find(st.sid);
          bool write_mode = it != drop_modes.end() && it->second == RwMode::Write;
          weight = write_mode ? net_.thread_bound : 1;
          tag = write_mode ? TransitionTag::WriteUnlock : TransitionTag::ReadUnlock;
          suffix = write_mode ? "write_unlock" : "read_unlock";
        }
        Transition& t = add_transition(st.sid, fn.name, suffix, tag);
        t.inputs = {{self, 1}};
        t.outputs = {{succ, 1}, {place(resource_place_name(op.target)), weight}};
        break;
      }
      case OpKind::ReadLock: {
        Transition& t = add_transition(st.sid, fn.name, "read_lock",
                                       TransitionTag::ReadLock);
        t.inputs = {{self, 1}, {place(resource_place_name(op.target)), 1}};
        t.outputs = {{succ, 1}};
        break;
      }
      case OpKind::WriteLock: {
        Transition& t = add_transition(st.sid, fn.name, "write_lock",
                                       TransitionTag::WriteLock);
        t.inputs = {{self, 1},
                    {place(resource_place_name(op.target)), net_.thread_bound}};
        t.outputs = {{succ, 1}};
        break;
      }
      case OpKind::Send: {
        Transition& t = add_transition(st.sid, fn.name, "send", TransitionTag::Send);
        t.inputs = {{self, 1}};
        t.outputs = {{succ, 1}, {place(resource_place_name(op.target)), 1}};
        break;
      }
      case OpKind::Recv: {
        Transition& t = add_transition(st.sid, fn.name, "recv", TransitionTag::Recv);
        t.inputs = {{self, 1}, {place(resource_place_name(op.target)), 1}};
        t.outputs = {{succ, 1}};
        break;
      }
      case OpKind::Write:
      case OpKind::Store: {
        Transition& t = add_transition(
            st.sid, fn.name, op.kind == OpKind::Write ? "write" : "store",
            op.kind == OpKind::Write ? TransitionTag::VarWrite
                                     : TransitionTag::AtomicStore);
        t.inputs = {{self, 1}};
        t.outputs = {{succ, 1}};
        t.updates = {{op.target, resolve_enum_refs(*op.value, art_)}};
        break;
      }
      case OpKind::Cas: {
        Expr target = Expr::ref(op.target);
        Expr expected = resolve_enum_refs(*op.cas_expected, art_);
        Expr fresh = resolve_enum_refs(*op.cas_new, art_);
        Transition& ts = add_transition(st.sid, fn.name, "cas_succeed",
                                        TransitionTag::CasSuccess);
        ts.inputs = {{self, 1}};
        ts.outputs = {{place(control_place_name(fn.name, st.transfer.on_true)), 1}};
        ts.guard = BoolExpr::cmp(CmpOp::Eq, target, expected);
        ts.updates = {{op.target, std::move(fresh)}};
        Transition& tf = add_transition(st.sid, fn.name, "cas_fail",
                                        TransitionTag::CasFailure);
        tf.inputs = {{self, 1}};
        tf.outputs = {{place(control_place_name(fn.name, st.transfer.on_false)), 1}};
        tf.guard = BoolExpr::cmp(CmpOp::Ne, std::move(target), std::move(expected));
        break;
      }
      case OpKind::Wait: {
        const std::string& cv = op.target;
        const std::string& mutex = op.mutex_arg;
        const std::string nw = waiter_count_var(cv);
        const std::string na = notify_all_flag_var(st.sid);
        Transition& enter = add_transition(st.sid, fn.name, "wait_enter",
                                           TransitionTag::WaitEnter);
        enter.inputs = {{self, 1}};
        enter.outputs = {{place(wait_place_name(st.sid)), 1},
                         {place(resource_place_name(mutex)), 1}};
        enter.updates = {
            {nw, Expr::bin(ArithOp::Add, Expr::ref(nw), Expr::lit(Value::integer(1)))},
            {na, Expr::lit(Value::boolean(false))}};
        Transition& wake1 = add_transition(st.sid, fn.name, "wake_one",
                                           TransitionTag::Wake1);
        wake1.inputs = {{place(wait_place_name(st.sid)), 1},
                        {place(resource_place_name(cv)), 1}};
        wake1.outputs = {{place(reacquire_place_name(st.sid)), 1}};
        wake1.updates = {
            {nw, Expr::bin(ArithOp::Sub, Expr::ref(nw), Expr::lit(Value::integer(1)))}};
        Transition& wakeA = add_transition(st.sid, fn.name, "wake_all",
                                           TransitionTag::WakeA);
        wakeA.inputs = {{place(wait_place_name(st.sid)), 1}};
        wakeA.outputs = {{place(reacquire_place_name(st.sid)), 1}};
        wakeA.guard =
            BoolExpr::cmp(CmpOp::Eq, Expr::ref(na), Expr::lit(Value::boolean(true)));
        wakeA.updates = {
            {nw, Expr::bin(ArithOp::Sub, Expr::ref(nw), Expr::lit(Value::integer(1)))},
            {na, Expr::lit(Value::boolean(false))}};
        Transition& re = add_transition(st.sid, fn.name, "reacquire",
                                        TransitionTag::Reacquire);
        re.inputs = {{place(reacquire_place_name(st.sid)), 1},
                     {place(resource_place_name(mutex)), 1}};
        re.outputs = {{succ, 1}};
        break;
      }
      case OpKind::NotifyOne: {
        const std::string nw = waiter_count_var(op.target);
        Transition& ok = add_transition(st.sid, fn.name, "notify",
                                        TransitionTag::NotifySuccess);
        ok.inputs = {{self, 1}};
        ok.outputs = {{succ, 1}, {place(resource_place_name(op.target)), 1}};
        ok.guard =
            BoolExpr::cmp(CmpOp::Gt, Expr::ref(nw), Expr::lit(Value::integer(0)));
        Transition& lost = add_transition(st.sid, fn.name, "notify_lost",
                                          TransitionTag::NotifyLost);
        lost.inputs = {{self, 1}};
        lost.outputs = {{succ, 1}};
        lost.guard =
            BoolExpr::cmp(CmpOp::Eq, Expr::ref(nw), Expr::lit(Value::integer(0)));
        break;
      }
      case OpKind::NotifyAll: {
        const std::string nw = waiter_count_var(op.target);
        Transition& ok = add_transition(st.sid, fn.name, "notify_all",
                                        TransitionTag::NotifyAllSuccess);
        ok.inputs = {{self, 1}};
        ok.outputs = {{succ, 1}};
        ok.guard =
            BoolExpr::cmp(CmpOp::Gt, Expr::ref(nw), Expr::lit(Value::integer(0)));
        auto sites = wait_sites_.find(op.target);
        if (sites != wait_sites_.end()) {
          for (const auto& site : sites->second) {
            ok.updates.push_back(
                {notify_all_flag_var(site), Expr::lit(Value::boolean(true))});
          }
        }
        Transition& lost = add_transition(st.sid, fn.name, "notify_all_lost",
                                          TransitionTag::NotifyAllLost);
        lost.inputs = {{self, 1}};
        lost.outputs = {{succ, 1}};
        lost.guard =
            BoolExpr::cmp(CmpOp::Eq, Expr::ref(nw), Expr::lit(Value::integer(0)));
        break;
      }
      case OpKind::Spawn: {
        const FunctionDef* g = art_.find_function(op.target);
        Transition& t = add_transition(st.sid, fn.name, "spawn", TransitionTag::Spawn);
        t.inputs = {{self, 1}};
        t.outputs = {{succ, 1},
                     {place(control_place_name(g->name, g->body[0].sid)), 1}};
        break;
      }
      case OpKind::Join: {
        Transition& t = add_transition(st.sid, fn.name, "join", TransitionTag::Join);
        t.inputs = {{self, 1}, {place(return_place_name(op.target)), 1}};
        t.outputs = {{succ, 1}};
        break;
      }
      case OpKind::Call: {
        const FunctionSummary* summary = art_.find_summary(op.target);
        if (summary != nullptr) {
          Transition& t = add_transition(st.sid, fn.name, "call_summary",
                                         TransitionTag::SummaryCall);
          t.anchor.clear();
          t.hidden = true;
          t.inputs = {{self, 1}};
          t.outputs = {{succ, 1}};
          for (const auto& w : summary->writes) {
            t.updates.push_back({w, Expr::lit(Value::top())});
          }
          break;
        }
        [[fallthrough]];
      }
      case OpKind::Read:
      case OpKind::Load:
      case OpKind::Nop:
      case OpKind::SpawnAsync:
      case OpKind::Await: {
        Transition& t = add_transition(
            st.sid, fn.name, returns ? "return" : "step",
            returns ? TransitionTag::Return : TransitionTag::Sequential);
        t.inputs = {{self, 1}};
        t.outputs = {{succ, 1}};
        break;
      }
    }
  }

  const CirArtifact& art_;
  Cvn net_;
  std::map<int, std::int64_t> initial_tokens_;
  std::map<std::string, std::vector<std::string>> wait_sites_;  // cv -> sids
  std::set<std::string> hidden_sids_;
};

}  // namespace

Cvn translate_artifact(const CirArtifact& artifact) {
  Translator tr(artifact);
  return tr.run();
}

}  // namespace cvnverify
