#include "oracle.hpp"

#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <variant>

namespace oracle {

using namespace cvnverify;

namespace {

enum class Mode { At, Parked, Woken, Returned };

struct IState {
  // function name -> (mode, sid); one live thread per function at most
  std::map<std::string, std::pair<Mode, std::string>> threads;
  std::map<std::string, std::int64_t> avail;
  std::map<std::string, Value> store;
};

std::string encode(const IState& s) {
  std::string out;
  for (const auto& [fn, slot] : s.threads) {
    out += fn;
    out += '=';
    out += static_cast<char>('0' + static_cast<int>(slot.first));
    out += slot.second;
    out += ';';
  }
  out += '|';
  for (const auto& [name, n] : s.avail) {
    out += name;
    out += '=';
    out += std::to_string(n);
    out += ';';
  }
  out += '|';
  for (const auto& [name, v] : s.store) {
    out += name;
    out += '=';
    out += to_string(v);
    out += ';';
  }
  return out;
}

std::int64_t as_int(const Value& v) {
  if (auto* i = std::get_if<std::int64_t>(&v.v)) return *i;
  throw std::runtime_error("oracle: non-integer operand");
}

Value ev(const Expr& e, const std::map<std::string, Value>& store) {
  if (auto* lit = std::get_if<Expr::Lit>(&e.node)) return lit->value;
  if (auto* ref = std::get_if<Expr::Ref>(&e.node)) {
    auto it = store.find(ref->name);
    if (it == store.end()) {
      throw std::runtime_error("oracle: undefined variable " + ref->name);
    }
    return it->second;
  }
  const auto& bin = std::get<Expr::Bin>(e.node);
  std::int64_t l = as_int(ev(*bin.lhs, store));
  std::int64_t r = as_int(ev(*bin.rhs, store));
  switch (bin.op) {
    case ArithOp::Add: return Value::integer(l + r);
    case ArithOp::Sub: return Value::integer(l - r);
    case ArithOp::Mul: return Value::integer(l * r);
    case ArithOp::Div:
      if (r == 0) throw std::runtime_error("oracle: division by zero");
      return Value::integer(l / r);
  }
  throw std::runtime_error("oracle: bad operator");
}

bool evb(const BoolExpr& b, const std::map<std::string, Value>& store) {
  if (std::holds_alternative<BoolExpr::TrueC>(b.node)) return true;
  if (std::holds_alternative<BoolExpr::FalseC>(b.node)) return false;
  if (auto* cmp = std::get_if<BoolExpr::Cmp>(&b.node)) {
    Value l = ev(cmp->lhs, store), r = ev(cmp->rhs, store);
    switch (cmp->op) {
      case CmpOp::Eq: return l == r;
      case CmpOp::Ne: return !(l == r);
      case CmpOp::Lt: return as_int(l) < as_int(r);
      case CmpOp::Le: return as_int(l) <= as_int(r);
      case CmpOp::Gt: return as_int(l) > as_int(r);
      case CmpOp::Ge: return as_int(l) >= as_int(r);
    }
  }
  if (auto* a = std::get_if<BoolExpr::And>(&b.node)) {
    return evb(*a->lhs, store) && evb(*a->rhs, store);
  }
  if (auto* o = std::get_if<BoolExpr::Or>(&b.node)) {
    return evb(*o->lhs, store) || evb(*o->rhs, store);
  }
  const auto& n = std::get<BoolExpr::Not>(b.node);
  return !evb(*n.arg, store);
}

struct Interp {
  const CirArtifact& art;

  const Statement& stmt(const std::string& fn, const std::string& sid) const {
    const FunctionDef* f = art.find_function(fn);
    if (!f) throw std::runtime_error("oracle: no function " + fn);
    const Statement* s = f->find_statement(sid);
    if (!s) throw std::runtime_error("oracle: no statement " + sid);
    return *s;
  }

  // applies the statement's transfer to the stepping thread
  void advance(IState& s, const std::string& fn, const Statement& st) const {
    auto& slot = s.threads.at(fn);
    switch (st.transfer.kind) {
      case Transfer::Kind::Next:
        slot = {Mode::At, st.transfer.next};
        return;
      case Transfer::Kind::Return:
      case Transfer::Kind::Omitted:
        slot = {Mode::Returned, ""};
        return;
      case Transfer::Kind::Branch: {
        bool taken = st.transfer.cond ? evb(*st.transfer.cond, s.store) : false;
        slot = {Mode::At, taken ? st.transfer.on_true : st.transfer.on_false};
        return;
      }
      case Transfer::Kind::Switch: {
        auto it = s.store.find(st.transfer.switch_var);
        if (it == s.store.end()) {
          throw std::runtime_error("oracle: undefined switch variable");
        }
        for (const auto& [v, target] : st.transfer.arms) {
          if (it->second == v) {
            slot = {Mode::At, target};
            return;
          }
        }
        slot = {Mode::At, st.transfer.switch_default};
        return;
      }
    }
  }

  std::vector<IState> thread_steps(const IState& s,
                                   const std::string& fn) const {
    std::vector<IState> out;
    const auto& [mode, sid] = s.threads.at(fn);
    if (mode == Mode::Returned || mode == Mode::Parked) return out;

    if (mode == Mode::Woken) {
      // parked at a wait statement, signalled, waiting on the paired mutex
      const Statement& st = stmt(fn, sid);
      auto it = s.avail.find(st.op.mutex_arg);
      if (it != s.avail.end() && it->second >= 1) {
        IState next = s;
        next.avail[st.op.mutex_arg] -= 1;
        advance(next, fn, st);
        out.push_back(std::move(next));
      }
      return out;
    }

    const Statement& st = stmt(fn, sid);
    auto push_advanced = [&](IState next) {
      advance(next, fn, st);
      out.push_back(std::move(next));
    };

    switch (st.op.kind) {
      case OpKind::Lock:
      case OpKind::Acquire:
      case OpKind::Recv: {
        auto it = s.avail.find(st.op.target);
        if (it != s.avail.end() && it->second >= 1) {
          IState next = s;
          next.avail[st.op.target] -= 1;
          push_advanced(std::move(next));
        }
        break;
      }
      case OpKind::Drop:
      case OpKind::Release:
      case OpKind::Send: {
        IState next = s;
        next.avail[st.op.target] += 1;
        push_advanced(std::move(next));
        break;
      }
      case OpKind::Wait: {
        IState next = s;
        next.avail[st.op.mutex_arg] += 1;
        next.threads.at(fn) = {Mode::Parked, sid};
        out.push_back(std::move(next));
        break;
      }
      case OpKind::NotifyOne: {
        std::vector<std::string> parked;
        for (const auto& [name, slot] : s.threads) {
          if (slot.first != Mode::Parked) continue;
          if (stmt(name, slot.second).op.target == st.op.target) {
            parked.push_back(name);
          }
        }
        if (parked.empty()) {
          push_advanced(s);
        } else {
          for (const auto& woken : parked) {
            IState next = s;
            next.threads.at(woken).first = Mode::Woken;
            push_advanced(std::move(next));
          }
        }
        break;
      }
      case OpKind::NotifyAll: {
        IState next = s;
        for (auto& [name, slot] : next.threads) {
          if (slot.first != Mode::Parked) continue;
          if (stmt(name, slot.second).op.target == st.op.target) {
            slot.first = Mode::Woken;
          }
        }
        push_advanced(std::move(next));
        break;
      }
      case OpKind::Write:
      case OpKind::Store: {
        IState next = s;
        next.store[st.op.target] = ev(*st.op.value, s.store);
        push_advanced(std::move(next));
        break;
      }
      case OpKind::Cas: {
        IState next = s;
        bool hit = s.store.at(st.op.target) == ev(*st.op.cas_expected, s.store);
        if (hit) next.store[st.op.target] = ev(*st.op.cas_new, s.store);
        if (st.transfer.kind == Transfer::Kind::Branch) {
          next.threads.at(fn) = {
              Mode::At, hit ? st.transfer.on_true : st.transfer.on_false};
          out.push_back(std::move(next));
        } else {
          push_advanced(std::move(next));
        }
        break;
      }
      case OpKind::Spawn: {
        IState next = s;
        const FunctionDef* g = art.find_function(st.op.target);
        if (!g || g->body.empty()) {
          throw std::runtime_error("oracle: bad spawn target");
        }
        next.threads[st.op.target] = {Mode::At, g->body.front().sid};
        push_advanced(std::move(next));
        break;
      }
      case OpKind::Join: {
        auto it = s.threads.find(st.op.target);
        if (it != s.threads.end() && it->second.first == Mode::Returned) {
          push_advanced(s);
        }
        break;
      }
      case OpKind::Read:
      case OpKind::Load:
      case OpKind::Nop:
      case OpKind::SpawnAsync:
      case OpKind::Await:
        push_advanced(s);
        break;
      case OpKind::Call:
      case OpKind::ReadLock:
      case OpKind::WriteLock:
        throw std::runtime_error("oracle: unsupported operation " +
                                 to_string(st.op.kind));
    }
    return out;
  }

  std::vector<IState> successors(const IState& s) const {
    std::vector<IState> out;
    for (const auto& [fn, _] : s.threads) {
      auto steps = thread_steps(s, fn);
      for (auto& n : steps) out.push_back(std::move(n));
    }
    return out;
  }
};

}  // namespace

Result run(const CirArtifact& artifact, std::size_t state_limit) {
  Interp interp{artifact};

  IState init;
  for (const auto& r : artifact.resources) {
    switch (r.kind) {
      case ResourceKind::Mutex:
        init.avail[r.name] = 1;
        break;
      case ResourceKind::Semaphore:
      case ResourceKind::Channel:
        init.avail[r.name] = r.initial_count;
        break;
      case ResourceKind::Var:
      case ResourceKind::Atomic:
        init.store[r.name] = r.init;
        break;
      case ResourceKind::Condvar:
      case ResourceKind::RwLock:
        break;
    }
  }
  const FunctionDef* entry = artifact.find_function(artifact.entry);
  if (!entry || entry->body.empty()) {
    throw std::runtime_error("oracle: missing entry function");
  }
  init.threads[entry->name] = {Mode::At, entry->body.front().sid};

  auto goal_met = [&](const BusinessGoal& g, const IState& s) {
    for (const auto& fn : g.completion) {
      auto t = s.threads.find(fn);
      if (t == s.threads.end() || t->second.first != Mode::Returned) {
        return false;
      }
    }
    for (const auto& res : g.availability) {
      const ResourceDecl* decl = artifact.find_resource(res);
      std::int64_t want = 0;
      if (decl) {
        want = decl->kind == ResourceKind::Mutex ? 1 : decl->initial_count;
      }
      auto a = s.avail.find(res);
      if ((a == s.avail.end() ? 0 : a->second) < want) return false;
    }
    for (const auto& [var, val] : g.variables) {
      auto v = s.store.find(var);
      if (v == s.store.end() || !(v->second == val)) return false;
    }
    return true;
  };

  std::set<std::string> seen;
  std::deque<IState> queue;
  seen.insert(encode(init));
  queue.push_back(std::move(init));

  Result result;
  std::vector<bool> goal_hits(artifact.goals.size(), false);

  while (!queue.empty()) {
    IState s = std::move(queue.front());
    queue.pop_front();

    for (size_t gi = 0; gi < artifact.goals.size(); ++gi) {
      if (!goal_hits[gi] && goal_met(artifact.goals[gi], s)) {
        goal_hits[gi] = true;
      }
    }

    auto next = interp.successors(s);
    if (next.empty()) {
      for (const auto& [_, slot] : s.threads) {
        if (slot.first == Mode::At || slot.first == Mode::Woken) {
          result.deadlock = true;
          break;
        }
      }
    }
    for (auto& n : next) {
      if (seen.size() >= state_limit) {
        throw std::runtime_error("oracle: state limit exceeded");
      }
      if (seen.insert(encode(n)).second) queue.push_back(std::move(n));
    }
  }

  result.state_count = seen.size();
  for (size_t gi = 0; gi < artifact.goals.size(); ++gi) {
    if (goal_hits[gi]) result.reachable_goals.push_back(artifact.goals[gi].id);
  }
  return result;
}

}  // namespace oracle
