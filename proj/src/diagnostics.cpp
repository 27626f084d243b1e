#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cvnverify/diagnostics.hpp"

namespace cvnverify {

namespace {

int kind_rank(BugKind k) {
  switch (k) {
    case BugKind::Deadlock: return 0;
    case BugKind::SignalLoss: return 1;
    case BugKind::ChannelBlock: return 2;
    case BugKind::Livelock: return 3;
    case BugKind::Starvation: return 4;
  }
  return 5;
}

std::string kind_camel(BugKind k) {
  switch (k) {
    case BugKind::Deadlock: return "Deadlock";
    case BugKind::SignalLoss: return "SignalLoss";
    case BugKind::ChannelBlock: return "ChannelBlock";
    case BugKind::Livelock: return "Livelock";
    case BugKind::Starvation: return "Starvation";
  }
  return "Deadlock";
}

std::string resource_word(ResourceKind k) {
  switch (k) {
    case ResourceKind::Mutex: return "mutex";
    case ResourceKind::RwLock: return "rwlock";
    case ResourceKind::Condvar: return "condvar";
    case ResourceKind::Semaphore: return "semaphore";
    case ResourceKind::Channel: return "channel";
    case ResourceKind::Var: return "variable";
    case ResourceKind::Atomic: return "atomic";
  }
  return "resource";
}

std::set<std::string> synthetic_functions(const CirArtifact& art) {
  std::set<std::string> out;
  for (const auto& fn : art.functions) {
    if (fn.synthetic) out.insert(fn.name);
  }
  return out;
}

struct TraceText {
  std::vector<std::string> annotated;
  std::vector<std::string> raw;
};

// Visible trace: helper transitions, synthesized entry steps and summary
// calls carry no anchor a user could edit, so they are dropped.
TraceText make_trace(const BugFinding& f, const Cvn& net,
                     const CirArtifact& art, const NetState* bug_state) {
  TraceText out;
  auto synthetic = synthetic_functions(art);
  for (size_t i = 0; i < f.witness.size(); ++i) {
    const Transition& t =
        net.transitions[static_cast<size_t>(f.witness[i])];
    if (t.hidden || t.anchor.empty() || synthetic.count(t.function)) continue;
    out.raw.push_back(t.anchor);
    std::string ann = t.anchor;
    if (f.lost_transition >= 0 && i == f.lost_index) ann += "(lost)";
    out.annotated.push_back(std::move(ann));
  }
  if (bug_state && !out.annotated.empty()) {
    const std::string& last = out.raw.back();
    for (const auto& p : net.places) {
      if (p.kind == PlaceKind::Wait && p.sid == last &&
          bug_state->marking[static_cast<size_t>(p.id)] > 0) {
        out.annotated.back() += "(blocked)";
        break;
      }
    }
  }
  return out;
}

bool trace_less(const TraceText& a, const TraceText& b) {
  if (a.raw.size() != b.raw.size()) return a.raw.size() < b.raw.size();
  return a.raw < b.raw;
}

std::string join(const std::vector<std::string>& parts,
                 const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string wrap_indented(const std::string& text, size_t width,
                          const std::string& indent) {
  std::istringstream words(text);
  std::string word, line = indent, out;
  bool empty = true;
  while (words >> word) {
    if (!empty && line.size() + 1 + word.size() > width) {
      out += line + "\n";
      line = indent;
      empty = true;
    }
    if (!empty) line += " ";
    line += word;
    empty = false;
  }
  if (!empty) out += line + "\n";
  return out;
}

const Statement* anchored_statement(const CirArtifact& art,
                                    const std::string& function,
                                    const std::string& sid) {
  if (const FunctionDef* fn = art.find_function(function)) {
    if (const Statement* st = fn->find_statement(sid)) return st;
  }
  for (const auto& fn : art.functions) {
    if (const Statement* st = fn.find_statement(sid)) return st;
  }
  return nullptr;
}

std::string hint_for(BugKind k) {
  switch (k) {
    case BugKind::Deadlock: return "enforce a consistent lock order";
    case BugKind::SignalLoss: return "update the predicate before notification";
    case BugKind::ChannelBlock:
      return "release held locks before blocking channel operations";
    case BugKind::Livelock:
      return "ensure at least one thread can exit the cycle";
    case BugKind::Starvation:
      return "let the starved thread make progress inside the cycle";
  }
  return "";
}

}  // namespace

const BugFinding& select_bug(const std::vector<BugFinding>& findings,
                             const Cvn& net, const CirArtifact& artifact) {
  const BugFinding* best = &findings.front();
  TraceText best_trace = make_trace(*best, net, artifact, nullptr);
  for (size_t i = 1; i < findings.size(); ++i) {
    const BugFinding& cand = findings[i];
    int rc = kind_rank(cand.kind), rb = kind_rank(best->kind);
    if (rc > rb) continue;
    TraceText cand_trace = make_trace(cand, net, artifact, nullptr);
    if (rc < rb || trace_less(cand_trace, best_trace)) {
      best = &cand;
      best_trace = std::move(cand_trace);
    }
  }
  return *best;
}

Diagnostic build_diag(const BugFinding& finding, const StateSpace& space,
                      const Cvn& net, const CirArtifact& artifact) {
  Diagnostic d;
  d.kind = finding.kind;
  d.definite = finding.definite;
  d.starved_function = finding.starved_function;
  d.cycle_size = finding.scc_states.size();

  const NetState& bug = space.states[static_cast<size_t>(finding.state)];
  TraceText trace = make_trace(finding, net, artifact, &bug);
  d.trace = trace.annotated;

  // thread rows, in declaration order
  for (const auto& fn : artifact.functions) {
    if (fn.synthetic) continue;
    for (const auto& p : net.places) {
      if (p.function != fn.name ||
          bug.marking[static_cast<size_t>(p.id)] <= 0) {
        continue;
      }
      ThreadState row;
      row.function = fn.name;
      switch (p.kind) {
        case PlaceKind::Control: {
          row.sid = p.sid;
          bool enabled = false;
          for (const auto& t : net.transitions) {
            if (t.function == fn.name && t.anchor == p.sid &&
                transition_enabled(t, bug)) {
              enabled = true;
              break;
            }
          }
          row.status = enabled ? "runnable" : "blocked";
          break;
        }
        case PlaceKind::Wait:
          row.sid = p.sid;
          row.status = "waiting";
          break;
        case PlaceKind::Reacquire:
          row.sid = p.sid;
          row.status = "woken";
          break;
        case PlaceKind::Return:
          row.status = "returned";
          break;
        case PlaceKind::Resource:
          continue;
      }
      d.threads.push_back(std::move(row));
    }
  }

  // condvar occupancy rendered as pseudo-variables
  for (const auto& fn : artifact.functions) {
    if (fn.synthetic) continue;
    for (const auto& st : fn.body) {
      if (st.op.kind != OpKind::Wait) continue;
      int wp = net.place_id("wp(" + st.sid + ")");
      int ra = net.place_id("ra(" + st.sid + ")");
      std::string key = "V[" + st.op.target + "_" + fn.name + "]";
      if (wp >= 0 && bug.marking[static_cast<size_t>(wp)] > 0) {
        d.condvar_status.emplace_back(key, "waiting");
      } else if (ra >= 0 && bug.marking[static_cast<size_t>(ra)] > 0) {
        d.condvar_status.emplace_back(key, "woken");
      }
    }
  }

  for (const auto& r : artifact.resources) {
    if (r.kind != ResourceKind::Var && r.kind != ResourceKind::Atomic) continue;
    auto it = bug.valuation.find(r.name);
    if (it != bug.valuation.end()) {
      d.variables.emplace_back("V[" + r.name + "]", to_string(it->second));
    }
  }

  // ownership is recovered from the witness: the net keeps no token identity,
  // but every acquiring or releasing transition is anchored to a statement
  // whose owning function is known
  std::map<std::string, std::vector<std::string>> held;
  for (int tid : finding.witness) {
    const Transition& t = net.transitions[static_cast<size_t>(tid)];
    if (t.anchor.empty()) continue;
    const Statement* st = anchored_statement(artifact, t.function, t.anchor);
    if (!st) continue;
    auto add = [&](const std::string& r) { held[t.function].push_back(r); };
    auto remove = [&](const std::string& r) {
      auto& v = held[t.function];
      auto it = std::find(v.rbegin(), v.rend(), r);
      if (it != v.rend()) v.erase(std::next(it).base());
    };
    switch (t.tag) {
      case TransitionTag::Lock:
      case TransitionTag::ReadLock:
      case TransitionTag::WriteLock:
      case TransitionTag::Acquire:
        add(st->op.target);
        break;
      case TransitionTag::Unlock:
      case TransitionTag::ReadUnlock:
      case TransitionTag::WriteUnlock:
      case TransitionTag::Release:
        remove(st->op.target);
        break;
      case TransitionTag::WaitEnter:
        remove(st->op.mutex_arg);
        break;
      case TransitionTag::Reacquire:
        add(st->op.mutex_arg);
        break;
      default:
        break;
    }
  }
  for (const auto& fn : artifact.functions) {
    auto it = held.find(fn.name);
    if (it != held.end() && !it->second.empty()) {
      d.held.emplace_back(fn.name, it->second);
    }
  }

  // who waits on what
  for (const auto& row : d.threads) {
    if (row.status == "waiting") {
      const Statement* st =
          anchored_statement(artifact, row.function, row.sid);
      d.waiting.push_back(row.function);
      d.relations.push_back(WaitRelation{
          row.function, st ? st->op.target : row.sid,
          "condition wait at " + row.sid});
      continue;
    }
    if (row.status != "blocked" && row.status != "woken") continue;
    const Transition* stuck = nullptr;
    for (const auto& t : net.transitions) {
      if (t.function != row.function || t.anchor != row.sid) continue;
      if (transition_enabled(t, bug)) {
        stuck = nullptr;
        break;
      }
      if (!stuck) stuck = &t;
    }
    if (!stuck) continue;  // a woken thread whose reacquire is enabled
    d.waiting.push_back(row.function);
    WaitRelation rel;
    rel.function = row.function;
    if (guard_value(*stuck, bug) == Truth3::False) {
      rel.target = "condition";
      rel.detail = "guard at " + row.sid;
    } else {
      const Statement* st =
          anchored_statement(artifact, row.function, row.sid);
      std::string opword = st ? to_string(st->op.kind) : "operation";
      rel.target = row.sid;
      rel.detail = opword + " at " + row.sid;
      for (const auto& [pid, weight] : stuck->inputs) {
        const Place& p = net.places[static_cast<size_t>(pid)];
        if (bug.marking[static_cast<size_t>(pid)] >= weight) continue;
        if (p.kind == PlaceKind::Resource) {
          rel.target = p.resource;
          break;
        }
        if (p.kind == PlaceKind::Return) {
          rel.target = "completion of " + p.function;
          break;
        }
      }
    }
    d.relations.push_back(std::move(rel));
  }

  // blame: the final visible step, widened per kind
  std::vector<std::string> blame;
  auto add_blame = [&](const std::string& sid) {
    if (sid.empty()) return;
    if (std::find(blame.begin(), blame.end(), sid) == blame.end()) {
      blame.push_back(sid);
    }
  };
  if (finding.kind == BugKind::SignalLoss && finding.lost_transition >= 0) {
    const Transition& lost =
        net.transitions[static_cast<size_t>(finding.lost_transition)];
    add_blame(lost.anchor);
    const Statement* notify =
        anchored_statement(artifact, lost.function, lost.anchor);
    const std::string cv = notify ? notify->op.target : "";
    for (const auto& fn : artifact.functions) {
      for (const auto& st : fn.body) {
        if (st.op.kind != OpKind::Wait || st.op.target != cv) continue;
        int wp = net.place_id("wp(" + st.sid + ")");
        if (wp >= 0 && bug.marking[static_cast<size_t>(wp)] > 0) {
          add_blame(st.sid);
        }
      }
    }
  }
  if (finding.kind == BugKind::Starvation) {
    for (const auto& row : d.threads) {
      if (row.function == finding.starved_function) add_blame(row.sid);
    }
  }
  if (!trace.raw.empty()) {
    add_blame(trace.raw.back());
  } else {
    for (const auto& row : d.threads) {
      if (row.status != "returned" && row.status != "runnable") {
        add_blame(row.sid);
      }
    }
  }
  d.blame = blame;

  // slice: blamed statements with two neighbours either side
  for (const auto& fn : artifact.functions) {
    std::set<size_t> picked;
    for (const auto& sid : d.blame) {
      for (size_t i = 0; i < fn.body.size(); ++i) {
        if (fn.body[i].sid != sid) continue;
        size_t lo = i >= 2 ? i - 2 : 0;
        size_t hi = std::min(fn.body.size() - 1, i + 2);
        for (size_t k = lo; k <= hi; ++k) picked.insert(k);
      }
    }
    for (size_t i : picked) {
      d.slice.emplace_back(fn.body[i].sid, to_string(fn.body[i].op));
    }
  }

  std::set<std::string> touched;
  for (const auto& [sid, _] : d.slice) {
    if (const Statement* st = anchored_statement(artifact, "", sid)) {
      if (artifact.find_resource(st->op.target)) touched.insert(st->op.target);
      if (!st->op.mutex_arg.empty()) touched.insert(st->op.mutex_arg);
    }
  }
  for (const auto& r : artifact.resources) {
    if (touched.count(r.name)) {
      d.relevant_resources.push_back(resource_word(r.kind) + " " + r.name);
    }
  }

  d.hint = hint_for(finding.kind);

  switch (finding.kind) {
    case BugKind::Deadlock: {
      std::vector<std::string> parts;
      for (const auto& rel : d.relations) {
        std::string part = rel.function;
        for (const auto& [fn, rs] : d.held) {
          if (fn == rel.function) part += " holds " + join(rs, ", ") + " and";
        }
        part += " waits for " + rel.target + " (" + rel.detail + ")";
        parts.push_back(std::move(part));
      }
      d.diagnosis = parts.empty()
                        ? "no transition is enabled from the reached state"
                        : "no transition is enabled: " + join(parts, "; ");
      break;
    }
    case BugKind::ChannelBlock: {
      std::string text =
          "a channel operation can never be matched from the reached state";
      for (const auto& rel : d.relations) {
        const ResourceDecl* r = artifact.find_resource(rel.target);
        if (r && r->kind == ResourceKind::Channel) {
          text = rel.function + " blocks on channel " + rel.target + " (" +
                 rel.detail + ") and no matching endpoint can fire";
          break;
        }
      }
      d.diagnosis = text;
      break;
    }
    case BugKind::SignalLoss: {
      std::string notify_sid = d.blame.empty() ? "" : d.blame.front();
      std::string text = "notification at sid=" + notify_sid +
                         " fires while no thread is waiting";
      for (const auto& rel : d.relations) {
        text += "; " + rel.function + " parks at " + rel.detail.substr(
                    rel.detail.find("at ") + 3) +
                " afterwards and is never woken";
        break;
      }
      d.diagnosis = text + ".";
      break;
    }
    case BugKind::Livelock:
      d.diagnosis = "a cycle of " + std::to_string(d.cycle_size) +
                    " reachable states repeats with no function reaching "
                    "its return";
      break;
    case BugKind::Starvation: {
      std::string pin;
      for (const auto& row : d.threads) {
        if (row.function == finding.starved_function) pin = row.sid;
      }
      d.diagnosis = finding.starved_function + " stays at sid=" + pin +
                    " across a cycle of " + std::to_string(d.cycle_size) +
                    " states while other functions keep moving";
      break;
    }
  }
  return d;
}

std::string render_repair_prompt(const Diagnostic& d) {
  std::string out = "Repair task: revise the CIR locally.\n\n";
  out += "Bug kind: " + kind_camel(d.kind) + "\n";
  out += "Witness trace (sid): " +
         (d.trace.empty() ? std::string("<initial state>")
                          : join(d.trace, " -> ")) +
         "\n\n";

  out += "Bug-state summary:\n";
  for (const auto& row : d.threads) {
    if (row.status == "returned") {
      out += "  " + row.function + " returned\n";
    } else {
      out += "  " + row.function + " at sid " + row.sid + " (" + row.status +
             ")\n";
    }
  }
  for (const auto& [key, value] : d.variables) {
    out += "  " + key + " = " + value + "\n";
  }
  if (d.cycle_size > 0) {
    out += "  cycle of " + std::to_string(d.cycle_size) + " states\n";
  }
  out += "\n";

  out += "Relevant resources:\n";
  out += "  " +
         (d.relevant_resources.empty() ? std::string("none")
                                       : join(d.relevant_resources, ", ")) +
         "\n";
  if (d.held.empty()) {
    out += "  held: none\n";
  } else {
    std::vector<std::string> parts;
    for (const auto& [fn, rs] : d.held) {
      parts.push_back(fn + " holds " + join(rs, ", "));
    }
    out += "  held: " + join(parts, "; ") + "\n";
  }
  if (d.relations.empty()) {
    out += "  waiting: none\n";
  } else {
    std::vector<std::string> parts;
    for (const auto& rel : d.relations) {
      parts.push_back(rel.function + " waits on " + rel.target + " (" +
                      rel.detail + ")");
    }
    out += "  waiting: " + join(parts, "; ") + "\n";
  }
  out += "\n";

  out += "Relevant CIR slice:\n";
  for (const auto& [sid, op] : d.slice) {
    out += "  " + sid + ": " + op + "\n";
  }
  out += "\n";
  out += "Preserve:\n  resource names, thread structure, goals\n\n";
  out += "Suggested direction:\n  " + d.hint + "\n\n";
  out += "Output: the complete revised CIR artifact\n";
  return out;
}

std::string goal_requirement_text(const GoalCheck& check) {
  switch (check.failure) {
    case GoalFailure::Variable:
      return "V[" + check.failed_name + "] = " + to_string(check.failed_value);
    case GoalFailure::Completion:
      return check.failed_name + " completed";
    case GoalFailure::Availability:
      return check.failed_name + " available";
    case GoalFailure::Conjunction:
      return "a single state satisfying every requirement of " + check.goal_id;
    case GoalFailure::None:
      break;
  }
  return "";
}

std::string goal_hint_text(const GoalCheck& check,
                           const CirArtifact& artifact) {
  switch (check.failure) {
    case GoalFailure::Variable: {
      const ResourceDecl* r = artifact.find_resource(check.failed_name);
      std::string op =
          r && r->kind == ResourceKind::Atomic ? "store" : "write";
      return "Ensure that a " + op + "(" + check.failed_name + ", " +
             to_string(check.failed_value) +
             ") operation exists on a reachable path.";
    }
    case GoalFailure::Completion:
      return "Ensure that " + check.failed_name +
             " can reach its final statement on some path.";
    case GoalFailure::Availability: {
      const ResourceDecl* r = artifact.find_resource(check.failed_name);
      std::string op = "drop";
      if (r && r->kind == ResourceKind::Semaphore) op = "release";
      if (r && r->kind == ResourceKind::Channel) op = "send";
      return "Ensure that a " + op + "(" + check.failed_name +
             ") operation exists on a reachable path.";
    }
    case GoalFailure::Conjunction:
      return "Ensure the listed requirements can hold together in one "
             "reachable state.";
    case GoalFailure::None:
      break;
  }
  return "";
}

std::string render_goal_violation(const std::vector<GoalCheck>& unreachable,
                                  const CirArtifact& artifact, int round) {
  std::string out =
      "=== Goal Violation (Round " + std::to_string(round) + ") ===\n";
  out += "Status: No concurrency bugs detected.\n";
  for (const auto& check : unreachable) {
    if (check.reachable) continue;
    const BusinessGoal* goal = nullptr;
    for (const auto& g : artifact.goals) {
      if (g.id == check.goal_id) goal = &g;
    }
    out += "\nUNREACHABLE GOAL: " + check.goal_id + "\n";
    if (goal && !goal->description.empty()) {
      out += "  desc: \"" + goal->description + "\"\n";
    }
    std::string req = goal_requirement_text(check);
    out += "  Missing: " + req + "\n";
    out += "  No reachable state satisfies " + req + ".\n";
    out += "  Hint: " + goal_hint_text(check, artifact) + "\n";
  }
  return out;
}

namespace {

// value column alignment used by the text report
std::string pad_key(const std::string& key, size_t width) {
  std::string out = key;
  if (out.size() < width) out.append(width - out.size(), ' ');
  return out;
}

std::string held_text(const Diagnostic& d) {
  if (d.held.empty()) return "{}";
  std::string out = "{";
  for (size_t i = 0; i < d.held.size(); ++i) {
    if (i) out += ", ";
    out += d.held[i].first + ": ";
    if (d.held[i].second.size() == 1) {
      out += d.held[i].second.front();
    } else {
      out += "[" + join(d.held[i].second, ", ") + "]";
    }
  }
  return out + "}";
}

std::string finding_summary_line(const Diagnostic& d) {
  std::string out = to_string(d.kind) + ": blame [" + join(d.blame, ", ") + "]";
  if (d.cycle_size > 0) {
    out += ", cycle of " + std::to_string(d.cycle_size) + " states";
  }
  if (!d.starved_function.empty()) out += ", starved " + d.starved_function;
  return out;
}

std::string goal_status_line(const GoalCheck& g) {
  if (g.reachable) return g.goal_id + ": REACHABLE";
  return g.goal_id + ": UNREACHABLE (missing: " + goal_requirement_text(g) +
         ")";
}

}  // namespace

VerdictReport build_report(const CheckResult& check,
                           const AnalysisResult* analysis, const Cvn* net,
                           const CirArtifact& artifact) {
  VerdictReport r;
  r.static_errors = check.findings;
  if (analysis && net) {
    std::vector<size_t> order(analysis->bugs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<TraceText> traces;
    traces.reserve(order.size());
    for (const auto& b : analysis->bugs) {
      traces.push_back(make_trace(b, *net, artifact, nullptr));
    }
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      int ra = kind_rank(analysis->bugs[a].kind);
      int rb = kind_rank(analysis->bugs[b].kind);
      if (ra != rb) return ra < rb;
      return trace_less(traces[a], traces[b]);
    });
    for (size_t i : order) {
      r.findings.push_back(
          build_diag(analysis->bugs[i], analysis->space, *net, artifact));
    }
    r.goals = analysis->goals;
    r.livelock_immune = analysis->livelock_immune;
    r.notes = analysis->notes;
    r.state_count = analysis->space.states.size();
  }
  r.accepted = r.static_errors.empty() && !r.has_definite();
  for (const auto& g : r.goals) {
    if (!g.reachable) r.accepted = false;
  }
  return r;
}

std::string report_to_json(const VerdictReport& r) {
  nlohmann::ordered_json j;
  j["static_errors"] = nlohmann::ordered_json::array();
  for (const auto& f : r.static_errors) {
    nlohmann::ordered_json e;
    e["code"] = f.code;
    e["anchor"] = f.anchor;
    e["message"] = f.message;
    e["autofixable"] = f.autofixable;
    j["static_errors"].push_back(std::move(e));
  }
  j["findings"] = nlohmann::ordered_json::array();
  for (const auto& d : r.findings) {
    nlohmann::ordered_json f;
    f["bug_kind"] = to_string(d.kind);
    f["definite"] = d.definite;
    f["blame"] = d.blame;
    nlohmann::ordered_json end_state;
    for (const auto& [key, value] : d.condvar_status) end_state[key] = value;
    for (const auto& [key, value] : d.variables) end_state[key] = value;
    nlohmann::ordered_json held = nlohmann::ordered_json::object();
    for (const auto& [fn, rs] : d.held) held[fn] = rs;
    end_state["held"] = std::move(held);
    end_state["waiting"] = d.waiting;
    f["end_state"] = std::move(end_state);
    f["trace"] = d.trace;
    f["diagnosis"] = d.diagnosis;
    f["repair_suggestion"] = d.hint;
    if (!d.starved_function.empty()) {
      f["starved_function"] = d.starved_function;
    }
    if (d.cycle_size > 0) f["cycle_states"] = d.cycle_size;
    j["findings"].push_back(std::move(f));
  }
  j["goal_check"] = nlohmann::ordered_json::array();
  for (const auto& g : r.goals) {
    nlohmann::ordered_json e;
    e["goal"] = g.goal_id;
    e["status"] = g.reachable ? "REACHABLE" : "UNREACHABLE";
    if (!g.reachable) e["missing"] = goal_requirement_text(g);
    j["goal_check"].push_back(std::move(e));
  }
  j["accepted"] = r.accepted;
  j["rounds_used"] = r.rounds_used;
  j["livelock_immune"] = r.livelock_immune;
  j["notes"] = r.notes;
  j["state_count"] = r.state_count;
  j["timings"] = {{"total_ms", r.total_ms}};
  return j.dump(2) + "\n";
}

std::string report_to_text(const VerdictReport& r) {
  std::string out;
  if (!r.static_errors.empty()) {
    out += "static_errors:\n";
    for (const auto& f : r.static_errors) {
      out += "  " + f.code;
      if (!f.anchor.empty()) out += " at " + f.anchor;
      out += ": " + f.message + "\n";
    }
    out += pad_key("accepted:", 11) + (r.accepted ? "true" : "false") + "\n";
    return out;
  }

  if (r.findings.empty()) {
    out += pad_key("bug_kind:", 11) + "none\n";
  } else {
    const Diagnostic& d = r.findings.front();
    out += pad_key("bug_kind:", 11) + to_string(d.kind) +
           (d.definite ? "" : " (warning)") + "\n";
    out += pad_key("blame:", 11) + "[" + join(d.blame, ", ") + "]\n";
    out += "end_state:\n";
    std::vector<std::pair<std::string, std::string>> inner;
    for (const auto& [key, value] : d.condvar_status) {
      inner.emplace_back(key + ":", value);
    }
    for (const auto& [key, value] : d.variables) {
      inner.emplace_back(key + ":", value);
    }
    inner.emplace_back("held:", held_text(d));
    inner.emplace_back("waiting:", "[" + join(d.waiting, ", ") + "]");
    size_t width = 0;
    for (const auto& [key, _] : inner) width = std::max(width, key.size());
    for (const auto& [key, value] : inner) {
      out += "  " + pad_key(key, width + 1) + value + "\n";
    }
    out += pad_key("trace:", 11) + "[" + join(d.trace, ", ") + "]\n";
    out += "diagnosis:\n" + wrap_indented(d.diagnosis, 72, "  ");
    out += "repair_suggestion:\n" + wrap_indented(d.hint, 72, "  ");
    if (r.findings.size() > 1) {
      out += "other_findings:\n";
      for (size_t i = 1; i < r.findings.size(); ++i) {
        out += "  " + finding_summary_line(r.findings[i]) + "\n";
      }
    }
  }
  if (!r.goals.empty()) {
    out += "goal_check:\n";
    for (const auto& g : r.goals) {
      out += "  " + goal_status_line(g) + "\n";
    }
  }
  if (!r.notes.empty()) {
    out += "notes:\n";
    for (const auto& n : r.notes) {
      out += wrap_indented(n, 72, "  ");
    }
  }
  out += pad_key("accepted:", 11) + (r.accepted ? "true" : "false") + "\n";
  return out;
}

}  // namespace cvnverify
