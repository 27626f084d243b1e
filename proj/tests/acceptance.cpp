// Acceptance harness: nine criteria, one pass/fail line each, indented
// detail lines underneath. Exit status is the number of failed criteria.
// All tolerances are pinned as constants next to the checks that use them.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstddef>
#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cvnverify/analyze.hpp"
#include "cvnverify/checker.hpp"
#include "cvnverify/cir.hpp"
#include "cvnverify/diagnostics.hpp"
#include "cvnverify/repair.hpp"
#include "cvnverify/translate.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

using namespace cvnverify;

namespace {

constexpr double kMaxAnalysisMs = 1000.0;  // per-fixture runtime ceiling
constexpr double kSizeBandLoose = 0.25;    // reconstructed fixtures
constexpr int kSizeBandTight = 2;          // running-example places/transitions

struct Bundle {
  CirArtifact artifact;
  Cvn net;
  AnalysisResult analysis;
  VerdictReport report;
  double elapsed_ms = 0.0;
};

const Bundle& bundle(const std::string& name) {
  static std::map<std::string, Bundle> cache;
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;

  Bundle b;
  ParseResult parsed = parse_cir(testing::fixture_text(name));
  if (!parsed.ok()) throw std::runtime_error(name + ": fixture does not parse");
  b.artifact = *parsed.artifact;
  CheckResult checked = check_artifact(b.artifact);
  if (!checked.ok()) throw std::runtime_error(name + ": fixture is not clean");

  auto start = std::chrono::steady_clock::now();
  b.net = translate_artifact(b.artifact);
  b.analysis = analyze_net(b.artifact, b.net);
  auto stop = std::chrono::steady_clock::now();
  b.elapsed_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  b.report = build_report(checked, &b.analysis, &b.net, b.artifact);
  return cache.emplace(name, std::move(b)).first->second;
}

std::string fixture_of(int pattern) {
  return "pattern" + std::to_string(pattern) + ".cir";
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      details.push_back("FAILED: " + what);
    }
  }
  void note(const std::string& what) { details.push_back(what); }
};

const Statement* find_statement(const CirArtifact& art, const std::string& sid) {
  for (const auto& fn : art.functions) {
    if (const Statement* st = fn.find_statement(sid)) return st;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// 1. Running-example fidelity.

Outcome criterion_running_example() {
  Outcome out;
  const Bundle& b = bundle("pattern2.cir");
  out.expect(!b.report.findings.empty(), "no finding reported");
  if (b.report.findings.empty()) return out;
  const Diagnostic& d = b.report.findings.front();
  out.expect(d.kind == BugKind::SignalLoss, "lead finding is not signal_loss");
  out.expect(d.blame == std::vector<std::string>{"n2", "w2"},
             "blame is not exactly [n2, w2]");
  const std::vector<std::string> trace = {"n1", "n2(lost)", "n3",
                                          "n4", "w1",       "w2(blocked)"};
  out.expect(d.trace == trace, "trace mismatch");
  out.expect(!d.trace.empty() && d.trace.back() == "w2(blocked)",
             "trace does not end blocked at w2");
  out.expect(b.elapsed_ms < kMaxAnalysisMs, "analysis exceeded 1 s");
  out.note("blame [n2, w2], trace ends w2(blocked), " +
           std::to_string(b.elapsed_ms) + " ms");
  return out;
}

// ---------------------------------------------------------------------------
// 2. Pattern matrix detection.

Outcome criterion_pattern_matrix() {
  Outcome out;
  struct Expected {
    int pattern;
    std::set<BugKind> kinds;  // empty: no findings allowed
    bool definite;
  };
  const std::vector<Expected> table = {
      {1, {BugKind::Deadlock}, true},
      {2, {BugKind::SignalLoss}, true},
      {3, {BugKind::Deadlock, BugKind::ChannelBlock}, true},
      {4, {BugKind::Deadlock}, true},
      {5, {BugKind::Livelock}, false},
      {6, {BugKind::Deadlock}, true},
      {7, {}, false},
      {8, {}, false},
      {9, {}, false},
  };
  int matched = 0;
  for (const auto& e : table) {
    const Bundle& b = bundle(fixture_of(e.pattern));
    const std::string tag = "pattern " + std::to_string(e.pattern);
    if (e.kinds.empty()) {
      bool clean = b.report.findings.empty();
      out.expect(clean, tag + " is a baseline but has findings");
      matched += clean;
      continue;
    }
    if (b.report.findings.empty()) {
      out.expect(false, tag + " reported no finding");
      continue;
    }
    const Diagnostic& d = b.report.findings.front();
    bool ok = e.kinds.count(d.kind) > 0 && d.definite == e.definite;
    out.expect(ok, tag + " selected " + to_string(d.kind) +
                       (d.definite ? "" : " (warning)"));
    matched += ok;
  }
  out.note(std::to_string(matched) + "/9 fixtures match the expected verdict");
  return out;
}

// ---------------------------------------------------------------------------
// 3. Structural invariants, nine per translated fixture.

bool inv_statement_coverage(const CirArtifact& art, const Cvn& net) {
  for (const auto& fn : art.functions) {
    for (const auto& st : fn.body) {
      const std::string prefix = st.sid + ":";
      bool found = false;
      for (const auto& t : net.transitions) {
        if (t.name.rfind(prefix, 0) == 0) {
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
  }
  return true;
}

bool inv_anchors(const CirArtifact& art, const Cvn& net) {
  for (const auto& t : net.transitions) {
    if (t.anchor.empty()) {
      if (t.tag != TransitionTag::SummaryCall) return false;
    } else if (!art.sid_exists(t.anchor)) {
      return false;
    }
  }
  return true;
}

bool inv_initial_marking(const CirArtifact& art, const Cvn& net) {
  const FunctionDef* entry = art.find_function(art.entry);
  if (entry == nullptr || entry->body.empty()) return false;
  const std::string entry_place =
      control_place_name(entry->name, entry->body.front().sid);
  std::vector<std::int64_t> expected(net.places.size(), 0);
  for (const auto& p : net.places) {
    if (p.kind == PlaceKind::Resource) {
      const ResourceDecl* r = art.find_resource(p.resource);
      if (r == nullptr) return false;
      switch (r->kind) {
        case ResourceKind::Mutex: expected[p.id] = 1; break;
        case ResourceKind::RwLock: expected[p.id] = net.thread_bound; break;
        case ResourceKind::Semaphore:
        case ResourceKind::Channel: expected[p.id] = r->initial_count; break;
        case ResourceKind::Condvar: expected[p.id] = 0; break;
        default: return false;
      }
    } else if (p.name == entry_place) {
      expected[p.id] = 1;
    }
  }
  return expected == net.initial_marking;
}

bool inv_resource_place_count(const CirArtifact& art, const Cvn& net) {
  std::size_t declared = 0;
  for (const auto& r : art.resources) declared += is_sync_primitive(r.kind);
  std::size_t placed = 0;
  for (const auto& p : net.places) placed += p.kind == PlaceKind::Resource;
  return declared == placed;
}

bool inv_store_contents(const CirArtifact& art, const Cvn& net) {
  Valuation expected;
  for (const auto& r : art.resources) {
    if (r.kind == ResourceKind::Var || r.kind == ResourceKind::Atomic) {
      expected[r.name] = r.init;
    } else if (r.kind == ResourceKind::Condvar) {
      expected[waiter_count_var(r.name)] = Value::integer(0);
    }
  }
  for (const auto& fn : art.functions) {
    for (const auto& st : fn.body) {
      if (st.op.kind == OpKind::Wait) {
        expected[notify_all_flag_var(st.sid)] = Value::boolean(false);
      }
    }
  }
  return expected == net.initial_valuation;
}

bool inv_nonempty_inputs(const CirArtifact&, const Cvn& net) {
  for (const auto& t : net.transitions) {
    if (t.inputs.empty()) return false;
  }
  return true;
}

bool inv_spawn_outputs(const CirArtifact& art, const Cvn& net) {
  for (const auto& t : net.transitions) {
    if (t.tag != TransitionTag::Spawn) continue;
    const Statement* st = find_statement(art, t.anchor);
    if (st == nullptr) return false;
    const FunctionDef* child = art.find_function(st->op.target);
    if (child == nullptr || child->body.empty()) return false;
    if (t.outputs.size() != 2) return false;
    const int child_entry =
        net.place_id(control_place_name(child->name, child->body.front().sid));
    bool to_child = false, to_parent = false;
    for (const auto& [pid, weight] : t.outputs) {
      if (weight != 1) return false;
      if (pid == child_entry) to_child = true;
      if (net.places[pid].function == t.function) to_parent = true;
    }
    if (!to_child || !to_parent) return false;
  }
  return true;
}

bool inv_join_inputs(const CirArtifact& art, const Cvn& net) {
  for (const auto& t : net.transitions) {
    if (t.tag != TransitionTag::Join) continue;
    const Statement* st = find_statement(art, t.anchor);
    if (st == nullptr) return false;
    const int ret = net.place_id(return_place_name(st->op.target));
    bool consumes = false;
    for (const auto& [pid, weight] : t.inputs) {
      consumes |= pid == ret && weight == 1;
    }
    if (!consumes) return false;
  }
  return true;
}

bool inv_condvar_guards(const CirArtifact& art, const Cvn& net) {
  auto wait_sites = [&](const std::string& cv) {
    std::vector<std::string> sids;
    for (const auto& fn : art.functions) {
      for (const auto& st : fn.body) {
        if (st.op.kind == OpKind::Wait && st.op.target == cv) {
          sids.push_back(st.sid);
        }
      }
    }
    return sids;
  };
  const Expr one = Expr::lit(Value::integer(1));
  const Expr zero = Expr::lit(Value::integer(0));
  for (const auto& t : net.transitions) {
    const Statement* st = find_statement(art, t.anchor);
    switch (t.tag) {
      case TransitionTag::WaitEnter: {
        const std::string nw = waiter_count_var(st->op.target);
        std::vector<VarUpdate> want = {
            {nw, Expr::bin(ArithOp::Add, Expr::ref(nw), one)},
            {notify_all_flag_var(st->sid), Expr::lit(Value::boolean(false))}};
        if (t.guard.has_value() || t.updates != want) return false;
        break;
      }
      case TransitionTag::Wake1: {
        const std::string nw = waiter_count_var(st->op.target);
        std::vector<VarUpdate> want = {
            {nw, Expr::bin(ArithOp::Sub, Expr::ref(nw), one)}};
        if (t.guard.has_value() || t.updates != want) return false;
        break;
      }
      case TransitionTag::WakeA: {
        const std::string nw = waiter_count_var(st->op.target);
        const std::string na = notify_all_flag_var(st->sid);
        BoolExpr want_guard = BoolExpr::cmp(CmpOp::Eq, Expr::ref(na),
                                            Expr::lit(Value::boolean(true)));
        std::vector<VarUpdate> want = {
            {nw, Expr::bin(ArithOp::Sub, Expr::ref(nw), one)},
            {na, Expr::lit(Value::boolean(false))}};
        if (t.guard != want_guard || t.updates != want) return false;
        break;
      }
      case TransitionTag::Reacquire:
        if (t.guard.has_value() || !t.updates.empty()) return false;
        break;
      case TransitionTag::NotifySuccess: {
        BoolExpr want = BoolExpr::cmp(
            CmpOp::Gt, Expr::ref(waiter_count_var(st->op.target)), zero);
        if (t.guard != want || !t.updates.empty()) return false;
        break;
      }
      case TransitionTag::NotifyAllSuccess: {
        BoolExpr want_guard = BoolExpr::cmp(
            CmpOp::Gt, Expr::ref(waiter_count_var(st->op.target)), zero);
        std::vector<VarUpdate> want;
        for (const auto& sid : wait_sites(st->op.target)) {
          want.push_back({notify_all_flag_var(sid),
                          Expr::lit(Value::boolean(true))});
        }
        if (t.guard != want_guard || t.updates != want) return false;
        break;
      }
      case TransitionTag::NotifyLost:
      case TransitionTag::NotifyAllLost: {
        BoolExpr want = BoolExpr::cmp(
            CmpOp::Eq, Expr::ref(waiter_count_var(st->op.target)), zero);
        if (t.guard != want || !t.updates.empty()) return false;
        break;
      }
      default:
        break;
    }
  }
  return true;
}

Outcome criterion_structural_invariants() {
  Outcome out;
  using Check = bool (*)(const CirArtifact&, const Cvn&);
  const std::array<std::pair<const char*, Check>, 9> checks = {{
      {"statement coverage", inv_statement_coverage},
      {"transition anchors", inv_anchors},
      {"initial marking", inv_initial_marking},
      {"resource place count", inv_resource_place_count},
      {"store contents", inv_store_contents},
      {"nonempty inputs", inv_nonempty_inputs},
      {"spawn outputs", inv_spawn_outputs},
      {"join inputs", inv_join_inputs},
      {"condvar guards", inv_condvar_guards},
  }};
  int passed = 0;
  for (int pattern = 1; pattern <= 9; ++pattern) {
    const Bundle& b = bundle(fixture_of(pattern));
    for (const auto& [label, check] : checks) {
      bool ok = check(b.artifact, b.net);
      out.expect(ok, "pattern " + std::to_string(pattern) + ": " + label);
      passed += ok;
    }
  }
  out.note(std::to_string(passed) + "/81 invariant checks hold");
  return out;
}

// ---------------------------------------------------------------------------
// 4. Reference sizes and runtime.

Outcome criterion_reference_sizes() {
  Outcome out;
  const Bundle& p2 = bundle("pattern2.cir");

  // Per-statement expansion of the running example.
  auto arity = [&](const std::string& sid) {
    std::size_t n = 0;
    for (const auto& t : p2.net.transitions) {
      n += t.name.rfind(sid + ":", 0) == 0;
    }
    return n;
  };
  out.expect(arity("w2") == 4, "wait site expands to 4 transitions");
  out.expect(arity("n2") == 2, "notify_one expands to 2 transitions");
  for (const std::string sid : {"w1", "w3", "n1", "n3", "n4"}) {
    out.expect(arity(sid) == 1, sid + " expands to a single transition");
  }

  // Size comparison against the published reference table. Fixtures are
  // reconstructed, so deltas are reported rather than enforced.
  struct Ref {
    int pattern, places, transitions, states;
  };
  const std::vector<Ref> reference = {
      {1, 10, 14, 24}, {2, 14, 20, 42}, {3, 12, 16, 36},
      {4, 18, 28, 218}, {5, 14, 18, 112}, {6, 20, 32, 84},
      {7, 12, 14, 64}, {8, 8, 12, 18}, {9, 10, 14, 32},
  };
  auto loose = [](std::size_t mine, int ref) {
    return std::abs(static_cast<double>(mine) - ref) <= kSizeBandLoose * ref;
  };
  auto tight = [](std::size_t mine, int ref) {
    return std::abs(static_cast<long>(mine) - ref) <= kSizeBandTight;
  };
  for (const auto& r : reference) {
    const Bundle& b = bundle(fixture_of(r.pattern));
    const std::size_t p = b.net.places.size();
    const std::size_t t = b.net.transitions.size();
    const std::size_t s = b.analysis.space.states.size();
    const bool p_ok = r.pattern == 2 ? tight(p, r.places) : loose(p, r.places);
    const bool t_ok =
        r.pattern == 2 ? tight(t, r.transitions) : loose(t, r.transitions);
    const bool s_ok = loose(s, r.states);
    out.note("pattern " + std::to_string(r.pattern) + ": places " +
             std::to_string(p) + "/" + std::to_string(r.places) +
             (p_ok ? "" : " (diverges)") + ", transitions " +
             std::to_string(t) + "/" + std::to_string(r.transitions) +
             (t_ok ? "" : " (diverges)") + ", states " + std::to_string(s) +
             "/" + std::to_string(r.states) + (s_ok ? "" : " (diverges)"));
    out.expect(b.elapsed_ms < kMaxAnalysisMs,
               "pattern " + std::to_string(r.pattern) + " runtime " +
                   std::to_string(b.elapsed_ms) + " ms exceeds 1 s");
  }
  return out;
}

// ---------------------------------------------------------------------------
// 5. Oracle equivalence.

Outcome criterion_oracle_equivalence() {
  Outcome out;
  const std::vector<std::string> scope = {
      "pattern1.cir", "pattern2.cir", "pattern3.cir", "pattern4.cir",
      "pattern5.cir", "pattern6.cir", "pattern7.cir", "pattern8.cir",
      "fixed_pattern1.cir", "fixed_pattern2.cir", "regression_a.cir",
      "regression_b.cir"};
  int agreed = 0;
  for (const auto& name : scope) {
    const Bundle& b = bundle(name);
    oracle::Result ref = oracle::run(b.artifact);

    bool net_deadlock = false;
    for (const auto& f : b.analysis.bugs) {
      net_deadlock |= f.kind == BugKind::Deadlock ||
                      f.kind == BugKind::ChannelBlock;
    }
    std::vector<std::string> net_goals;
    for (const auto& g : b.analysis.goals) {
      if (g.reachable) net_goals.push_back(g.goal_id);
    }
    std::sort(net_goals.begin(), net_goals.end());
    std::vector<std::string> ref_goals = ref.reachable_goals;
    std::sort(ref_goals.begin(), ref_goals.end());

    bool ok = net_deadlock == ref.deadlock && net_goals == ref_goals;
    out.expect(ok, name + ": verdicts disagree (oracle deadlock=" +
                       std::to_string(ref.deadlock) + ", net=" +
                       std::to_string(net_deadlock) + ")");
    agreed += ok;
  }
  out.note(std::to_string(agreed) + "/" + std::to_string(scope.size()) +
           " fixtures agree on deadlock existence and satisfiable goals");
  return out;
}

// ---------------------------------------------------------------------------
// 6. Goal-regression detection.

Outcome criterion_goal_regressions() {
  Outcome out;
  struct Expected {
    const char* fixture;
    const char* goal;
    const char* requirement;
  };
  for (const auto& e : std::vector<Expected>{
           {"regression_a.cir", "G1", "V[sent] = true"},
           {"regression_b.cir", "G2", "V[ready] = true"}}) {
    const Bundle& b = bundle(e.fixture);  // bundle() asserts a clean check
    out.expect(!b.analysis.has_definite_bug(),
               std::string(e.fixture) + " has a definite bug");
    out.expect(!b.analysis.goals_reachable(),
               std::string(e.fixture) + " goals unexpectedly reachable");
    std::vector<GoalCheck> unreachable;
    for (const auto& g : b.analysis.goals) {
      if (!g.reachable) unreachable.push_back(g);
    }
    bool named = unreachable.size() == 1 && unreachable[0].goal_id == e.goal &&
                 goal_requirement_text(unreachable[0]) == e.requirement;
    out.expect(named, std::string(e.fixture) + " does not name " + e.goal +
                          " / " + e.requirement);
    if (named) {
      std::string report = render_goal_violation(unreachable, b.artifact, 1);
      out.expect(report.find(std::string("UNREACHABLE GOAL: ") + e.goal) !=
                         std::string::npos &&
                     report.find(e.requirement) != std::string::npos,
                 std::string(e.fixture) + " violation report is incomplete");
      out.note(std::string(e.fixture) + " rejected: " + e.goal + " misses " +
               e.requirement);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// 7. Guard algebra.

Outcome criterion_guard_algebra() {
  Outcome out;
  const Truth3 T = Truth3::True, F = Truth3::False, U = Truth3::Unknown;

  // The four identities that define the unknown value's behavior.
  out.expect(kleene_and(U, F) == F, "unknown AND false");
  out.expect(kleene_and(U, T) == U, "unknown AND true");
  out.expect(kleene_or(U, T) == T, "unknown OR true");
  out.expect(kleene_or(U, F) == U, "unknown OR false");

  // Full tables: 9 conjunction cells, 9 disjunction cells, 3 negations.
  const Truth3 all[] = {T, F, U};
  const Truth3 and_table[3][3] = {{T, F, U}, {F, F, F}, {U, F, U}};
  const Truth3 or_table[3][3] = {{T, T, T}, {T, F, U}, {T, U, U}};
  const Truth3 not_table[3] = {F, T, U};
  int cells = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      cells += kleene_and(all[i], all[j]) == and_table[i][j];
      cells += kleene_or(all[i], all[j]) == or_table[i][j];
    }
    cells += kleene_not(all[i]) == not_table[i];
  }
  out.expect(cells == 21, "truth tables");
  out.note(std::to_string(cells) + "/21 cells match");

  // The evaluator composes the same algebra over expression trees.
  Valuation v;
  v["x"] = Value::top();
  BoolExpr unknown = BoolExpr::cmp(CmpOp::Eq, Expr::ref("x"),
                                   Expr::lit(Value::integer(1)));
  out.expect(eval_guard(unknown, v) == U, "top comparison is unknown");
  out.expect(eval_guard(BoolExpr::conj(unknown, BoolExpr::falsec()), v) == F,
             "evaluator: unknown AND false");
  out.expect(eval_guard(BoolExpr::disj(unknown, BoolExpr::truec()), v) == T,
             "evaluator: unknown OR true");
  return out;
}

// ---------------------------------------------------------------------------
// 8. Loop determinism.

Outcome criterion_loop_determinism() {
  Outcome out;
  for (const auto& [pattern, dir] :
       std::vector<std::pair<std::string, std::string>>{
           {"pattern1.cir", "replay/p1"}, {"pattern2.cir", "replay/p2"}}) {
    LoopConfig cfg;
    cfg.backend = "replay:" + testing::fixture_path(dir);
    const std::string seed = testing::fixture_text(pattern);
    LoopTranscript first = run_loop(seed, cfg);
    LoopTranscript second = run_loop(seed, cfg);
    out.expect(first.outcome == LoopOutcome::Accepted, pattern + " not accepted");
    out.expect(first.tier_rounds(Tier::Tier3) == 1,
               pattern + " used " +
                   std::to_string(first.tier_rounds(Tier::Tier3)) +
                   " behavioral rounds instead of 1");
    out.expect(transcript_to_json(first) == transcript_to_json(second),
               pattern + " transcripts differ between runs");
    out.note(pattern + ": accepted in 1 behavioral round, byte-identical reruns");
  }
  return out;
}

// ---------------------------------------------------------------------------
// 9. Warning semantics.

Outcome criterion_warning_semantics() {
  Outcome out;
  const Bundle& p5 = bundle("pattern5.cir");
  out.expect(p5.report.accepted, "pattern 5 is not accepted");
  out.expect(!p5.report.findings.empty() &&
                 p5.report.findings.front().kind == BugKind::Livelock &&
                 !p5.report.findings.front().definite,
             "pattern 5 lead finding is not a livelock warning");
  out.expect(p5.report.goals.size() == 2, "pattern 5 should carry two goals");
  for (const auto& g : p5.report.goals) {
    out.expect(g.reachable, "pattern 5 goal " + g.goal_id + " unreachable");
  }
  out.expect(!p5.report.livelock_immune, "pattern 5 claims livelock immunity");
  for (int pattern = 7; pattern <= 9; ++pattern) {
    const Bundle& b = bundle(fixture_of(pattern));
    out.expect(b.report.livelock_immune,
               "pattern " + std::to_string(pattern) + " not marked immune");
    out.expect(b.report.accepted,
               "pattern " + std::to_string(pattern) + " not accepted");
  }
  out.note("pattern 5 accepted with warning; baselines marked livelock-immune");
  return out;
}

}  // namespace

int main() {
  struct Entry {
    const char* label;
    Outcome (*run)();
  };
  const std::vector<Entry> criteria = {
      {"running-example fidelity", criterion_running_example},
      {"pattern matrix detection", criterion_pattern_matrix},
      {"structural invariants", criterion_structural_invariants},
      {"reference sizes", criterion_reference_sizes},
      {"oracle equivalence", criterion_oracle_equivalence},
      {"goal-regression detection", criterion_goal_regressions},
      {"guard algebra", criterion_guard_algebra},
      {"loop determinism", criterion_loop_determinism},
      {"warning semantics", criterion_warning_semantics},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.details.push_back(std::string("exception: ") + e.what());
    }
    failures += !out.pass;
    std::cout << "criterion " << i + 1 << " (" << criteria[i].label
              << "): " << (out.pass ? "pass" : "FAIL") << "\n";
    for (const auto& d : out.details) {
      std::cout << "    " << d << "\n";
    }
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size()
            << " criteria passed\n";
  return failures;
}
