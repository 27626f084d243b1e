#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cvnverify/analyze.hpp"
#include "cvnverify/checker.hpp"
#include "cvnverify/cir.hpp"
#include "cvnverify/cvn.hpp"

namespace cvnverify {

// Where a function's token sits in the bug state.
struct ThreadState {
  std::string function;
  std::string sid;     // empty once returned
  std::string status;  // runnable | blocked | waiting | woken | returned
};

struct WaitRelation {
  std::string function;
  std::string target;  // resource, condvar, or "completion of f"
  std::string detail;  // e.g. "condition wait at w2", "lock at a2"
};

// Repair-oriented payload distilled from one finding: what failed, the path
// that reaches it, the stuck configuration, a small artifact slice around the
// blamed statements, and a fixed directional hint.
struct Diagnostic {
  BugKind kind = BugKind::Deadlock;
  bool definite = true;
  std::vector<std::string> trace;  // anchors, annotated, helper steps removed
  std::vector<std::string> blame;
  std::vector<ThreadState> threads;
  std::vector<std::pair<std::string, std::string>> condvar_status;
  std::vector<std::pair<std::string, std::string>> variables;
  std::vector<std::pair<std::string, std::vector<std::string>>> held;
  std::vector<std::string> waiting;  // function names, declaration order
  std::vector<WaitRelation> relations;
  std::vector<std::pair<std::string, std::string>> slice;  // sid -> operation
  std::vector<std::string> relevant_resources;             // "mutex m0", ...
  std::string diagnosis;
  std::string hint;
  std::string starved_function;
  std::size_t cycle_size = 0;
};

// Deterministic single-bug policy: kind priority first (deadlock, signal
// loss, channel block, livelock, starvation), then shortest visible trace,
// then lexicographic comparison of the annotated trace. Requires a nonempty
// list; permutation of the input never changes the selection.
const BugFinding& select_bug(const std::vector<BugFinding>& findings,
                             const Cvn& net, const CirArtifact& artifact);

Diagnostic build_diag(const BugFinding& finding, const StateSpace& space,
                      const Cvn& net, const CirArtifact& artifact);

std::string render_repair_prompt(const Diagnostic& d);

std::string render_goal_violation(const std::vector<GoalCheck>& unreachable,
                                  const CirArtifact& artifact, int round);

// "V[ready] = true", "worker completed", "m0 available", or the conjunction
// wording, for the goal's failing requirement.
std::string goal_requirement_text(const GoalCheck& check);

// Producer-operation hint for an unmet goal requirement.
std::string goal_hint_text(const GoalCheck& check, const CirArtifact& artifact);

struct VerdictReport {
  std::vector<Finding> static_errors;
  std::vector<Diagnostic> findings;  // priority order; the selected bug first
  std::vector<GoalCheck> goals;
  bool accepted = false;
  int rounds_used = 0;
  bool livelock_immune = true;
  std::vector<std::string> notes;
  double total_ms = 0.0;
  std::size_t state_count = 0;

  bool has_definite() const {
    for (const auto& d : findings) {
      if (d.definite) return true;
    }
    return false;
  }
};

VerdictReport build_report(const CheckResult& check,
                           const AnalysisResult* analysis, const Cvn* net,
                           const CirArtifact& artifact);

std::string report_to_json(const VerdictReport& r);
std::string report_to_text(const VerdictReport& r);

}  // namespace cvnverify
