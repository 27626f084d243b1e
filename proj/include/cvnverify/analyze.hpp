#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvnverify/cir.hpp"
#include "cvnverify/cvn.hpp"

namespace cvnverify {

inline constexpr std::size_t kDefaultStateBudget = 1'000'000;

struct StateBudgetExceeded : std::runtime_error {
  std::size_t budget;
  explicit StateBudgetExceeded(std::size_t b)
      : std::runtime_error("state budget of " + std::to_string(b) + " exceeded"),
        budget(b) {}
};

struct Edge {
  int src = -1;
  int transition = -1;
  int dst = -1;

  bool operator==(const Edge&) const = default;
};

// Breadth-first reachability graph. State 0 is the initial state; transitions
// are tried in id order, so the graph layout is deterministic.
struct StateSpace {
  std::vector<NetState> states;
  std::vector<Edge> edges;  // in discovery order
  std::vector<std::vector<std::pair<int, int>>> succ;  // (transition, dst) per state
  std::vector<int> pred_state;       // first-discovery predecessor, -1 at root
  std::vector<int> pred_transition;  // transition taken at first discovery

  // transition ids along the discovery path from the root
  std::vector<int> path_to(int state) const;
};

StateSpace explore(const Cvn& net, std::size_t state_budget = kDefaultStateBudget);

enum class BugKind { Deadlock, SignalLoss, ChannelBlock, Livelock, Starvation };

std::string to_string(BugKind k);

struct BugFinding {
  BugKind kind = BugKind::Deadlock;
  bool definite = true;
  int state = -1;           // dead state, stranded state, or SCC entry
  std::vector<int> witness; // transition ids from the initial state
  int lost_transition = -1; // SignalLoss: the lost-notification transition
  std::size_t lost_index = 0;  // its position within the witness
  std::vector<int> scc_states;     // Livelock / Starvation
  std::string starved_function;    // Starvation
};

enum class GoalFailure { None, Completion, Availability, Variable, Conjunction };

struct GoalCheck {
  std::string goal_id;
  bool reachable = false;
  GoalFailure failure = GoalFailure::None;
  std::string failed_name;   // function, resource, or variable
  Value failed_value;        // Variable failures: the expected value
};

struct AnalysisResult {
  StateSpace space;
  std::vector<BugFinding> bugs;
  std::vector<std::string> notes;  // e.g. harmless lost notifications
  bool livelock_immune = true;
  std::vector<GoalCheck> goals;

  bool has_definite_bug() const {
    for (const auto& b : bugs) {
      if (b.definite) return true;
    }
    return false;
  }
  bool goals_reachable() const {
    for (const auto& g : goals) {
      if (!g.reachable) return false;
    }
    return true;
  }
};

AnalysisResult analyze_net(const CirArtifact& artifact, const Cvn& net,
                           std::size_t state_budget = kDefaultStateBudget);

// Deterministic exports of an explored space.
std::string space_to_json(const Cvn& net, const StateSpace& space);
std::string space_to_dot(const Cvn& net, const StateSpace& space);

}  // namespace cvnverify
