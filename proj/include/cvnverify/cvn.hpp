#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cvnverify/expr.hpp"

namespace cvnverify {

// Weighted place/transition net over a finite value store. Transitions carry
// three-valued guards and variable updates; a transition is enabled when its
// input arcs are covered and its guard does not evaluate to false, so an
// unknown guard keeps both branches live.

enum class PlaceKind { Control, Return, Resource, Wait, Reacquire };

std::string to_string(PlaceKind k);

struct Place {
  int id = -1;
  std::string name;
  PlaceKind kind = PlaceKind::Control;
  std::string function;  // owner for control/return places
  std::string sid;       // statement for control places and wait sites
  std::string resource;  // declared name for resource places

  bool operator==(const Place&) const = default;
};

enum class TransitionTag {
  Sequential,
  Lock,
  Unlock,
  Acquire,
  Release,
  ReadLock,
  WriteLock,
  ReadUnlock,
  WriteUnlock,
  Send,
  Recv,
  VarWrite,
  AtomicStore,
  CasSuccess,
  CasFailure,
  WaitEnter,
  Wake1,
  WakeA,
  Reacquire,
  NotifySuccess,
  NotifyLost,
  NotifyAllSuccess,
  NotifyAllLost,
  BranchTrue,
  BranchFalse,
  SwitchArm,
  SwitchDefault,
  Spawn,
  Join,
  Return,
  SummaryCall,
};

std::string to_string(TransitionTag t);

struct VarUpdate {
  std::string var;
  Expr value;  // evaluated against the pre-firing valuation

  bool operator==(const VarUpdate&) const = default;
};

struct Transition {
  int id = -1;
  std::string name;      // unique within the net
  std::string anchor;    // originating statement id; empty for synthesized ones
  std::string function;  // owning function, empty for synthesized ones
  TransitionTag tag = TransitionTag::Sequential;
  bool hidden = false;  // kept out of user-facing traces
  std::vector<std::pair<int, int>> inputs;   // (place id, weight)
  std::vector<std::pair<int, int>> outputs;  // (place id, weight)
  std::optional<BoolExpr> guard;             // absent means always true
  std::vector<VarUpdate> updates;

  bool operator==(const Transition&) const = default;
};

struct Cvn {
  std::vector<Place> places;            // ids are vector indices
  std::vector<Transition> transitions;  // ids are vector indices
  std::vector<std::int64_t> initial_marking;
  Valuation initial_valuation;
  int thread_bound = 1;

  int place_id(const std::string& name) const;
  const Place* find_place(const std::string& name) const;
};

struct NetState {
  std::vector<std::int64_t> marking;
  Valuation valuation;

  bool operator==(const NetState&) const = default;
};

struct NetStateHash {
  std::size_t operator()(const NetState& s) const;
};

NetState initial_state(const Cvn& net);

bool arcs_covered(const Transition& t, const NetState& s);
Truth3 guard_value(const Transition& t, const NetState& s);
bool transition_enabled(const Transition& t, const NetState& s);
NetState fire_transition(const Cvn& net, const Transition& t, const NetState& s);

// Deterministic renderings of the net itself.
std::string net_to_dot(const Cvn& net);
std::string net_to_json(const Cvn& net);

}  // namespace cvnverify
