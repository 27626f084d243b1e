#include <sstream>

#include <json.hpp>

#include "cvnverify/cvn.hpp"

namespace cvnverify {

std::string to_string(PlaceKind k) {
  switch (k) {
    case PlaceKind::Control: return "control";
    case PlaceKind::Return: return "return";
    case PlaceKind::Resource: return "resource";
    case PlaceKind::Wait: return "wait";
    case PlaceKind::Reacquire: return "reacquire";
  }
  return "control";
}

std::string to_string(TransitionTag t) {
  switch (t) {
    case TransitionTag::Sequential: return "Sequential";
    case TransitionTag::Lock: return "Lock";
    case TransitionTag::Unlock: return "Unlock";
    case TransitionTag::Acquire: return "Acquire";
    case TransitionTag::Release: return "Release";
    case TransitionTag::ReadLock: return "ReadLock";
    case TransitionTag::WriteLock: return "WriteLock";
    case TransitionTag::ReadUnlock: return "ReadUnlock";
    case TransitionTag::WriteUnlock: return "WriteUnlock";
    case TransitionTag::Send: return "Send";
    case TransitionTag::Recv: return "Recv";
    case TransitionTag::VarWrite: return "VarWrite";
    case TransitionTag::AtomicStore: return "AtomicStore";
    case TransitionTag::CasSuccess: return "CasSuccess";
    case TransitionTag::CasFailure: return "CasFailure";
    case TransitionTag::WaitEnter: return "WaitEnter";
    case TransitionTag::Wake1: return "Wake1";
    case TransitionTag::WakeA: return "WakeA";
    case TransitionTag::Reacquire: return "Reacquire";
    case TransitionTag::NotifySuccess: return "NotifySuccess";
    case TransitionTag::NotifyLost: return "NotifyLost";
    case TransitionTag::NotifyAllSuccess: return "NotifyAllSuccess";
    case TransitionTag::NotifyAllLost: return "NotifyAllLost";
    case TransitionTag::BranchTrue: return "BranchTrue";
    case TransitionTag::BranchFalse: return "BranchFalse";
    case TransitionTag::SwitchArm: return "SwitchArm";
    case TransitionTag::SwitchDefault: return "SwitchDefault";
    case TransitionTag::Spawn: return "Spawn";
    case TransitionTag::Join: return "Join";
    case TransitionTag::Return: return "Return";
    case TransitionTag::SummaryCall: return "SummaryCall";
  }
  return "Sequential";
}

int Cvn::place_id(const std::string& name) const {
  for (const auto& p : places) {
    if (p.name == name) return p.id;
  }
  return -1;
}

const Place* Cvn::find_place(const std::string& name) const {
  int id = place_id(name);
  return id < 0 ? nullptr : &places[static_cast<size_t>(id)];
}

std::size_t NetStateHash::operator()(const NetState& s) const {
  std::size_t seed = s.marking.size();
  auto mix = [&seed](std::size_t h) {
    seed ^= h + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  };
  for (auto m : s.marking) mix(std::hash<std::int64_t>{}(m));
  for (const auto& [name, value] : s.valuation) {
    mix(std::hash<std::string>{}(name));
    mix(hash_value(value));
  }
  return seed;
}

NetState initial_state(const Cvn& net) {
  return NetState{net.initial_marking, net.initial_valuation};
}

bool arcs_covered(const Transition& t, const NetState& s) {
  for (const auto& [place, weight] : t.inputs) {
    if (s.marking[static_cast<size_t>(place)] < weight) return false;
  }
  return true;
}

Truth3 guard_value(const Transition& t, const NetState& s) {
  if (!t.guard) return Truth3::True;
  return eval_guard(*t.guard, s.valuation);
}

bool transition_enabled(const Transition& t, const NetState& s) {
  return arcs_covered(t, s) && guard_value(t, s) != Truth3::False;
}

NetState fire_transition(const Cvn& net, const Transition& t, const NetState& s) {
  (void)net;
  NetState next = s;
  for (const auto& [place, weight] : t.inputs) {
    next.marking[static_cast<size_t>(place)] -= weight;
  }
  for (const auto& [place, weight] : t.outputs) {
    next.marking[static_cast<size_t>(place)] += weight;
  }
  // all updates read the pre-firing valuation
  std::vector<std::pair<std::string, Value>> staged;
  staged.reserve(t.updates.size());
  for (const auto& u : t.updates) {
    staged.emplace_back(u.var, eval_expr(u.value, s.valuation));
  }
  for (auto& [var, value] : staged) {
    next.valuation[var] = std::move(value);
  }
  return next;
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string net_to_dot(const Cvn& net) {
  std::ostringstream os;
  os << "digraph cvn {\n";
  os << "  rankdir=LR;\n";
  os << "  node [fontsize=10];\n";
  for (const auto& p : net.places) {
    std::string label = p.name;
    std::int64_t tokens = net.initial_marking[static_cast<size_t>(p.id)];
    if (tokens > 0) label += "\\n" + std::to_string(tokens);
    os << "  p" << p.id << " [shape=ellipse, label=\"" << dot_escape(label)
       << "\"];\n";
  }
  for (const auto& t : net.transitions) {
    std::string label = t.name;
    if (t.guard) label += "\\n[" + to_string(*t.guard) + "]";
    os << "  t" << t.id << " [shape=box, label=\"" << dot_escape(label) << "\"];\n";
  }
  for (const auto& t : net.transitions) {
    for (const auto& [place, weight] : t.inputs) {
      os << "  p" << place << " -> t" << t.id;
      if (weight != 1) os << " [label=\"" << weight << "\"]";
      os << ";\n";
    }
    for (const auto& [place, weight] : t.outputs) {
      os << "  t" << t.id << " -> p" << place;
      if (weight != 1) os << " [label=\"" << weight << "\"]";
      os << ";\n";
    }
  }
  os << "}\n";
  return os.str();
}

std::string net_to_json(const Cvn& net) {
  nlohmann::ordered_json j;
  j["thread_bound"] = net.thread_bound;
  j["places"] = nlohmann::ordered_json::array();
  for (const auto& p : net.places) {
    nlohmann::ordered_json jp;
    jp["id"] = p.id;
    jp["name"] = p.name;
    jp["kind"] = to_string(p.kind);
    jp["initial"] = net.initial_marking[static_cast<size_t>(p.id)];
    j["places"].push_back(std::move(jp));
  }
  j["transitions"] = nlohmann::ordered_json::array();
  for (const auto& t : net.transitions) {
    nlohmann::ordered_json jt;
    jt["id"] = t.id;
    jt["name"] = t.name;
    jt["tag"] = to_string(t.tag);
    jt["anchor"] = t.anchor;
    jt["hidden"] = t.hidden;
    jt["inputs"] = nlohmann::ordered_json::array();
    for (const auto& [place, weight] : t.inputs) {
      jt["inputs"].push_back({{"place", place}, {"weight", weight}});
    }
    jt["outputs"] = nlohmann::ordered_json::array();
    for (const auto& [place, weight] : t.outputs) {
      jt["outputs"].push_back({{"place", place}, {"weight", weight}});
    }
    if (t.guard) {
      jt["guard"] = to_string(*t.guard);
    } else {
      jt["guard"] = nullptr;
    }
    jt["updates"] = nlohmann::ordered_json::array();
    for (const auto& u : t.updates) {
      jt["updates"].push_back({{"var", u.var}, {"value", to_string(u.value)}});
    }
    j["transitions"].push_back(std::move(jt));
  }
  j["initial_valuation"] = nlohmann::ordered_json::object();
  for (const auto& [name, value] : net.initial_valuation) {
    j["initial_valuation"][name] = to_string(value);
  }
  return j.dump(2) + "\n";
}

}  // namespace cvnverify
