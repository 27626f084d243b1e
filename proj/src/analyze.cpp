#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "cvnverify/analyze.hpp"
#include "cvnverify/translate.hpp"

namespace cvnverify {

std::string to_string(BugKind k) {
  switch (k) {
    case BugKind::Deadlock: return "deadlock";
    case BugKind::SignalLoss: return "signal_loss";
    case BugKind::ChannelBlock: return "channel_block";
    case BugKind::Livelock: return "livelock";
    case BugKind::Starvation: return "starvation";
  }
  return "deadlock";
}

std::vector<int> StateSpace::path_to(int state) const {
  std::vector<int> out;
  for (int s = state; pred_state[static_cast<size_t>(s)] >= 0;
       s = pred_state[static_cast<size_t>(s)]) {
    out.push_back(pred_transition[static_cast<size_t>(s)]);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

StateSpace explore(const Cvn& net, std::size_t state_budget) {
  StateSpace space;
  std::unordered_map<NetState, int, NetStateHash> index;

  NetState init = initial_state(net);
  space.states.push_back(init);
  space.succ.emplace_back();
  space.pred_state.push_back(-1);
  space.pred_transition.push_back(-1);
  index.emplace(std::move(init), 0);

  std::deque<int> queue{0};
  while (!queue.empty()) {
    int sid = queue.front();
    queue.pop_front();
    // the state vector may grow below; copy the marking holder cheaply by id
    for (const auto& t : net.transitions) {
      if (!transition_enabled(t, space.states[static_cast<size_t>(sid)])) continue;
      NetState next =
          fire_transition(net, t, space.states[static_cast<size_t>(sid)]);
      auto it = index.find(next);
      int dst;
      if (it == index.end()) {
        if (space.states.size() >= state_budget) {
          throw StateBudgetExceeded(state_budget);
        }
        dst = static_cast<int>(space.states.size());
        space.states.push_back(next);
        space.succ.emplace_back();
        space.pred_state.push_back(sid);
        space.pred_transition.push_back(t.id);
        index.emplace(std::move(next), dst);
        queue.push_back(dst);
      } else {
        dst = it->second;
      }
      space.edges.push_back(Edge{sid, t.id, dst});
      space.succ[static_cast<size_t>(sid)].emplace_back(t.id, dst);
    }
  }
  return space;
}

namespace {

// location places are where a thread's token can sit while it is still live
bool is_location(PlaceKind k) {
  return k == PlaceKind::Control || k == PlaceKind::Wait ||
         k == PlaceKind::Reacquire;
}

struct Analyzer {
  const CirArtifact& art;
  const Cvn& net;
  const StateSpace& space;
  AnalysisResult& result;

  std::set<int> channel_places;

  void run() {
    for (const auto& r : art.resources) {
      if (r.kind == ResourceKind::Channel) {
        int id = net.place_id(resource_place_name(r.name));
        if (id >= 0) channel_places.insert(id);
      }
    }
    detect_dead_states();
    detect_signal_loss();
    detect_scc_warnings();
    check_goals();
  }

  bool has_control_token(const NetState& s) const {
    for (const auto& p : net.places) {
      if (p.kind == PlaceKind::Control && s.marking[static_cast<size_t>(p.id)] > 0) {
        return true;
      }
    }
    return false;
  }

  bool all_returned(const NetState& s) const {
    for (const auto& p : net.places) {
      if (is_location(p.kind) && s.marking[static_cast<size_t>(p.id)] > 0) {
        return false;
      }
    }
    return true;
  }

  // A transition held up only by a channel token marks the dead state as a
  // channel block rather than a plain deadlock.
  bool blocked_on_channel(const NetState& s) const {
    for (const auto& t : net.transitions) {
      if (guard_value(t, s) == Truth3::False) continue;
      bool channel_short = false;
      bool rest_covered = true;
      for (const auto& [place, weight] : t.inputs) {
        bool covered = s.marking[static_cast<size_t>(place)] >= weight;
        if (channel_places.count(place)) {
          if (!covered) channel_short = true;
        } else if (!covered) {
          rest_covered = false;
          break;
        }
      }
      if (rest_covered && channel_short) return true;
    }
    return false;
  }

  void detect_dead_states() {
    for (size_t i = 0; i < space.states.size(); ++i) {
      if (!space.succ[i].empty()) continue;
      const NetState& s = space.states[i];
      if (!has_control_token(s)) continue;  // parked or completed threads only
      BugFinding f;
      f.kind = blocked_on_channel(s) ? BugKind::ChannelBlock : BugKind::Deadlock;
      f.state = static_cast<int>(i);
      f.witness = space.path_to(static_cast<int>(i));
      result.bugs.push_back(std::move(f));
    }
  }

  // --- signal loss -----------------------------------------------------------

  // states from which some wake of the given wait site is still reachable
  std::vector<char> can_reach_wake(const std::string& site) const {
    std::vector<char> mark(space.states.size(), 0);
    std::vector<int> work;
    std::set<int> wake_ids;
    for (const auto& t : net.transitions) {
      if (t.anchor == site &&
          (t.tag == TransitionTag::Wake1 || t.tag == TransitionTag::WakeA)) {
        wake_ids.insert(t.id);
      }
    }
    // reversed adjacency
    std::vector<std::vector<int>> rev(space.states.size());
    for (const auto& e : space.edges) {
      rev[static_cast<size_t>(e.dst)].push_back(e.src);
      if (wake_ids.count(e.transition) && !mark[static_cast<size_t>(e.src)]) {
        mark[static_cast<size_t>(e.src)] = 1;
        work.push_back(e.src);
      }
    }
    while (!work.empty()) {
      int s = work.back();
      work.pop_back();
      for (int p : rev[static_cast<size_t>(s)]) {
        if (!mark[static_cast<size_t>(p)]) {
          mark[static_cast<size_t>(p)] = 1;
          work.push_back(p);
        }
      }
    }
    return mark;
  }

  void detect_signal_loss() {
    for (const auto& t : net.transitions) {
      if (t.tag != TransitionTag::NotifyLost && t.tag != TransitionTag::NotifyAllLost) {
        continue;
      }
      std::vector<const Edge*> fired;
      for (const auto& e : space.edges) {
        if (e.transition == t.id) fired.push_back(&e);
      }
      if (fired.empty()) continue;

      // wait sites of the same condvar
      const std::string& cv = anchored_target(t);
      std::vector<int> wait_place_ids;
      std::vector<std::vector<char>> wake_masks;
      for (const auto& fn : art.functions) {
        for (const auto& st : fn.body) {
          if (st.op.kind == OpKind::Wait && st.op.target == cv) {
            int wp = net.place_id(wait_place_name(st.sid));
            if (wp >= 0) {
              wait_place_ids.push_back(wp);
              wake_masks.push_back(can_reach_wake(st.sid));
            }
          }
        }
      }

      auto stranded = [&](int state) {
        const NetState& s = space.states[static_cast<size_t>(state)];
        for (size_t k = 0; k < wait_place_ids.size(); ++k) {
          if (s.marking[static_cast<size_t>(wait_place_ids[k])] > 0 &&
              !wake_masks[k][static_cast<size_t>(state)]) {
            return true;
          }
        }
        return false;
      };

      // choose the shortest witness over all firings of this transition
      std::optional<BugFinding> best;
      for (const Edge* e : fired) {
        auto tail = shortest_path_to(e->dst, stranded);
        if (!tail) continue;
        std::vector<int> witness = space.path_to(e->src);
        std::size_t lost_index = witness.size();
        witness.push_back(t.id);
        witness.insert(witness.end(), tail->second.begin(), tail->second.end());
        if (!best || witness.size() < best->witness.size()) {
          BugFinding f;
          f.kind = BugKind::SignalLoss;
          f.state = tail->first;
          f.witness = std::move(witness);
          f.lost_transition = t.id;
          f.lost_index = lost_index;
          best = std::move(f);
        }
      }
      if (best) {
        result.bugs.push_back(std::move(*best));
      } else {
        result.notes.push_back(
            "notification at '" + t.anchor +
            "' can fire with no waiter present, but every waiter parked "
            "afterwards is still woken on some path");
      }
    }
  }

  // condvar the notify statement operates on
  const std::string& anchored_target(const Transition& t) const {
    static const std::string empty;
    for (const auto& fn : art.functions) {
      if (const Statement* st = fn.find_statement(t.anchor)) {
        return st->op.target;
      }
    }
    return empty;
  }

  // breadth-first path from `from` to the first state satisfying `pred`;
  // returns (state, transition ids)
  template <typename Pred>
  std::optional<std::pair<int, std::vector<int>>> shortest_path_to(int from,
                                                                   Pred pred) const {
    std::vector<int> parent(space.states.size(), -2);
    std::vector<int> via(space.states.size(), -1);
    std::deque<int> queue{from};
    parent[static_cast<size_t>(from)] = -1;
    auto unwind = [&](int state) {
      std::vector<int> path;
      for (int s = state; parent[static_cast<size_t>(s)] >= 0;
           s = parent[static_cast<size_t>(s)]) {
        path.push_back(via[static_cast<size_t>(s)]);
      }
      std::reverse(path.begin(), path.end());
      return std::make_pair(state, std::move(path));
    };
    if (pred(from)) return unwind(from);
    while (!queue.empty()) {
      int s = queue.front();
      queue.pop_front();
      for (const auto& [transition, dst] : space.succ[static_cast<size_t>(s)]) {
        if (parent[static_cast<size_t>(dst)] != -2) continue;
        parent[static_cast<size_t>(dst)] = s;
        via[static_cast<size_t>(dst)] = transition;
        if (pred(dst)) return unwind(dst);
        queue.push_back(dst);
      }
    }
    return std::nullopt;
  }

  // --- SCC warnings ------------------------------------------------------------

  void detect_scc_warnings() {
    const size_t n = space.states.size();
    std::vector<int> comp(n, -1), low(n), num(n, -1), stack_flag(n, 0);
    std::vector<int> tarjan_stack;
    int counter = 0, comp_count = 0;

    // iterative Tarjan
    struct Frame {
      int state;
      size_t edge = 0;
    };
    for (size_t root = 0; root < n; ++root) {
      if (num[root] != -1) continue;
      std::vector<Frame> frames{{static_cast<int>(root)}};
      num[root] = low[root] = counter++;
      tarjan_stack.push_back(static_cast<int>(root));
      stack_flag[root] = 1;
      while (!frames.empty()) {
        Frame& fr = frames.back();
        size_t s = static_cast<size_t>(fr.state);
        if (fr.edge < space.succ[s].size()) {
          int next = space.succ[s][fr.edge].second;
          ++fr.edge;
          size_t nx = static_cast<size_t>(next);
          if (num[nx] == -1) {
            num[nx] = low[nx] = counter++;
            tarjan_stack.push_back(next);
            stack_flag[nx] = 1;
            frames.push_back({next});
          } else if (stack_flag[nx]) {
            low[s] = std::min(low[s], num[nx]);
          }
          continue;
        }
        if (low[s] == num[s]) {
          while (true) {
            int member = tarjan_stack.back();
            tarjan_stack.pop_back();
            stack_flag[static_cast<size_t>(member)] = 0;
            comp[static_cast<size_t>(member)] = comp_count;
            if (member == fr.state) break;
          }
          ++comp_count;
        }
        int finished = fr.state;
        frames.pop_back();
        if (!frames.empty()) {
          size_t parent = static_cast<size_t>(frames.back().state);
          low[parent] = std::min(low[parent], low[static_cast<size_t>(finished)]);
        }
      }
    }

    std::vector<std::vector<int>> members(static_cast<size_t>(comp_count));
    for (size_t s = 0; s < n; ++s) {
      members[static_cast<size_t>(comp[s])].push_back(static_cast<int>(s));
    }
    std::vector<char> self_loop(n, 0);
    for (const auto& e : space.edges) {
      if (e.src == e.dst) self_loop[static_cast<size_t>(e.src)] = 1;
    }

    struct SccInfo {
      int entry;
      std::vector<int> states;
      bool terminal;
    };
    std::vector<SccInfo> qualifying;
    for (auto& m : members) {
      bool nontrivial = m.size() > 1 ||
                        (m.size() == 1 && self_loop[static_cast<size_t>(m[0])]);
      if (!nontrivial) continue;
      bool has_completed = false;
      for (int s : m) {
        if (all_returned(space.states[static_cast<size_t>(s)])) {
          has_completed = true;
          break;
        }
      }
      if (has_completed) continue;
      result.livelock_immune = false;
      bool terminal = true;
      int me = comp[static_cast<size_t>(m[0])];
      for (int s : m) {
        for (const auto& [_, dst] : space.succ[static_cast<size_t>(s)]) {
          if (comp[static_cast<size_t>(dst)] != me) {
            terminal = false;
            break;
          }
        }
        if (!terminal) break;
      }
      if (!terminal) continue;
      std::sort(m.begin(), m.end());
      qualifying.push_back(SccInfo{m.front(), m, true});
    }
    std::sort(qualifying.begin(), qualifying.end(),
              [](const SccInfo& a, const SccInfo& b) { return a.entry < b.entry; });

    for (const auto& scc : qualifying) {
      BugFinding live;
      live.kind = BugKind::Livelock;
      live.definite = false;
      live.state = scc.entry;
      live.witness = space.path_to(scc.entry);
      live.scc_states = scc.states;
      result.bugs.push_back(std::move(live));

      // per-function location footprint across the component
      for (const auto& fn : art.functions) {
        std::set<int> footprint;
        bool always_same = true;
        bool first = true;
        std::set<int> first_locs;
        for (int s : scc.states) {
          std::set<int> locs;
          for (const auto& p : net.places) {
            if (is_location(p.kind) && p.function == fn.name &&
                space.states[static_cast<size_t>(s)]
                        .marking[static_cast<size_t>(p.id)] > 0) {
              locs.insert(p.id);
            }
          }
          if (first) {
            first_locs = locs;
            first = false;
          } else if (locs != first_locs) {
            always_same = false;
            break;
          }
          footprint.insert(locs.begin(), locs.end());
        }
        if (!always_same || first_locs.empty()) continue;
        // pinned in place while some other function moves
        bool someone_moves = false;
        for (const auto& other : art.functions) {
          if (other.name == fn.name) continue;
          std::set<int> prev;
          bool started = false;
          for (int s : scc.states) {
            std::set<int> locs;
            for (const auto& p : net.places) {
              if (is_location(p.kind) && p.function == other.name &&
                  space.states[static_cast<size_t>(s)]
                          .marking[static_cast<size_t>(p.id)] > 0) {
                locs.insert(p.id);
              }
            }
            if (!started) {
              prev = locs;
              started = true;
            } else if (locs != prev) {
              someone_moves = true;
              break;
            }
          }
          if (someone_moves) break;
        }
        if (!someone_moves) continue;
        BugFinding starve;
        starve.kind = BugKind::Starvation;
        starve.definite = false;
        starve.state = scc.entry;
        starve.witness = space.path_to(scc.entry);
        starve.scc_states = scc.states;
        starve.starved_function = fn.name;
        result.bugs.push_back(std::move(starve));
      }
    }
  }

  // --- goals --------------------------------------------------------------------

  void check_goals() {
    for (const auto& g : art.goals) {
      GoalCheck check;
      check.goal_id = g.id;

      struct Requirement {
        GoalFailure kind;
        std::string name;
        Value value;
        int place = -1;
        std::int64_t need = 0;
      };
      std::vector<Requirement> reqs;
      for (const auto& f : g.completion) {
        Requirement r;
        r.kind = GoalFailure::Completion;
        r.name = f;
        r.place = net.place_id(return_place_name(f));
        r.need = 1;
        reqs.push_back(std::move(r));
      }
      for (const auto& res : g.availability) {
        Requirement r;
        r.kind = GoalFailure::Availability;
        r.name = res;
        r.place = net.place_id(resource_place_name(res));
        r.need = r.place >= 0
                     ? net.initial_marking[static_cast<size_t>(r.place)]
                     : 0;
        reqs.push_back(std::move(r));
      }
      for (const auto& [var, value] : g.variables) {
        Requirement r;
        r.kind = GoalFailure::Variable;
        r.name = var;
        r.value = value;
        reqs.push_back(std::move(r));
      }

      auto satisfied = [&](const Requirement& r, const NetState& s) {
        if (r.kind == GoalFailure::Variable) {
          auto it = s.valuation.find(r.name);
          return it != s.valuation.end() && it->second == r.value;
        }
        return r.place >= 0 &&
               s.marking[static_cast<size_t>(r.place)] >= r.need;
      };

      check.reachable = false;
      for (const auto& s : space.states) {
        bool all = true;
        for (const auto& r : reqs) {
          if (!satisfied(r, s)) {
            all = false;
            break;
          }
        }
        if (all) {
          check.reachable = true;
          break;
        }
      }
      if (!check.reachable) {
        check.failure = GoalFailure::Conjunction;
        for (const auto& r : reqs) {
          bool alone = false;
          for (const auto& s : space.states) {
            if (satisfied(r, s)) {
              alone = true;
              break;
            }
          }
          if (!alone) {
            check.failure = r.kind;
            check.failed_name = r.name;
            check.failed_value = r.value;
            break;
          }
        }
      }
      result.goals.push_back(std::move(check));
    }
  }
};

}  // namespace

AnalysisResult analyze_net(const CirArtifact& artifact, const Cvn& net,
                           std::size_t state_budget) {
  AnalysisResult result;
  result.space = explore(net, state_budget);
  Analyzer{artifact, net, result.space, result, {}}.run();
  return result;
}

std::string space_to_json(const Cvn& net, const StateSpace& space) {
  nlohmann::ordered_json j;
  j["state_count"] = space.states.size();
  j["edge_count"] = space.edges.size();
  j["states"] = nlohmann::ordered_json::array();
  for (size_t i = 0; i < space.states.size(); ++i) {
    nlohmann::ordered_json js;
    js["id"] = i;
    js["marking"] = nlohmann::ordered_json::object();
    for (const auto& p : net.places) {
      std::int64_t count = space.states[i].marking[static_cast<size_t>(p.id)];
      if (count != 0) js["marking"][p.name] = count;
    }
    js["valuation"] = nlohmann::ordered_json::object();
    for (const auto& [name, value] : space.states[i].valuation) {
      js["valuation"][name] = to_string(value);
    }
    js["dead"] = space.succ[i].empty();
    j["states"].push_back(std::move(js));
  }
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : space.edges) {
    j["edges"].push_back(
        {{"src", e.src},
         {"transition", net.transitions[static_cast<size_t>(e.transition)].name},
         {"dst", e.dst}});
  }
  return j.dump(2) + "\n";
}

std::string space_to_dot(const Cvn& net, const StateSpace& space) {
  std::string out = "digraph space {\n  node [shape=circle, fontsize=9];\n";
  for (size_t i = 0; i < space.states.size(); ++i) {
    out += "  s" + std::to_string(i);
    if (space.succ[i].empty()) {
      out += " [peripheries=2]";
    }
    out += ";\n";
  }
  for (const auto& e : space.edges) {
    out += "  s" + std::to_string(e.src) + " -> s" + std::to_string(e.dst) +
           " [label=\"" + net.transitions[static_cast<size_t>(e.transition)].name +
           "\"];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace cvnverify
