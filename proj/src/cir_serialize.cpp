#include <sstream>

#include "cvnverify/cir.hpp"

// Canonical text form. Parsing the output reproduces the artifact field for
// field; byte layout (alignment, trailing transfers) is normalized rather
// than preserved.

namespace cvnverify {

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

std::string render_transfer(const Transfer& t) {
  switch (t.kind) {
    case Transfer::Kind::Next:
      return "next: " + t.next;
    case Transfer::Kind::Return:
      return "next: return";
    case Transfer::Kind::Branch: {
      std::string out = "branch: { ";
      if (t.cond) out += "cond: " + to_string(*t.cond) + ", ";
      out += "true: " + t.on_true + ", false: " + t.on_false + " }";
      return out;
    }
    case Transfer::Kind::Switch: {
      std::string out = "switch: { var: " + t.switch_var + ", arms: { ";
      for (size_t i = 0; i < t.arms.size(); ++i) {
        if (i) out += ", ";
        out += to_string(t.arms[i].first) + ": " + t.arms[i].second;
      }
      out += " }, default: " + t.switch_default + " }";
      return out;
    }
    case Transfer::Kind::Omitted:
      return "";
  }
  return "";
}

void render_resource(std::ostream& os, const ResourceDecl& r) {
  os << "  " << r.name << ": { kind: " << to_string(r.kind);
  if (!r.paired_with.empty()) os << ", paired_with: " << r.paired_with;
  if (r.kind == ResourceKind::Semaphore || r.kind == ResourceKind::Channel) {
    os << ", init: " << r.initial_count;
  } else if (r.kind == ResourceKind::Var || r.kind == ResourceKind::Atomic) {
    os << ", type: " << to_string(r.value_type);
    if (!r.enum_values.empty()) {
      os << ", values: [";
      for (size_t i = 0; i < r.enum_values.size(); ++i) {
        if (i) os << ", ";
        os << r.enum_values[i];
      }
      os << "]";
    }
    os << ", init: " << to_string(r.init);
  }
  os << " }\n";
}

void render_body(std::ostream& os, const FunctionDef& fn, const std::string& indent) {
  if (fn.kind != FunctionKind::Normal) {
    os << indent << "kind: " << to_string(fn.kind) << "\n";
  }
  os << indent << "body:\n";
  for (const auto& st : fn.body) {
    os << indent << "- { sid: " << st.sid << ", op: " << to_string(st.op);
    std::string t = render_transfer(st.transfer);
    if (!t.empty()) os << ", " << t;
    os << " }\n";
  }
}

void render_name_list(std::ostream& os, const std::vector<std::string>& names) {
  os << "[";
  for (size_t i = 0; i < names.size(); ++i) {
    if (i) os << ", ";
    os << names[i];
  }
  os << "]";
}

}  // namespace

std::string to_string(ResourceKind k) {
  switch (k) {
    case ResourceKind::Mutex: return "Mutex";
    case ResourceKind::RwLock: return "RwLock";
    case ResourceKind::Condvar: return "Condvar";
    case ResourceKind::Semaphore: return "Semaphore";
    case ResourceKind::Channel: return "Channel";
    case ResourceKind::Var: return "Var";
    case ResourceKind::Atomic: return "Atomic";
  }
  return "Var";
}

bool is_lock_kind(ResourceKind k) {
  return k == ResourceKind::Mutex || k == ResourceKind::RwLock;
}

bool is_sync_primitive(ResourceKind k) {
  return k != ResourceKind::Var && k != ResourceKind::Atomic;
}

std::string to_string(OpKind k) {
  switch (k) {
    case OpKind::Lock: return "lock";
    case OpKind::Drop: return "drop";
    case OpKind::ReadLock: return "read_lock";
    case OpKind::WriteLock: return "write_lock";
    case OpKind::Wait: return "wait";
    case OpKind::NotifyOne: return "notify_one";
    case OpKind::NotifyAll: return "notify_all";
    case OpKind::Acquire: return "acquire";
    case OpKind::Release: return "release";
    case OpKind::Send: return "send";
    case OpKind::Recv: return "recv";
    case OpKind::Read: return "read";
    case OpKind::Write: return "write";
    case OpKind::Load: return "load";
    case OpKind::Store: return "store";
    case OpKind::Cas: return "cas";
    case OpKind::Spawn: return "spawn";
    case OpKind::Join: return "join";
    case OpKind::SpawnAsync: return "spawn_async";
    case OpKind::Await: return "await";
    case OpKind::Call: return "call";
    case OpKind::Nop: return "nop";
  }
  return "nop";
}

std::string to_string(const Operation& op) {
  switch (op.kind) {
    case OpKind::Nop:
      return "nop";
    case OpKind::Wait:
      return "wait(" + op.target + ", " + op.mutex_arg + ")";
    case OpKind::Write:
    case OpKind::Store:
      return to_string(op.kind) + "(" + op.target + ", " + to_string(*op.value) + ")";
    case OpKind::Cas:
      return "cas(" + op.target + ", " + to_string(*op.cas_expected) + ", " +
             to_string(*op.cas_new) + ")";
    default:
      return to_string(op.kind) + "(" + op.target + ")";
  }
}

std::string to_string(FunctionKind k) {
  switch (k) {
    case FunctionKind::Normal: return "normal";
    case FunctionKind::Async: return "async";
    case FunctionKind::Closure: return "closure";
  }
  return "normal";
}

std::string serialize_cir(const CirArtifact& artifact) {
  std::ostringstream os;
  bool first_section = true;
  auto section_gap = [&] {
    if (!first_section) os << "\n";
    first_section = false;
  };

  if (!artifact.resources.empty()) {
    section_gap();
    os << "resources:\n";
    for (const auto& r : artifact.resources) render_resource(os, r);
  }

  if (!artifact.protection.empty()) {
    section_gap();
    os << "protection:\n";
    for (const auto& [var, locks] : artifact.protection) {
      os << "  " << var << ": ";
      render_name_list(os, locks);
      os << "\n";
    }
  }

  if (artifact.threads_form) {
    section_gap();
    os << "threads:\n";
    for (const auto& fn : artifact.functions) {
      if (fn.synthetic) continue;
      os << "  " << fn.name << ":\n";
      render_body(os, fn, "    ");
    }
  } else {
    bool any = false;
    for (const auto& fn : artifact.functions) any = any || !fn.synthetic;
    if (any) {
      section_gap();
      os << "functions:\n";
      for (const auto& fn : artifact.functions) {
        if (fn.synthetic) continue;
        os << "  " << fn.name << ":\n";
        render_body(os, fn, "    ");
      }
    }
    if (!artifact.entry.empty()) {
      section_gap();
      os << "entry: " << artifact.entry << "\n";
    }
  }

  if (!artifact.summaries.empty()) {
    section_gap();
    os << "summaries:\n";
    for (const auto& s : artifact.summaries) {
      os << "  " << s.name << ": { reads: ";
      render_name_list(os, s.reads);
      os << ", writes: ";
      render_name_list(os, s.writes);
      os << ", calls: ";
      render_name_list(os, s.calls);
      os << ", has_concurrency: " << (s.has_concurrency ? "true" : "false")
         << " }\n";
    }
  }

  if (!artifact.goals.empty()) {
    section_gap();
    os << "goals:\n";
    for (const auto& g : artifact.goals) {
      os << "  - id: " << g.id << "\n";
      if (!g.description.empty()) {
        os << "    desc: " << quote(g.description) << "\n";
      }
      if (!g.completion.empty()) {
        os << "    completion:\n";
        for (const auto& f : g.completion) {
          os << "      - [" << f << ", completed]\n";
        }
      }
      if (!g.availability.empty()) {
        os << "    availability:\n";
        for (const auto& r : g.availability) {
          os << "      - [" << r << ", available]\n";
        }
      }
      if (!g.variables.empty()) {
        os << "    variables:\n";
        for (const auto& [var, val] : g.variables) {
          os << "      " << var << ": " << to_string(val) << "\n";
        }
      }
    }
  }

  return os.str();
}

}  // namespace cvnverify
