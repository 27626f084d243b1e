#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "cvnverify/checker.hpp"
#include "cvnverify/repair.hpp"
#include "cvnverify/translate.hpp"

namespace cvnverify {

std::string to_string(Tier t) {
  switch (t) {
    case Tier::Tier1: return "1";
    case Tier::Tier2: return "2";
    case Tier::Tier3: return "3";
    case Tier::GoalFeedback: return "goal_feedback";
    case Tier::Accept: return "accept";
  }
  return "accept";
}

std::string to_string(LoopOutcome o) {
  switch (o) {
    case LoopOutcome::Accepted: return "accepted";
    case LoopOutcome::BudgetExhausted: return "budget_exhausted";
    case LoopOutcome::BackendUnavailable: return "backend_unavailable";
  }
  return "budget_exhausted";
}

Tier route_tier(const std::vector<Finding>& errors,
                const std::vector<BugFinding>& findings,
                bool goals_reachable) {
  if (!errors.empty()) {
    for (const auto& e : errors) {
      if (!e.autofixable) return Tier::Tier2;
    }
    return Tier::Tier1;
  }
  for (const auto& f : findings) {
    if (f.definite) return Tier::Tier3;
  }
  return goals_reachable ? Tier::Accept : Tier::GoalFeedback;
}

std::uint64_t fnv1a_digest(const std::string& data) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

namespace {

std::string digest_hex(const std::string& data) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a:%016llx",
                static_cast<unsigned long long>(fnv1a_digest(data)));
  return buf;
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

ReplayBackend::ReplayBackend(const std::string& dir) {
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file()) files_.push_back(entry.path().string());
  }
  std::sort(files_.begin(), files_.end());
}

std::optional<std::string> ReplayBackend::request(const std::string&) {
  if (next_ >= files_.size()) return std::nullopt;
  return read_file(files_[next_++]);
}

std::optional<std::string> ProcessBackend::request(const std::string& prompt) {
  char path[] = "/tmp/cvnverify_prompt_XXXXXX";
  int fd = mkstemp(path);
  if (fd < 0) return std::nullopt;
  ssize_t written = ::write(fd, prompt.data(), prompt.size());
  ::close(fd);
  if (written != static_cast<ssize_t>(prompt.size())) {
    ::unlink(path);
    return std::nullopt;
  }
  std::string cmd = command_ + " < '" + path + "'";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    ::unlink(path);
    return std::nullopt;
  }
  std::string out;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = pclose(pipe);
  ::unlink(path);
  if (status != 0) return std::nullopt;
  return out;
}

std::optional<std::string> HttpBackend::request(const std::string& prompt) {
  std::string base = url_, path = "/";
  auto scheme_end = url_.find("://");
  if (scheme_end != std::string::npos) {
    auto slash = url_.find('/', scheme_end + 3);
    if (slash != std::string::npos) {
      base = url_.substr(0, slash);
      path = url_.substr(slash);
    }
  }
  httplib::Client client(base);
  client.set_connection_timeout(10);
  nlohmann::json body;
  body["prompt"] = prompt;
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res || res->status != 200) return std::nullopt;
  auto parsed = nlohmann::json::parse(res->body, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("artifact") ||
      !parsed["artifact"].is_string()) {
    return std::nullopt;
  }
  return parsed["artifact"].get<std::string>();
}

std::unique_ptr<Backend> make_backend(const std::string& descriptor) {
  std::string desc = descriptor;
  if (desc.empty()) {
    const char* env = std::getenv("CVNVERIFY_BACKEND");
    if (env) desc = env;
  }
  if (desc.empty()) return nullptr;
  if (desc.rfind("replay:", 0) == 0) {
    return std::make_unique<ReplayBackend>(desc.substr(7));
  }
  if (desc.rfind("cmd:", 0) == 0) {
    return std::make_unique<ProcessBackend>(desc.substr(4));
  }
  if (desc.rfind("http://", 0) == 0 || desc.rfind("https://", 0) == 0) {
    return std::make_unique<HttpBackend>(desc);
  }
  if (desc.rfind("http:", 0) == 0) {
    return std::make_unique<HttpBackend>(desc.substr(5));
  }
  return nullptr;
}

namespace {

bool looks_like_artifact(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    for (const char* section :
         {"resources:", "functions:", "threads:", "protection:", "summaries:",
          "goals:", "entry:"}) {
      if (line.rfind(section, 0) == 0) return true;
    }
  }
  return false;
}

std::string static_error_prompt(const std::vector<Finding>& errors,
                                const std::string& text) {
  std::string out = "Repair task: fix static validation errors in the CIR.\n\n";
  out += "Errors:\n";
  for (const auto& e : errors) {
    out += "  " + e.code;
    if (!e.anchor.empty()) out += " at " + e.anchor;
    out += ": " + e.message + "\n";
  }
  out += "\nCurrent artifact:\n" + text;
  if (out.back() != '\n') out += "\n";
  out += "\nOutput: the complete revised CIR artifact\n";
  return out;
}

std::string generation_prompt(const std::string& requirement) {
  std::string out = "Generate task: produce a CIR artifact.\n\n";
  out += "Requirement:\n" + requirement;
  if (out.back() != '\n') out += "\n";
  out += "\nOutput: the complete CIR artifact\n";
  return out;
}

std::vector<Finding> parse_errors_as_findings(const ParseResult& parsed) {
  std::vector<Finding> out;
  for (const auto& e : parsed.errors) {
    Finding f;
    f.code = e.code;
    f.message = e.message;
    f.anchor = "line " + std::to_string(e.line);
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

LoopTranscript run_loop(const std::string& seed, const LoopConfig& cfg) {
  LoopTranscript t;
  std::unique_ptr<Backend> backend;
  bool backend_ready = false;
  int gen_used = 0;
  int rep_used = 0;
  std::string text = seed;

  auto finish = [&](LoopOutcome outcome, VerdictReport report) {
    t.outcome = outcome;
    report.rounds_used = static_cast<int>(t.rounds.size());
    t.final_report = std::move(report);
  };

  // sends one request; on failure records the round and reports why
  auto call = [&](RoundRecord& rec, const std::string& prompt,
                  int& budget_used, int budget,
                  const VerdictReport& report) -> bool {
    if (budget_used >= budget) {
      rec.stage = "failed";
      t.rounds.push_back(rec);
      finish(LoopOutcome::BudgetExhausted, report);
      return false;
    }
    if (!backend_ready) {
      backend = make_backend(cfg.backend);
      backend_ready = true;
    }
    rec.prompt = prompt;
    std::optional<std::string> response;
    if (backend) response = backend->request(prompt);
    if (!response) {
      rec.stage = "failed";
      t.rounds.push_back(rec);
      finish(LoopOutcome::BackendUnavailable, report);
      return false;
    }
    ++budget_used;
    rec.response_digest = digest_hex(*response);
    t.rounds.push_back(rec);
    text = *response;
    return true;
  };

  int round = 0;

  if (!looks_like_artifact(text)) {
    RoundRecord rec;
    rec.round = ++round;
    rec.stage = "generate";
    rec.tier = Tier::Tier2;
    VerdictReport empty;
    if (!call(rec, generation_prompt(text), gen_used, cfg.generation_budget,
              empty)) {
      return t;
    }
  }

  while (true) {
    RoundRecord rec;
    rec.round = ++round;

    ParseResult parsed = parse_cir(text);
    if (!parsed.ok()) {
      rec.stage = "static";
      rec.tier = Tier::Tier2;
      std::vector<Finding> errors = parse_errors_as_findings(parsed);
      for (const auto& e : errors) rec.error_codes.push_back(e.code);
      VerdictReport report;
      report.static_errors = errors;
      if (!call(rec, static_error_prompt(errors, text), gen_used,
                cfg.generation_budget, report)) {
        return t;
      }
      continue;
    }

    CirArtifact artifact = *parsed.artifact;
    CheckResult check = check_artifact(artifact);
    if (!check.findings.empty()) {
      Tier tier = route_tier(check.findings, {}, true);
      rec.stage = "static";
      rec.tier = tier;
      for (const auto& f : check.findings) rec.error_codes.push_back(f.code);
      if (tier == Tier::Tier1) {
        FixResult fixed = apply_autofixes(artifact);
        text = serialize_cir(fixed.artifact);
        t.rounds.push_back(rec);
        continue;
      }
      VerdictReport report = build_report(check, nullptr, nullptr, artifact);
      if (!call(rec, static_error_prompt(check.findings, serialize_cir(artifact)),
                gen_used, cfg.generation_budget, report)) {
        return t;
      }
      continue;
    }

    Cvn net = translate_artifact(artifact);
    AnalysisResult analysis;
    try {
      analysis = analyze_net(artifact, net, cfg.state_budget);
    } catch (const StateBudgetExceeded& e) {
      rec.stage = "failed";
      t.rounds.push_back(rec);
      VerdictReport report = build_report(check, nullptr, nullptr, artifact);
      report.notes.push_back(e.what());
      finish(LoopOutcome::BudgetExhausted, report);
      return t;
    }
    VerdictReport report = build_report(check, &analysis, &net, artifact);

    bool definite = false;
    for (const auto& b : analysis.bugs) {
      rec.finding_kinds.push_back(to_string(b.kind));
      if (b.definite) definite = true;
    }

    if (definite) {
      rec.stage = "behavioral";
      rec.tier = Tier::Tier3;
      const BugFinding& selected = select_bug(analysis.bugs, net, artifact);
      Diagnostic diag = build_diag(selected, analysis.space, net, artifact);
      std::string prompt = render_repair_prompt(diag) +
                           "\nCurrent artifact:\n" + serialize_cir(artifact);
      if (!call(rec, prompt, rep_used, cfg.repair_budget, report)) return t;
      continue;
    }

    std::vector<GoalCheck> unreachable;
    for (const auto& g : analysis.goals) {
      if (!g.reachable) unreachable.push_back(g);
    }
    if (unreachable.empty()) {
      rec.stage = "accepted";
      rec.tier = Tier::Accept;
      t.rounds.push_back(rec);
      finish(LoopOutcome::Accepted, report);
      t.final_text = serialize_cir(artifact);
      return t;
    }

    rec.stage = "goal";
    rec.tier = Tier::GoalFeedback;
    std::string prompt = render_goal_violation(unreachable, artifact, round) +
                         "\nCurrent artifact:\n" + serialize_cir(artifact) +
                         "\nOutput: the complete revised CIR artifact\n";
    if (!call(rec, prompt, rep_used, cfg.repair_budget, report)) return t;
  }
}

std::string transcript_to_json(const LoopTranscript& t) {
  nlohmann::ordered_json j;
  j["rounds"] = nlohmann::ordered_json::array();
  for (const auto& r : t.rounds) {
    nlohmann::ordered_json e;
    e["round"] = r.round;
    e["stage"] = r.stage;
    e["tier"] = to_string(r.tier);
    e["static_errors"] = r.error_codes;
    e["findings"] = r.finding_kinds;
    e["prompt"] = r.prompt;
    e["response_digest"] = r.response_digest;
    j["rounds"].push_back(std::move(e));
  }
  j["outcome"] = to_string(t.outcome);
  j["rounds_used"] = t.rounds.size();
  j["final_report"] = nlohmann::ordered_json::parse(
      report_to_json(t.final_report));
  j["final_artifact"] = t.final_text;
  return j.dump(2) + "\n";
}

}  // namespace cvnverify
