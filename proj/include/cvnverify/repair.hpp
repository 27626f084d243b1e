#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cvnverify/analyze.hpp"
#include "cvnverify/diagnostics.hpp"

namespace cvnverify {

enum class Tier { Tier1, Tier2, Tier3, GoalFeedback, Accept };

std::string to_string(Tier t);

// Deterministic routing: automatic fixes when every static error supports
// one, regeneration when any does not, behavioral repair when a definite bug
// remains, goal feedback when only reachability is missing. Warnings alone
// never block acceptance.
Tier route_tier(const std::vector<Finding>& errors,
                const std::vector<BugFinding>& findings, bool goals_reachable);

struct LoopConfig {
  int generation_budget = 5;  // structural rounds (tier 1 and 2)
  int repair_budget = 5;      // behavioral and goal rounds (tier 3, goals)
  std::size_t state_budget = kDefaultStateBudget;
  std::string backend;  // replay:<dir> | cmd:<command> | http:<url>
};

// Text-generation endpoint. Responses are untrusted: every candidate
// re-enters the full parse/check/translate/analyze pipeline.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::optional<std::string> request(const std::string& prompt) = 0;
};

// Reads canned responses from a directory, in filename order.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(const std::string& dir);
  std::optional<std::string> request(const std::string& prompt) override;

 private:
  std::vector<std::string> files_;
  std::size_t next_ = 0;
};

// Pipes the prompt into an external command; stdout is the candidate.
class ProcessBackend : public Backend {
 public:
  explicit ProcessBackend(std::string command) : command_(std::move(command)) {}
  std::optional<std::string> request(const std::string& prompt) override;

 private:
  std::string command_;
};

// POSTs {"prompt": ...} and expects {"artifact": ...}.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(std::string url) : url_(std::move(url)) {}
  std::optional<std::string> request(const std::string& prompt) override;

 private:
  std::string url_;
};

// Parses "replay:<dir>", "cmd:<command>" or "http(s)://…"; falls back to the
// CVNVERIFY_BACKEND environment variable when the descriptor is empty.
std::unique_ptr<Backend> make_backend(const std::string& descriptor);

std::uint64_t fnv1a_digest(const std::string& data);

struct RoundRecord {
  int round = 0;
  std::string stage;  // static | behavioral | goal | accepted | failed
  Tier tier = Tier::Accept;
  std::vector<std::string> error_codes;
  std::vector<std::string> finding_kinds;
  std::string prompt;           // empty when no backend call was made
  std::string response_digest;  // fnv1a hex of the raw response
};

enum class LoopOutcome { Accepted, BudgetExhausted, BackendUnavailable };

std::string to_string(LoopOutcome o);

struct LoopTranscript {
  std::vector<RoundRecord> rounds;
  LoopOutcome outcome = LoopOutcome::BudgetExhausted;
  VerdictReport final_report;
  std::string final_text;  // canonical artifact when the loop accepted

  int tier_rounds(Tier t) const {
    int n = 0;
    for (const auto& r : rounds) {
      if (r.tier == t) ++n;
    }
    return n;
  }
};

// The goal-aware generate-verify-repair loop. `seed` is either a CIR
// artifact or free-form requirement text; the latter triggers an initial
// generation request.
LoopTranscript run_loop(const std::string& seed, const LoopConfig& cfg);

std::string transcript_to_json(const LoopTranscript& t);

}  // namespace cvnverify
