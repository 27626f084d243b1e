#pragma once

#include <string>
#include <vector>

#include "cvnverify/cir.hpp"

namespace cvnverify {

// A single rule violation. `anchor` is the statement id, declaration name or
// function name the finding is attached to; artifact-level findings leave it
// empty. Findings are reported in a deterministic order: sorted by
// (anchor, code, message).
struct Finding {
  std::string code;
  std::string message;
  std::string anchor;
  std::string function_name;  // owning function, when the rule is local to one
  bool autofixable = false;

  bool operator==(const Finding&) const = default;
};

struct RuleInfo {
  std::string code;
  std::string category;
  std::string summary;
  bool autofixable = false;
};

// Stable rule catalogue, ordered by code.
const std::vector<RuleInfo>& rule_catalogue();

struct CheckResult {
  std::vector<Finding> findings;

  bool ok() const { return findings.empty(); }
  bool all_autofixable() const {
    for (const auto& f : findings) {
      if (!f.autofixable) return false;
    }
    return !findings.empty();
  }
};

CheckResult check_artifact(const CirArtifact& artifact);

// Applies the automatic repairs (missing mid-body transfers, duplicate sid
// renames, missing drops before exit) and re-checks the result.
struct FixResult {
  CirArtifact artifact;
  std::vector<Finding> applied;    // findings that were repaired
  std::vector<Finding> remaining;  // findings still present afterwards
};

FixResult apply_autofixes(const CirArtifact& artifact);

}  // namespace cvnverify
