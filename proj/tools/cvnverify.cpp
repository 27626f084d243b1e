#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cvnverify/analyze.hpp"
#include "cvnverify/checker.hpp"
#include "cvnverify/cir.hpp"
#include "cvnverify/diagnostics.hpp"
#include "cvnverify/repair.hpp"
#include "cvnverify/translate.hpp"

namespace {

using namespace cvnverify;

constexpr int kExitOk = 0;
constexpr int kExitStatic = 2;
constexpr int kExitBug = 3;
constexpr int kExitGoal = 4;
constexpr int kExitBudget = 5;
constexpr int kExitUsage = 64;

std::optional<std::string> read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<Finding> findings_from_parse(const ParseResult& parsed) {
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

void emit_report(const VerdictReport& report, const std::string& format) {
  if (format == "json") {
    std::cout << report_to_json(report);
  } else {
    std::cout << report_to_text(report);
  }
}

int emit_parse_failure(const ParseResult& parsed, const std::string& format) {
  VerdictReport report;
  report.static_errors = findings_from_parse(parsed);
  emit_report(report, format);
  return kExitStatic;
}

struct Pipeline {
  std::string format = "text";
  std::size_t state_budget = kDefaultStateBudget;
  bool goals_only = false;
  std::string export_space;

  int check(const std::string& text) const {
    ParseResult parsed = parse_cir(text);
    if (!parsed.ok()) return emit_parse_failure(parsed, format);
    CheckResult result = check_artifact(*parsed.artifact);
    VerdictReport report = build_report(result, nullptr, nullptr,
                                        *parsed.artifact);
    report.accepted = result.findings.empty();
    emit_report(report, format);
    return result.findings.empty() ? kExitOk : kExitStatic;
  }

  int translate(const std::string& text) const {
    ParseResult parsed = parse_cir(text);
    if (!parsed.ok()) return emit_parse_failure(parsed, format);
    CheckResult result = check_artifact(*parsed.artifact);
    if (!result.findings.empty()) {
      VerdictReport report = build_report(result, nullptr, nullptr,
                                          *parsed.artifact);
      emit_report(report, format);
      return kExitStatic;
    }
    Cvn net = translate_artifact(*parsed.artifact);
    if (format == "dot") {
      std::cout << net_to_dot(net);
    } else if (format == "json") {
      std::cout << net_to_json(net);
    } else {
      std::cout << "places: " << net.places.size() << "\n"
                << "transitions: " << net.transitions.size() << "\n"
                << "threads: " << net.thread_bound << "\n";
    }
    return kExitOk;
  }

  int analyze(const std::string& text, bool apply_tier1) const {
    ParseResult parsed = parse_cir(text);
    if (!parsed.ok()) return emit_parse_failure(parsed, format);
    CirArtifact artifact = *parsed.artifact;
    CheckResult result = check_artifact(artifact);
    std::vector<std::string> fixed_notes;
    if (!result.findings.empty() && apply_tier1 &&
        result.all_autofixable()) {
      FixResult fixed = apply_autofixes(artifact);
      for (const auto& f : fixed.applied) {
        fixed_notes.push_back("auto-fixed " + f.code +
                              (f.anchor.empty() ? "" : " at " + f.anchor));
      }
      artifact = fixed.artifact;
      result.findings = fixed.remaining;
    }
    if (!result.findings.empty()) {
      VerdictReport report = build_report(result, nullptr, nullptr, artifact);
      report.notes = fixed_notes;
      emit_report(report, format);
      return kExitStatic;
    }

    Cvn net = translate_artifact(artifact);
    AnalysisResult analysis;
    try {
      analysis = analyze_net(artifact, net, state_budget);
    } catch (const StateBudgetExceeded& e) {
      std::cerr << e.what() << "\n";
      return kExitBudget;
    }

    if (!export_space.empty()) {
      std::ofstream out(export_space, std::ios::binary);
      if (!out) {
        std::cerr << "cannot write " << export_space << "\n";
        return kExitBudget;
      }
      out << (format == "dot" ? space_to_dot(net, analysis.space)
                              : space_to_json(net, analysis.space));
    }

    VerdictReport report = build_report(result, &analysis, &net, artifact);
    for (const auto& n : fixed_notes) {
      report.notes.insert(report.notes.begin(), n);
    }
    if (goals_only) {
      report.findings.clear();
      report.accepted = true;
      for (const auto& g : report.goals) {
        if (!g.reachable) report.accepted = false;
      }
      emit_report(report, format);
      return report.accepted ? kExitOk : kExitGoal;
    }
    emit_report(report, format);
    if (report.has_definite()) return kExitBug;
    for (const auto& g : report.goals) {
      if (!g.reachable) return kExitGoal;
    }
    return kExitOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CIR concurrency verifier"};
  app.require_subcommand(1);
  app.set_config("--config", "cvnverify.toml",
                 "Read defaults from a config file");

  Pipeline pipe;
  std::string input;
  app.add_option("--format", pipe.format, "Output format")
      ->check(CLI::IsMember({"json", "text", "dot"}))
      ->capture_default_str();
  app.add_option("--state-budget", pipe.state_budget,
                 "Maximum number of explored states")
      ->capture_default_str();
  app.add_flag("--goals-only", pipe.goals_only,
               "Report goal reachability only");
  app.add_option("--export-space", pipe.export_space,
                 "Write the explored state space to this file");

  auto* cmd_check = app.add_subcommand("check", "Validate a CIR artifact");
  cmd_check->add_option("file", input, "Artifact path or -")->required();

  auto* cmd_translate =
      app.add_subcommand("translate", "Translate a CIR artifact to a net");
  cmd_translate->add_option("file", input, "Artifact path or -")->required();

  auto* cmd_analyze =
      app.add_subcommand("analyze", "Explore the net and report findings");
  cmd_analyze->add_option("file", input, "Artifact path or -")->required();

  auto* cmd_verify = app.add_subcommand(
      "verify", "Check, auto-fix, translate, analyze and check goals");
  cmd_verify->add_option("file", input, "Artifact path or -")->required();

  auto* cmd_repair =
      app.add_subcommand("repair", "Run the generate-verify-repair loop");
  cmd_repair->add_option("file", input, "Seed artifact or requirement text")
      ->required();
  std::string replay_dir, backend_desc;
  LoopConfig loop_cfg;
  cmd_repair->add_option("--replay", replay_dir,
                         "Directory of canned backend responses");
  cmd_repair->add_option("--backend", backend_desc,
                         "Backend command or http(s) URL");
  cmd_repair->add_option("--k-gen", loop_cfg.generation_budget,
                         "Structural round budget")
      ->capture_default_str();
  cmd_repair->add_option("--k-rep", loop_cfg.repair_budget,
                         "Behavioral round budget")
      ->capture_default_str();

  auto* cmd_rules = app.add_subcommand("list-rules", "Print the rule catalogue");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (cmd_rules->parsed()) {
    if (pipe.format == "json") {
      std::string out = "[\n";
      const auto& rules = rule_catalogue();
      for (size_t i = 0; i < rules.size(); ++i) {
        out += "  {\"code\": \"" + rules[i].code + "\", \"category\": \"" +
               rules[i].category + "\", \"autofixable\": " +
               (rules[i].autofixable ? "true" : "false") + ", \"summary\": \"" +
               rules[i].summary + "\"}";
        out += i + 1 < rules.size() ? ",\n" : "\n";
      }
      std::cout << out << "]\n";
    } else {
      for (const auto& r : rule_catalogue()) {
        std::string line = r.code;
        line.append(r.code.size() < 6 ? 6 - r.code.size() : 1, ' ');
        line += r.category;
        line.append(r.category.size() < 14 ? 14 - r.category.size() : 1, ' ');
        line += r.autofixable ? "autofix  " : "         ";
        line += r.summary;
        std::cout << line << "\n";
      }
    }
    return kExitOk;
  }

  std::optional<std::string> text = read_input(input);
  if (!text) {
    std::cerr << "cannot read " << input << "\n";
    return kExitUsage;
  }

  if (cmd_check->parsed()) return pipe.check(*text);
  if (cmd_translate->parsed()) return pipe.translate(*text);
  if (cmd_analyze->parsed()) return pipe.analyze(*text, false);
  if (cmd_verify->parsed()) return pipe.analyze(*text, true);

  if (cmd_repair->parsed()) {
    if (!replay_dir.empty()) {
      loop_cfg.backend = "replay:" + replay_dir;
    } else if (!backend_desc.empty()) {
      bool is_http = backend_desc.rfind("http://", 0) == 0 ||
                     backend_desc.rfind("https://", 0) == 0;
      loop_cfg.backend = is_http ? backend_desc : "cmd:" + backend_desc;
    }
    loop_cfg.state_budget = pipe.state_budget;
    LoopTranscript transcript = run_loop(*text, loop_cfg);
    if (pipe.format == "json") {
      std::cout << transcript_to_json(transcript);
    } else {
      for (const auto& r : transcript.rounds) {
        std::cout << "round " << r.round << ": stage " << r.stage << ", tier "
                  << to_string(r.tier);
        if (!r.response_digest.empty()) {
          std::cout << ", response " << r.response_digest;
        }
        std::cout << "\n";
      }
      std::cout << "outcome: " << to_string(transcript.outcome) << "\n";
      std::cout << report_to_text(transcript.final_report);
    }
    return transcript.outcome == LoopOutcome::Accepted ? kExitOk : kExitBudget;
  }

  return kExitUsage;
}
