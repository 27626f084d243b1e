#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "cvnverify/checker.hpp"
#include "cvnverify/cir.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cvnverify;
using testing::load_fixture;

namespace {

CirArtifact parse_ok(const std::string& doc) {
  auto r = parse_cir(doc);
  if (!r.ok()) {
    std::string msg = "trigger document failed to parse:";
    for (const auto& e : r.errors) msg += " [" + e.code + "] " + e.message;
    throw std::runtime_error(msg);
  }
  return *r.artifact;
}

std::set<std::string> codes_of(const std::string& doc) {
  auto findings = check_artifact(parse_ok(doc)).findings;
  std::set<std::string> out;
  for (const auto& f : findings) out.insert(f.code);
  return out;
}

// Small artifact used as a skeleton by many triggers.
const char* kCleanDoc = R"(resources:
  m0: { kind: Mutex }

functions:
  f:
    body:
    - { sid: a, op: lock(m0), next: b }
    - { sid: b, op: drop(m0) }

entry: f
)";

}  // namespace

TEST_CASE("rule catalogue is stable and ordered") {
  const auto& rules = rule_catalogue();
  CHECK(rules.size() == 55);
  CHECK(std::is_sorted(rules.begin(), rules.end(),
                       [](const RuleInfo& a, const RuleInfo& b) {
                         return a.code < b.code;
                       }));
  int autofixable = 0;
  for (const auto& r : rules) {
    if (r.autofixable) ++autofixable;
  }
  CHECK(autofixable == 3);  // E001, E102, E501
}

TEST_CASE("clean artifacts produce no findings") {
  CHECK(check_artifact(parse_ok(kCleanDoc)).ok());
  const char* fixtures[] = {
      "pattern1.cir", "pattern2.cir", "pattern3.cir", "pattern4.cir",
      "pattern5.cir", "pattern6.cir", "pattern7.cir", "pattern8.cir",
      "pattern9.cir", "fixed_pattern1.cir", "fixed_pattern2.cir",
      "regression_a.cir", "regression_b.cir",
  };
  for (const char* name : fixtures) {
    CAPTURE(name);
    CHECK(check_artifact(load_fixture(name)).ok());
  }
}

TEST_CASE("structure rules E001-E005") {
  CHECK(codes_of("functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: nop }\n"
                 "    - { sid: b, op: nop }\n"
                 "entry: f\n")
            .count("E001"));
  CHECK(codes_of("functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: nop }\n  g:\n    body:\nentry: f\n")
            .count("E002"));
  CHECK(codes_of("resources:\n  m0: { kind: Mutex }\n").count("E003"));
  // branch without a condition on a plain operation
  CHECK(codes_of("functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: nop, branch: { true: b, false: b } }\n"
                 "    - { sid: b, op: nop }\nentry: f\n")
            .count("E004"));
  CHECK(codes_of("resources:\n  n: { kind: Var, type: Int, init: 0 }\n"
                 "functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: nop, switch: { var: n, default: b } }\n"
                 "    - { sid: b, op: nop }\nentry: f\n")
            .count("E005"));
}

TEST_CASE("name rules E101-E110") {
  CHECK(codes_of("functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: lock(ghost) }\nentry: f\n")
            .count("E101"));
  CHECK(codes_of("functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: nop, next: a2 }\n"
                 "    - { sid: a2, op: nop, next: a }\n"
                 "    - { sid: a, op: nop }\nentry: f\n")
            .count("E102"));
  CHECK(codes_of("functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: spawn(ghost), next: b }\n"
                 "    - { sid: b, op: join(ghost) }\nentry: f\n")
            .count("E103"));
  CHECK(codes_of("resources:\n  m0: { kind: Mutex }\n  m0: { kind: Mutex }\n"
                 "functions:\n  f:\n    body:\n    - { sid: a, op: nop }\n"
                 "entry: f\n")
            .count("E104"));
  CHECK(codes_of("functions:\n  f:\n    body:\n    - { sid: a, op: nop }\n"
                 "entry: g\n")
            .count("E107"));
  CHECK(codes_of("functions:\n  f:\n    body:\n    - { sid: a, op: nop }\n"
                 "entry: f\ngoals:\n  - id: G1\n    completion:\n"
                 "      - [ghost, completed]\n")
            .count("E108"));
  CHECK(codes_of("resources:\n  v: { kind: Var, type: Bool, init: false }\n"
                 "functions:\n  f:\n    body:\n    - { sid: a, op: nop }\n"
                 "entry: f\ngoals:\n  - id: G1\n    availability:\n"
                 "      - [v, available]\n")
            .count("E109"));
  CHECK(codes_of("resources:\n  v: { kind: Var, type: Int, init: 0 }\n"
                 "functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: write(v, ghost + 1) }\nentry: f\n")
            .count("E110"));
}

TEST_CASE("type rules E201-E205") {
  CHECK(codes_of("resources:\n  n: { kind: Var, type: Int, init: 0 }\n"
                 "functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: nop, branch: { cond: n == true, "
                 "true: b, false: b } }\n"
                 "    - { sid: b, op: nop }\nentry: f\n")
            .count("E201"));
  CHECK(codes_of("resources:\n  n: { kind: Var, type: Int, init: 0 }\n"
                 "functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: write(n, true) }\nentry: f\n")
            .count("E202"));
  CHECK(codes_of("resources:\n  n: { kind: Var, type: Int, init: 0 }\n"
                 "functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: nop, switch: { var: n, arms: { Idle: b }, "
                 "default: b } }\n"
                 "    - { sid: b, op: nop }\nentry: f\n")
            .count("E203"));
  CHECK(codes_of("resources:\n  x: { kind: Atomic, type: Int, init: 0 }\n"
                 "functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: cas(x, true, 1), "
                 "branch: { true: b, false: b } }\n"
                 "    - { sid: b, op: nop }\nentry: f\n")
            .count("E204"));
  CHECK(codes_of("resources:\n  n: { kind: Var, type: Int, init: 0 }\n"
                 "functions:\n  f:\n    body:\n    - { sid: a, op: nop }\n"
                 "entry: f\ngoals:\n  - id: G1\n    variables:\n      n: true\n")
            .count("E205"));
}

TEST_CASE("resource-use rules E301-E310") {
  const char* decls =
      "resources:\n"
      "  m0: { kind: Mutex }\n"
      "  rw: { kind: RwLock }\n"
      "  cv0: { kind: Condvar, paired_with: m0 }\n"
      "  s0: { kind: Semaphore, init: 1 }\n"
      "  c0: { kind: Channel }\n"
      "  v: { kind: Var, type: Int, init: 0 }\n"
      "  x: { kind: Atomic, type: Int, init: 0 }\n";
  auto with = [&](const std::string& body) {
    return std::string(decls) + "functions:\n  f:\n    body:\n" + body +
           "entry: f\n";
  };

  CHECK(codes_of(with("    - { sid: a, op: lock(s0) }\n")).count("E301"));
  CHECK(codes_of(with("    - { sid: a, op: read_lock(m0) }\n")).count("E302"));
  CHECK(codes_of(with("    - { sid: a, op: lock(rw) }\n")).count("E302"));
  CHECK(codes_of(with("    - { sid: a, op: notify_one(m0) }\n")).count("E303"));
  CHECK(codes_of(with("    - { sid: a, op: acquire(c0) }\n")).count("E305"));
  CHECK(codes_of(with("    - { sid: a, op: send(s0) }\n")).count("E306"));
  CHECK(codes_of(with("    - { sid: a, op: read(x) }\n")).count("E307"));
  CHECK(codes_of(with("    - { sid: a, op: store(v, 1) }\n")).count("E308"));

  // wait against the wrong mutex
  std::string doc = std::string(decls) +
                    "  m1: { kind: Mutex }\n"
                    "functions:\n  f:\n    body:\n"
                    "    - { sid: a, op: lock(m1), next: b }\n"
                    "    - { sid: b, op: wait(cv0, m1), next: c }\n"
                    "    - { sid: c, op: drop(m1) }\nentry: f\n";
  CHECK(codes_of(doc).count("E304"));

  CHECK(codes_of("resources:\n  cv0: { kind: Condvar }\nfunctions:\n  f:\n"
                 "    body:\n    - { sid: a, op: nop }\nentry: f\n")
            .count("E309"));

  CHECK(codes_of("resources:\n  m0: { kind: Mutex }\n"
                 "  v: { kind: Var, type: Int, init: 0 }\n"
                 "protection:\n  v: [m0]\n"
                 "functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: read(v) }\nentry: f\n")
            .count("E310"));
}

TEST_CASE("thread pairing rules E401-E406") {
  CHECK(codes_of("functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: spawn(g) }\n"
                 "  g:\n    body:\n    - { sid: b, op: nop }\nentry: f\n")
            .count("E401"));
  CHECK(codes_of("resources:\n  flag: { kind: Var, type: Bool, init: false }\n"
                 "functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: spawn(g), next: b }\n"
                 "    - { sid: b, op: nop, branch: { cond: flag == true, "
                 "true: a, false: c } }\n"
                 "    - { sid: c, op: join(g) }\n"
                 "  g:\n    body:\n    - { sid: d, op: nop }\nentry: f\n")
            .count("E402"));
  CHECK(codes_of("functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: join(g) }\n"
                 "  g:\n    body:\n    - { sid: b, op: nop }\nentry: f\n")
            .count("E403"));
  CHECK(codes_of("functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: spawn(g), next: b }\n"
                 "    - { sid: b, op: spawn(g), next: c }\n"
                 "    - { sid: c, op: join(g) }\n"
                 "  g:\n    body:\n    - { sid: d, op: nop }\nentry: f\n")
            .count("E404"));
  CHECK(codes_of("functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: spawn(g), next: b }\n"
                 "    - { sid: b, op: join(g) }\n"
                 "summaries:\n  g: { reads: [], writes: [], calls: [], "
                 "has_concurrency: false }\nentry: f\n")
            .count("E405"));
  CHECK(codes_of("functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: spawn(f), next: b }\n"
                 "    - { sid: b, op: join(f) }\nentry: f\n")
            .count("E406"));

  // the generated entry of the threads form is exempt from pairing rules
  auto art = load_fixture("pattern2.cir");
  CHECK(check_artifact(art).ok());
}

TEST_CASE("lock discipline rules E501-E507") {
  CHECK(codes_of("resources:\n  m0: { kind: Mutex }\n"
                 "functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: lock(m0) }\nentry: f\n")
            .count("E501"));
  CHECK(codes_of("resources:\n  m0: { kind: Mutex }\n"
                 "functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: lock(m0), next: b }\n"
                 "    - { sid: b, op: lock(m0), next: c }\n"
                 "    - { sid: c, op: drop(m0) }\nentry: f\n")
            .count("E503"));
  CHECK(codes_of("resources:\n  m0: { kind: Mutex }\n"
                 "functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: drop(m0) }\nentry: f\n")
            .count("E504"));
  CHECK(codes_of("resources:\n  rw: { kind: RwLock }\n"
                 "  flag: { kind: Var, type: Bool, init: false }\n"
                 "functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: nop, branch: { cond: flag == true, "
                 "true: b, false: c } }\n"
                 "    - { sid: b, op: read_lock(rw), next: d }\n"
                 "    - { sid: c, op: write_lock(rw), next: d }\n"
                 "    - { sid: d, op: drop(rw) }\nentry: f\n")
            .count("E505"));
  CHECK(codes_of("resources:\n  m0: { kind: Mutex }\n"
                 "  cv0: { kind: Condvar, paired_with: m0 }\n"
                 "functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: wait(cv0, m0), next: b }\n"
                 "    - { sid: b, op: nop }\nentry: f\n")
            .count("E506"));
  CHECK(codes_of("resources:\n  m0: { kind: Mutex }\n"
                 "  flag: { kind: Var, type: Bool, init: false }\n"
                 "functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: lock(m0), next: b }\n"
                 "    - { sid: b, op: nop, branch: { cond: flag == true, "
                 "true: c, false: d } }\n"
                 "    - { sid: c, op: drop(m0), next: e }\n"
                 "    - { sid: d, op: nop, next: e }\n"
                 "    - { sid: e, op: nop }\nentry: f\n")
            .count("E507"));
}

TEST_CASE("control rules E601-E604") {
  CHECK(codes_of("functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: nop, next: zz }\nentry: f\n")
            .count("E601"));
  CHECK(codes_of("functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: nop, next: c }\n"
                 "    - { sid: b, op: nop, next: c }\n"
                 "    - { sid: c, op: nop }\nentry: f\n")
            .count("E602"));
  CHECK(codes_of("functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: nop, next: b }\n"
                 "    - { sid: b, op: nop, next: a }\nentry: f\n")
            .count("E603"));
  // wait must fall through to a plain next
  CHECK(codes_of("resources:\n  m0: { kind: Mutex }\n"
                 "  cv0: { kind: Condvar, paired_with: m0 }\n"
                 "functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: lock(m0), next: b }\n"
                 "    - { sid: b, op: wait(cv0, m0), branch: { "
                 "cond: true, true: c, false: c } }\n"
                 "    - { sid: c, op: drop(m0) }\nentry: f\n")
            .count("E604"));
  // cas must branch
  CHECK(codes_of("resources:\n  x: { kind: Atomic, type: Int, init: 0 }\n"
                 "functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: cas(x, 0, 1), next: b }\n"
                 "    - { sid: b, op: nop }\nentry: f\n")
            .count("E604"));
  // branches hang only off pure or read-like operations
  CHECK(codes_of("resources:\n  m0: { kind: Mutex }\n"
                 "  flag: { kind: Var, type: Bool, init: false }\n"
                 "functions:\n  f:\n    body:\n"
                 "    - { sid: a, op: lock(m0), branch: { cond: flag == true, "
                 "true: b, false: b } }\n"
                 "    - { sid: b, op: drop(m0) }\nentry: f\n")
            .count("E604"));
}

TEST_CASE("protection rules E701-E705") {
  CHECK(codes_of("resources:\n  m0: { kind: Mutex }\n"
                 "protection:\n  m0: [m0]\n"
                 "functions:\n  f:\n    body:\n    - { sid: a, op: nop }\n"
                 "entry: f\n")
            .count("E701"));
  CHECK(codes_of("resources:\n  m0: { kind: Mutex }\n"
                 "protection:\n  ghost: [m0]\n"
                 "functions:\n  f:\n    body:\n    - { sid: a, op: nop }\n"
                 "entry: f\n")
            .count("E702"));
  CHECK(codes_of("resources:\n  s0: { kind: Semaphore, init: 1 }\n"
                 "  v: { kind: Var, type: Int, init: 0 }\n"
                 "protection:\n  v: [s0]\n"
                 "functions:\n  f:\n    body:\n    - { sid: a, op: nop }\n"
                 "entry: f\n")
            .count("E703"));
  CHECK(codes_of("resources:\n  v: { kind: Var, type: Int, init: 0 }\n"
                 "protection:\n  v: []\n"
                 "functions:\n  f:\n    body:\n    - { sid: a, op: nop }\n"
                 "entry: f\n")
            .count("E704"));
  CHECK(codes_of("resources:\n  m0: { kind: Mutex }\n"
                 "  v: { kind: Var, type: Int, init: 0 }\n"
                 "protection:\n  v: [m0]\n  v: [m0]\n"
                 "functions:\n  f:\n    body:\n    - { sid: a, op: nop }\n"
                 "entry: f\n")
            .count("E705"));
}

TEST_CASE("summary rules E801-E806") {
  const char* decls =
      "resources:\n"
      "  v: { kind: Var, type: Int, init: 0 }\n"
      "  w: { kind: Var, type: Int, init: 0 }\n";

  CHECK(codes_of(std::string(decls) +
                 "functions:\n  g:\n    body:\n"
                 "    - { sid: a, op: write(v, 1) }\n"
                 "summaries:\n  g: { reads: [], writes: [], calls: [], "
                 "has_concurrency: false }\nentry: g\n")
            .count("E801"));
  CHECK(codes_of(std::string(decls) +
                 "functions:\n  g:\n    body:\n"
                 "    - { sid: a, op: nop }\n"
                 "summaries:\n  g: { reads: [], writes: [w], calls: [], "
                 "has_concurrency: false }\nentry: g\n")
            .count("E802"));
  CHECK(codes_of(std::string(decls) +
                 "functions:\n  g:\n    body:\n"
                 "    - { sid: a, op: read(v) }\n"
                 "summaries:\n  g: { reads: [], writes: [], calls: [], "
                 "has_concurrency: false }\nentry: g\n")
            .count("E803"));
  CHECK(codes_of(std::string(decls) +
                 "functions:\n  g:\n    body:\n"
                 "    - { sid: a, op: call(h) }\n"
                 "summaries:\n"
                 "  g: { reads: [], writes: [], calls: [], "
                 "has_concurrency: false }\n"
                 "  h: { reads: [], writes: [], calls: [], "
                 "has_concurrency: false }\nentry: g\n")
            .count("E804"));
  CHECK(codes_of("resources:\n  m0: { kind: Mutex }\n"
                 "functions:\n  g:\n    body:\n"
                 "    - { sid: a, op: lock(m0), next: b }\n"
                 "    - { sid: b, op: drop(m0) }\n"
                 "summaries:\n  g: { reads: [], writes: [], calls: [], "
                 "has_concurrency: false }\nentry: g\n")
            .count("E805"));
  CHECK(codes_of("functions:\n  g:\n    body:\n    - { sid: a, op: nop }\n"
                 "summaries:\n  g: { reads: [ghost], writes: [], calls: [], "
                 "has_concurrency: false }\nentry: g\n")
            .count("E806"));
}

TEST_CASE("findings come out sorted and fully attributed") {
  auto findings = check_artifact(parse_ok("functions:\n  f:\n    body:\n"
                                          "    - { sid: a, op: lock(ghost), next: b }\n"
                                          "    - { sid: b, op: drop(ghost) }\n"
                                          "entry: f\n"))
                      .findings;
  REQUIRE(findings.size() >= 2);
  CHECK(std::is_sorted(findings.begin(), findings.end(),
                       [](const Finding& x, const Finding& y) {
                         return std::tie(x.anchor, x.code, x.message) <
                                std::tie(y.anchor, y.code, y.message);
                       }));
  for (const auto& f : findings) {
    CHECK(f.code == "E101");
    CHECK(f.function_name == "f");
  }
}

TEST_CASE("autofixes repair transfers, duplicate sids and exit leaks") {
  std::string doc =
      "resources:\n  m0: { kind: Mutex }\n"
      "functions:\n  f:\n    body:\n"
      "    - { sid: a, op: lock(m0), next: b }\n"
      "    - { sid: b, op: nop }\n"  // omitted transfer mid-body
      "    - { sid: c, op: nop }\n"  // returns while m0 is held
      "  g:\n    body:\n"
      "    - { sid: d, op: nop, next: a }\n"
      "    - { sid: a, op: nop }\n"  // reuses f's sid
      "entry: f\n";
  auto art = parse_ok(doc);

  auto before = check_artifact(art);
  REQUIRE_FALSE(before.ok());
  CHECK(before.all_autofixable());

  auto fixed = apply_autofixes(art);
  CHECK(fixed.remaining.empty());
  REQUIRE(fixed.applied.size() == 3);
  std::set<std::string> codes;
  for (const auto& f : fixed.applied) codes.insert(f.code);
  CHECK(codes == std::set<std::string>{"E001", "E102", "E501"});

  // mid-body statement got linked to its successor
  const FunctionDef* f = fixed.artifact.find_function("f");
  REQUIRE(f != nullptr);
  CHECK(f->find_statement("b")->transfer.next == "c");
  // a drop was appended before the leaking exit
  REQUIRE(f->body.size() == 4);
  CHECK(f->body[3].op.kind == OpKind::Drop);
  CHECK(f->body[3].op.target == "m0");
  CHECK(f->find_statement("c")->transfer.next == f->body[3].sid);

  // the repaired artifact checks clean and still parses after serialization
  CHECK(check_artifact(fixed.artifact).ok());
  auto round = parse_cir(serialize_cir(fixed.artifact));
  REQUIRE(round.ok());
  CHECK(*round.artifact == fixed.artifact);
}

TEST_CASE("duplicate sid rename rewires the holding function only") {
  std::string doc =
      "functions:\n  f:\n    body:\n"
      "    - { sid: a, op: nop, next: b }\n"
      "    - { sid: b, op: nop }\n"
      "  g:\n    body:\n"
      "    - { sid: c, op: nop, next: b }\n"
      "    - { sid: b, op: nop }\n"
      "entry: f\n";
  auto fixed = apply_autofixes(parse_ok(doc));
  CHECK(fixed.remaining.empty());

  const FunctionDef* f = fixed.artifact.find_function("f");
  const FunctionDef* g = fixed.artifact.find_function("g");
  REQUIRE(f != nullptr);
  REQUIRE(g != nullptr);
  CHECK(g->body[1].sid == "b__1");
  CHECK(g->body[0].transfer.next == "b__1");
  // the first definition and its references are untouched
  CHECK(f->body[1].sid == "b");
  CHECK(f->body[0].transfer.next == "b");
}
