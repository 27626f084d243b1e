#pragma once

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "cvnverify/cir.hpp"

namespace testing {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::string fixture_path(const std::string& name) {
  return std::string(FIXTURE_DIR) + "/" + name;
}

inline std::string fixture_text(const std::string& name) {
  return read_file(fixture_path(name));
}

inline cvnverify::CirArtifact load_fixture(const std::string& name) {
  auto result = cvnverify::parse_cir(fixture_text(name));
  if (!result.ok()) {
    std::string msg = "fixture " + name + " failed to parse:";
    for (const auto& e : result.errors) {
      msg += " [" + e.code + "] " + e.message;
    }
    throw std::runtime_error(msg);
  }
  return *result.artifact;
}

// Runs a shell command, returns (exit code, captured stdout).
inline std::pair<int, std::string> run_command(const std::string& cmd) {
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed: " + cmd);
  std::string out;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = pclose(pipe);
  int code = -1;
  if (WIFEXITED(status)) code = WEXITSTATUS(status);
  return {code, out};
}

}  // namespace testing
