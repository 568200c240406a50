#pragma once

// Runs the command line binary named by WHLAB_BIN and captures stdout plus
// the exit code.  Fixture paths resolve against WHLAB_DATA.  Both variables
// are injected by the test harness.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include <sys/wait.h>

namespace testsupport {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

inline std::string require_env(const char* name) {
  const char* value = std::getenv(name);
  if (value == nullptr || *value == '\0') {
    throw std::runtime_error(std::string(name) +
                             " is not set; run through ctest");
  }
  return value;
}

inline std::string data_path(const std::string& file) {
  return require_env("WHLAB_DATA") + "/" + file;
}

// `args` is appended verbatim after the binary path; stderr is discarded so
// diagnostic messages cannot pollute the captured JSON.
inline CliResult run_cli(const std::string& args) {
  const std::string command = require_env("WHLAB_BIN") + " " + args + " 2>/dev/null";
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("popen failed: " + command);
  CliResult result;
  std::array<char, 4096> buffer{};
  std::size_t got = 0;
  while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.out.append(buffer.data(), got);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

}  // namespace testsupport
