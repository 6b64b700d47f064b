/* Copyright 2026 The ArgStruct Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Shared helpers for the unit tests.

#ifndef ARGSTRUCT_TESTS_TEST_UTIL_H_
#define ARGSTRUCT_TESTS_TEST_UTIL_H_

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace argstruct::testing {

inline std::string SourcePath(const std::string &relative) {
  return std::string(ARGSTRUCT_SOURCE_DIR) + "/" + relative;
}

inline std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Canonical text form: LF line ends, no trailing blanks, one blank line
// after every sentence.
inline std::string Normalize(const std::string &text) {
  std::istringstream in(text);
  std::string line, out;
  bool blank = true;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) {
      if (!blank) out += "\n";
      blank = true;
      continue;
    }
    if (line.rfind("#DOC", 0) == 0 && !blank) out += "\n";
    out += line + "\n";
    blank = false;
  }
  if (!blank) out += "\n";
  return out;
}

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

// Runs the command-line tool with `args` through the shell and captures
// stdout and stderr together.
inline CommandResult RunCli(const std::string &args) {
  const std::string command = std::string(ARGSTRUCT_CLI) + " " + args + " 2>&1";
  CommandResult result;
  FILE *pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return result;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) result.output.append(buf, n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string &tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("argstruct-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  std::string path() const { return path_.string(); }
  std::string file(const std::string &name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace argstruct::testing

#endif  // ARGSTRUCT_TESTS_TEST_UTIL_H_
