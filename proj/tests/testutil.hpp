#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace testutil {

inline std::string data_path(const std::string& name) {
  return std::string(EFFSCREEN_TEST_DATA) + "/" + name;
}

inline std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
  if (!f) throw std::runtime_error("cannot write " + path);
}

// Self-cleaning unique directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix) {
    std::random_device rd;
    path_ = (std::filesystem::temp_directory_path() /
             (prefix + "_" + std::to_string(rd()) + "_" + std::to_string(rd())))
                .string();
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  std::string path_;
};

// Run the command-line tool; returns the exit code, optionally capturing stdout.
inline int run_cli(const std::string& args, std::string* out = nullptr) {
  std::string cmd = std::string(EFFSCREEN_CLI_PATH) + " " + args;
  cmd += out ? " 2>/dev/null" : " >/dev/null 2>/dev/null";
  if (!out) {
    int rc = std::system(cmd.c_str());
    return rc < 0 ? rc : WEXITSTATUS(rc);
  }
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) throw std::runtime_error("popen failed");
  char buf[4096];
  out->clear();
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, p)) > 0) out->append(buf, got);
  int rc = pclose(p);
  return rc < 0 ? rc : WEXITSTATUS(rc);
}

}  // namespace testutil
