#pragma once

#include "handsynth/error.hpp"

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <functional>
#include <string>
#include <unistd.h>

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("handsynth_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Error code thrown by `fn`; fails the test when nothing is thrown.
inline handsynth::ErrorCode error_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const handsynth::Error& e) {
    return e.code();
  }
  FAIL("expected a handsynth::Error");
  return handsynth::ErrorCode::ConfigError;
}

}  // namespace testing
