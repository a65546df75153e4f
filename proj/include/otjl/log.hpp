#pragma once

#include <iostream>
#include <mutex>
#include <sstream>
#include <string>

namespace otjl {

enum class LogLevel { quiet, info, debug };

class Log {
 public:
  static Log& get() {
    static Log instance;
    return instance;
  }

  void set_level(LogLevel l) { level_ = l; }
  LogLevel level() const { return level_; }

  template <class... Args>
  void info(const Args&... args) {
    write(LogLevel::info, args...);
  }
  template <class... Args>
  void debug(const Args&... args) {
    write(LogLevel::debug, args...);
  }

 private:
  template <class... Args>
  void write(LogLevel at, const Args&... args) {
    if (level_ < at) return;
    std::ostringstream line;
    (line << ... << args);
    std::lock_guard lock(mutex_);
    std::cerr << line.str() << '\n';
  }

  LogLevel level_ = LogLevel::info;
  std::mutex mutex_;
};

}  // namespace otjl
