#pragma once

#include <sstream>
#include <string>

namespace fnncc::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Threshold comes from the FNNCC_LOG environment variable
// (error|warn|info|debug, default warn) unless overridden.
Level threshold();
void set_threshold(Level level);
void write(Level level, const std::string& message);

template <typename... Args>
void emit(Level level, Args&&... args) {
  if (level > threshold()) return;
  std::ostringstream oss;
  (oss << ... << args);
  write(level, oss.str());
}

template <typename... Args>
void warn(Args&&... args) {
  emit(Level::warn, std::forward<Args>(args)...);
}

template <typename... Args>
void info(Args&&... args) {
  emit(Level::info, std::forward<Args>(args)...);
}

template <typename... Args>
void debug(Args&&... args) {
  emit(Level::debug, std::forward<Args>(args)...);
}

}  // namespace fnncc::log
