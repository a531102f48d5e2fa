#include "fnncc/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace fnncc::log {

namespace {

Level parse_env() {
  const char* env = std::getenv("FNNCC_LOG");
  if (env == nullptr) return Level::warn;
  if (std::strcmp(env, "error") == 0) return Level::error;
  if (std::strcmp(env, "warn") == 0) return Level::warn;
  if (std::strcmp(env, "info") == 0) return Level::info;
  if (std::strcmp(env, "debug") == 0) return Level::debug;
  return Level::warn;
}

Level& threshold_ref() {
  static Level level = parse_env();
  return level;
}

std::mutex& mutex_ref() {
  static std::mutex m;
  return m;
}

const char* level_tag(Level level) {
  switch (level) {
    case Level::error: return "error";
    case Level::warn: return "warn";
    case Level::info: return "info";
    case Level::debug: return "debug";
  }
  return "?";
}

}  // namespace

Level threshold() { return threshold_ref(); }

void set_threshold(Level level) { threshold_ref() = level; }

void write(Level level, const std::string& message) {
  std::lock_guard<std::mutex> lock(mutex_ref());
  std::fprintf(stderr, "[fnncc:%s] %s\n", level_tag(level), message.c_str());
}

}  // namespace fnncc::log
