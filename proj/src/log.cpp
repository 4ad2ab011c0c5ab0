#include "grove/log.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>

#include "grove/util.hpp"

namespace grove::log {

namespace {
std::atomic<int> g_min_level{static_cast<int>(Level::info)};
std::mutex g_mutex;

const char* level_tag(Level l) {
  switch (l) {
    case Level::debug: return "DEBUG";
    case Level::info: return "INFO";
    case Level::warn: return "WARN";
    case Level::error: return "ERROR";
  }
  return "?";
}
}  // namespace

void set_min_level(Level level) { g_min_level.store(static_cast<int>(level)); }

void emit(Level level, const std::string& message) {
  if (static_cast<int>(level) < g_min_level.load()) return;
  const std::string ts = util::format_iso8601(std::chrono::system_clock::now());
  std::lock_guard<std::mutex> lock(g_mutex);
  std::fprintf(stderr, "%s %-5s %s\n", ts.c_str(), level_tag(level), message.c_str());
}

}  // namespace grove::log
