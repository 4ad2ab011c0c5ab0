#pragma once

#include <mutex>
#include <sstream>
#include <string>

namespace grove::log {

enum class Level { debug, info, warn, error };

void set_min_level(Level level);
void emit(Level level, const std::string& message);

namespace detail {
template <typename... Args>
std::string concat(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}
}  // namespace detail

template <typename... Args>
void debug(Args&&... args) {
  emit(Level::debug, detail::concat(std::forward<Args>(args)...));
}
template <typename... Args>
void info(Args&&... args) {
  emit(Level::info, detail::concat(std::forward<Args>(args)...));
}
template <typename... Args>
void warn(Args&&... args) {
  emit(Level::warn, detail::concat(std::forward<Args>(args)...));
}
template <typename... Args>
void error(Args&&... args) {
  emit(Level::error, detail::concat(std::forward<Args>(args)...));
}

}  // namespace grove::log
