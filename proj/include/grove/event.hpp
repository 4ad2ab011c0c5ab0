#pragma once

#include <chrono>
#include <optional>
#include <string>

#include "grove/ref.hpp"

namespace grove {

enum class EventKind {
  branch_pushed,
  pr_opened,
  pr_updated,
  branch_deleted,
  pr_closed,
};

const char* to_string(EventKind kind);

inline bool is_cleanup_event(EventKind kind) {
  return kind == EventKind::branch_deleted || kind == EventKind::pr_closed;
}

// Normalized webhook event. Branch kinds pair with branch refs and PR kinds
// with pull-request refs; the gateway enforces that when it builds one.
struct PipelineEvent {
  EventKind kind = EventKind::branch_pushed;
  RefKey ref;
  std::optional<std::string> commit_id;  // absent for deletion events
  std::string delivery_id;
  std::chrono::system_clock::time_point received_at;
};

}  // namespace grove
