#include "grove/event.hpp"

namespace grove {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::branch_pushed: return "branch-pushed";
    case EventKind::pr_opened: return "pr-opened";
    case EventKind::pr_updated: return "pr-updated";
    case EventKind::branch_deleted: return "branch-deleted";
    case EventKind::pr_closed: return "pr-closed";
  }
  return "?";
}

}  // namespace grove
