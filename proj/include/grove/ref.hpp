#pragma once

#include <string>

namespace grove {

enum class RefKind { branch, pull_request };

const char* to_string(RefKind kind);

// Identity of an isolation lineage: one branch or one pull request. The
// safe_id is the token every other component keys on — workspace directory
// names, task tags, and task-definition names are all derived from it.
struct RefKey {
  RefKind kind = RefKind::branch;
  std::string name;     // branch name, or PR number as text
  std::string safe_id;  // matches [a-z0-9][a-z0-9-]{0,62}

  bool operator==(const RefKey& other) const = default;
};

// Deterministically derives a RefKey from (kind, name). The safe_id is the
// sanitized name plus a 12-hex-digit hash of the raw (kind, name) pair, so
// distinct inputs keep distinct safe_ids even when sanitization collides.
// Pull requests get a "pr-" prefix so branch "7" and PR 7 never meet.
RefKey make_ref_key(RefKind kind, const std::string& name);

}  // namespace grove
