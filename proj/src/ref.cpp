#include "grove/ref.hpp"

#include <cctype>

#include "grove/util.hpp"

namespace grove {

const char* to_string(RefKind kind) {
  return kind == RefKind::branch ? "branch" : "pull-request";
}

namespace {

// Lowercase [a-z0-9] survive; every other character becomes '-'. Runs of '-'
// collapse and the ends are trimmed so the result can start a directory name.
std::string sanitize(const std::string& name) {
  std::string out;
  out.reserve(name.size());
  for (unsigned char c : name) {
    const char lc = static_cast<char>(std::tolower(c));
    if ((lc >= 'a' && lc <= 'z') || (lc >= '0' && lc <= '9')) {
      out += lc;
    } else if (!out.empty() && out.back() != '-') {
      out += '-';
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out;
}

}  // namespace

RefKey make_ref_key(RefKind kind, const std::string& name) {
  std::string tagged(1, kind == RefKind::branch ? 'b' : 'p');
  tagged += '\0';
  tagged += name;
  const std::string suffix = util::to_hex(util::fnv1a64(tagged), 12);

  std::string core = sanitize(name);
  // Budget: optional "pr-" prefix, core, "-", 12 hash chars, total <= 63.
  const size_t prefix_len = kind == RefKind::pull_request ? 3 : 0;
  const size_t max_core = 63 - prefix_len - 1 - suffix.size();
  if (core.size() > max_core) {
    core.resize(max_core);
    while (!core.empty() && core.back() == '-') core.pop_back();
  }

  std::string safe_id;
  if (kind == RefKind::pull_request) safe_id += "pr-";
  if (!core.empty()) {
    safe_id += core;
    safe_id += '-';
  }
  safe_id += suffix;
  return RefKey{kind, name, safe_id};
}

}  // namespace grove
