#include "grove/sources.hpp"

#include "grove/errors.hpp"
#include "grove/util.hpp"

namespace grove {

namespace fs = std::filesystem;

DirSourceProvider::DirSourceProvider(fs::path root) : root_(std::move(root)) {}

fs::path DirSourceProvider::branch_tree(const std::string& name) const {
  fs::path per_branch = root_ / "branches" / name;
  if (fs::is_directory(per_branch)) return per_branch;
  return root_;
}

void DirSourceProvider::materialize(const RefKey& ref, const std::optional<std::string>&,
                                    const fs::path& dest) {
  if (!fs::is_directory(root_)) {
    throw EnvironmentError("source root missing: " + root_.string());
  }

  if (ref.kind == RefKind::branch) {
    util::copy_tree(branch_tree(ref.name), dest);
    return;
  }

  // Pull request: main tree first, then the PR's files on top.
  util::copy_tree(branch_tree("main"), dest);
  fs::path overlay = root_ / "pulls" / ref.name;
  if (!fs::is_directory(overlay)) return;  // PR with no recorded delta
  if (fs::exists(overlay / ".conflict")) {
    throw RejectedError("merge with main is unmaterializable for pull request " + ref.name);
  }
  util::copy_tree(overlay, dest);
}

}  // namespace grove
