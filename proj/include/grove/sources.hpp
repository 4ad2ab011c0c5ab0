#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "grove/ref.hpp"

namespace grove {

// Checkout abstraction: "give me the tree for this ref at this commit".
// No network protocol here — the checkout stage only needs files on disk.
class SourceProvider {
 public:
  virtual ~SourceProvider() = default;

  // Materializes the ref's tree into `dest` (created if missing). For pull
  // requests this is the projected merge with the main branch. Throws when
  // the tree cannot be produced (missing origin, merge conflict, ...).
  virtual void materialize(const RefKey& ref, const std::optional<std::string>& commit_id,
                           const std::filesystem::path& dest) = 0;
};

// Serves trees from a local directory. Two layouts:
//
//   flat:     the root itself is the tree; every ref gets the same files.
//   per-ref:  root/branches/<name> per branch (falling back to the root when
//             a branch has no directory), and root/pulls/<number> holding a
//             pull request's changed files, overlaid on the main tree to
//             model the projected merge.
//
// A pull overlay containing a file named `.conflict` marks the merge as
// unmaterializable and makes materialize throw — the knob tests and demos
// use to force a checkout failure.
class DirSourceProvider final : public SourceProvider {
 public:
  explicit DirSourceProvider(std::filesystem::path root);

  void materialize(const RefKey& ref, const std::optional<std::string>& commit_id,
                   const std::filesystem::path& dest) override;

 private:
  std::filesystem::path branch_tree(const std::string& name) const;

  std::filesystem::path root_;
};

}  // namespace grove
