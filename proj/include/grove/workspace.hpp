#pragma once

#include <chrono>
#include <filesystem>
#include <string>

#include "grove/ref.hpp"

namespace grove {

// One ref's shared-storage directory: <storage_root>/<safe_id> with the
// conventional src/, out/ and results/ subdirectories.
struct Workspace {
  RefKey ref;
  std::filesystem::path root_path;
  std::chrono::system_clock::time_point created_at;

  std::filesystem::path src_dir() const { return root_path / "src"; }
  std::filesystem::path out_dir() const { return root_path / "out"; }
  std::filesystem::path results_dir() const { return root_path / "results"; }
};

// Per-ref directories under one storage root. Refs never share a directory,
// and no operation here touches a path outside the storage root.
class WorkspaceStore {
 public:
  explicit WorkspaceStore(std::filesystem::path storage_root);

  const std::filesystem::path& storage_root() const { return root_; }

  // Creates (or re-creates) the ref's directory. Pre-existing content from an
  // earlier run of the same ref is cleared.
  Workspace create(const RefKey& ref);

  // Copies the source tree, byte for byte, under <workspace>/src.
  void stage_sources(const Workspace& ws, const std::filesystem::path& source_tree);

  // Removes the contents of the ref's directory but keeps the directory.
  void clear(const RefKey& ref);

  // Removes the ref's directory entirely. Idempotent; symlinks inside the
  // workspace are removed without following them.
  void destroy(const RefKey& ref);

  bool exists(const RefKey& ref) const;
  std::filesystem::path path_for(const RefKey& ref) const;

 private:
  std::filesystem::path root_;
};

}  // namespace grove
