#include "grove/workspace.hpp"

#include "grove/errors.hpp"
#include "grove/log.hpp"
#include "grove/util.hpp"

namespace grove {

namespace fs = std::filesystem;

namespace {

// Belt-and-braces: safe_ids are already path-safe by construction, but every
// mutating operation re-checks containment before touching the filesystem.
void require_inside(const fs::path& p, const fs::path& root) {
  if (!util::path_within(p, root)) {
    throw EnvironmentError("path escapes storage root: " + p.string());
  }
}

}  // namespace

WorkspaceStore::WorkspaceStore(fs::path storage_root) : root_(std::move(storage_root)) {}

fs::path WorkspaceStore::path_for(const RefKey& ref) const { return root_ / ref.safe_id; }

bool WorkspaceStore::exists(const RefKey& ref) const { return fs::exists(path_for(ref)); }

Workspace WorkspaceStore::create(const RefKey& ref) {
  std::error_code ec;
  if (!fs::exists(root_)) {
    fs::create_directories(root_, ec);
    if (ec) throw EnvironmentError("storage root unusable: " + root_.string() + ": " + ec.message());
  }
  const fs::path dir = path_for(ref);
  require_inside(dir, root_);
  fs::remove_all(dir, ec);  // clear leftovers from a previous run of this ref
  if (ec) throw EnvironmentError("cannot clear workspace " + dir.string() + ": " + ec.message());
  fs::create_directories(dir, ec);
  if (ec) throw EnvironmentError("cannot create workspace " + dir.string() + ": " + ec.message());

  Workspace ws{ref, dir, std::chrono::system_clock::now()};
  fs::create_directories(ws.src_dir());
  fs::create_directories(ws.out_dir());
  fs::create_directories(ws.results_dir());
  return ws;
}

void WorkspaceStore::stage_sources(const Workspace& ws, const fs::path& source_tree) {
  require_inside(ws.src_dir(), root_);
  util::copy_tree(source_tree, ws.src_dir());
}

void WorkspaceStore::clear(const RefKey& ref) {
  const fs::path dir = path_for(ref);
  require_inside(dir, root_);
  if (!fs::exists(dir)) return;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::error_code ec;
    fs::remove_all(entry.path(), ec);  // does not follow symlinks
    if (ec) log::warn("workspace clear: could not remove ", entry.path().string(), ": ", ec.message());
  }
}

void WorkspaceStore::destroy(const RefKey& ref) {
  const fs::path dir = path_for(ref);
  require_inside(dir, root_);
  std::error_code ec;
  fs::remove_all(dir, ec);
  if (ec) log::warn("workspace destroy: ", dir.string(), ": ", ec.message());
}

}  // namespace grove
