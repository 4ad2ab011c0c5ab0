// Per-ref directory isolation: the workspace store carries every run's
// files, so containment and idempotent teardown matter more than speed.

#include <doctest.h>

#include "grove/util.hpp"
#include "grove/workspace.hpp"
#include "support/test_util.hpp"

using namespace grove;
namespace fs = std::filesystem;

namespace {
RefKey branch(const std::string& name) { return make_ref_key(RefKind::branch, name); }
}  // namespace

TEST_CASE("create gives each ref its own directory under the root") {
  testsupport::ScratchDir tmp;
  WorkspaceStore store(tmp / "ws");

  Workspace a = store.create(branch("feature-a"));
  Workspace b = store.create(branch("feature-b"));

  CHECK(a.root_path != b.root_path);
  CHECK(fs::is_directory(a.root_path));
  CHECK(fs::is_directory(b.root_path));
  CHECK(util::path_within(a.root_path, tmp / "ws"));
  CHECK(util::path_within(b.root_path, tmp / "ws"));
  CHECK(a.root_path.filename() == branch("feature-a").safe_id);
  CHECK(store.exists(branch("feature-a")));
  CHECK(store.path_for(branch("feature-a")) == a.root_path);
}

TEST_CASE("re-creating a workspace clears the previous run's leftovers") {
  testsupport::ScratchDir tmp;
  WorkspaceStore store(tmp / "ws");

  Workspace first = store.create(branch("feature-a"));
  util::write_file(first.out_dir() / "stale.bin", "old artifact");

  Workspace second = store.create(branch("feature-a"));
  CHECK(second.root_path == first.root_path);
  CHECK_FALSE(fs::exists(first.out_dir() / "stale.bin"));
}

TEST_CASE("stage_sources copies the tree byte for byte") {
  testsupport::ScratchDir tmp;
  WorkspaceStore store(tmp / "ws");
  util::write_file(tmp / "origin/app/main.txt", "content");
  util::write_file(tmp / "origin/tests/t.txt", "check");

  Workspace ws = store.create(branch("feature-a"));
  store.stage_sources(ws, tmp / "origin");
  CHECK(util::read_file(ws.src_dir() / "app/main.txt") == "content");
  CHECK(util::read_file(ws.src_dir() / "tests/t.txt") == "check");
}

TEST_CASE("clear empties the directory but keeps it; destroy removes it") {
  testsupport::ScratchDir tmp;
  WorkspaceStore store(tmp / "ws");
  Workspace ws = store.create(branch("feature-a"));
  util::write_file(ws.src_dir() / "f.txt", "x");

  store.clear(branch("feature-a"));
  CHECK(fs::is_directory(ws.root_path));
  CHECK(fs::is_empty(ws.root_path));

  store.destroy(branch("feature-a"));
  CHECK_FALSE(fs::exists(ws.root_path));
  CHECK_FALSE(store.exists(branch("feature-a")));
}

TEST_CASE("destroy and clear are idempotent") {
  testsupport::ScratchDir tmp;
  WorkspaceStore store(tmp / "ws");
  store.create(branch("feature-a"));

  store.destroy(branch("feature-a"));
  CHECK_NOTHROW(store.destroy(branch("feature-a")));  // already gone
  CHECK_NOTHROW(store.clear(branch("feature-a")));    // nothing to clear
  CHECK_NOTHROW(store.destroy(branch("never-created")));
}

TEST_CASE("destroy removes symlinks without following them") {
  testsupport::ScratchDir tmp;
  WorkspaceStore store(tmp / "ws");
  util::write_file(tmp / "outside/precious.txt", "do not delete");

  Workspace ws = store.create(branch("feature-a"));
  fs::create_directory_symlink(tmp / "outside", ws.root_path / "escape");
  fs::create_symlink(tmp / "outside/precious.txt", ws.root_path / "escape-file");

  store.destroy(branch("feature-a"));
  CHECK_FALSE(fs::exists(ws.root_path));
  CHECK(util::read_file(tmp / "outside/precious.txt") == "do not delete");
}

TEST_CASE("distinct refs with hostile names never collide") {
  testsupport::ScratchDir tmp;
  WorkspaceStore store(tmp / "ws");

  // Slash-bearing and dot-bearing names would collide naively.
  Workspace a = store.create(branch("release/1.2"));
  Workspace b = store.create(branch("release-1.2"));
  Workspace c = store.create(branch("release.1/2"));
  CHECK(a.root_path != b.root_path);
  CHECK(b.root_path != c.root_path);
  CHECK(a.root_path != c.root_path);
  // Nothing escaped the storage root, name games notwithstanding.
  for (const auto& ws : {a, b, c}) {
    CHECK(util::path_within(ws.root_path, tmp / "ws"));
    CHECK(ws.root_path.parent_path() == fs::path(tmp / "ws"));
  }
}

TEST_CASE("branch and PR with the same text name stay separate") {
  testsupport::ScratchDir tmp;
  WorkspaceStore store(tmp / "ws");
  Workspace b = store.create(make_ref_key(RefKind::branch, "42"));
  Workspace p = store.create(make_ref_key(RefKind::pull_request, "42"));
  CHECK(b.root_path != p.root_path);
}
