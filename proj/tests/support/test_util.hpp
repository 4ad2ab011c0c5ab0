#pragma once

// Shared helpers for the test binaries: scratch directories, fixture paths,
// and a reference interpreter the engine tests compare against.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "grove/engine.hpp"
#include "grove/event.hpp"
#include "grove/sim_backend.hpp"
#include "grove/util.hpp"

namespace testsupport {

inline std::filesystem::path repo_root() { return GROVE_REPO_ROOT; }

inline std::filesystem::path fixture(const std::string& rel) { return repo_root() / rel; }

// Fresh directory under the system temp root, removed on destruction.
struct ScratchDir {
  std::filesystem::path path;

  ScratchDir()
      : path(std::filesystem::temp_directory_path() / grove::util::fresh_id("grove-test")) {
    std::filesystem::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  operator const std::filesystem::path&() const { return path; }
  std::filesystem::path operator/(const std::string& rel) const { return path / rel; }
};

// Lays out a minimal source tree the pipeline can run against: one app file
// and `test_count` discoverable QA scripts.
inline void make_source_tree(const std::filesystem::path& root, int test_count = 2) {
  grove::util::write_file(root / "app" / "app.txt", "app body\n");
  for (int i = 1; i <= test_count; ++i) {
    grove::util::write_file(root / "tests" / ("case" + std::to_string(i) + ".txt"), "");
  }
}

// Pumps a manual-mode simulator until the engine goes idle; returns false if
// the engine is still busy after `max_ticks`. `burst` ticks pass per idle
// check — 1 keeps timing fine-grained, larger values trade granularity for
// wall-clock speed in long property runs.
inline bool settle(grove::Engine& engine, grove::SimBackend& sim, int max_ticks = 4000,
                   int burst = 1, int idle_ms = 5) {
  for (int i = 0; i < max_ticks; i += burst) {
    if (engine.wait_idle(idle_ms)) return true;
    sim.advance(burst);
  }
  return engine.wait_idle(idle_ms);
}

// ---------------------------------------------------------------------------
// Reference model: the naive, obviously-correct interpretation of an event
// sequence. One event at a time, no queues, no concurrency. The engine must
// land on the same final environment set for the events it actually ran
// (displaced deliveries excluded).

enum class RefFate { success, fail_before_deploy, fail_deploy_or_later };

struct RefModelEvent {
  grove::PipelineEvent event;
  RefFate fate = RefFate::success;  // meaningful for main-pipeline events only
};

inline std::map<std::string, bool> reference_environments(const std::vector<RefModelEvent>& seq) {
  std::map<std::string, bool> env;  // safe_id -> environment present
  for (const auto& [event, fate] : seq) {
    if (grove::is_cleanup_event(event.kind)) {
      env.erase(event.ref.safe_id);
      continue;
    }
    switch (fate) {
      case RefFate::success:
        env[event.ref.safe_id] = true;
        break;
      case RefFate::fail_deploy_or_later:
        env.erase(event.ref.safe_id);
        break;
      case RefFate::fail_before_deploy:
        break;  // whatever was there stays
    }
  }
  return env;
}

}  // namespace testsupport
