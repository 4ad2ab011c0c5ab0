#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "grove/backend.hpp"
#include "grove/event.hpp"
#include "grove/notifier.hpp"
#include "grove/reporting.hpp"
#include "grove/sources.hpp"
#include "grove/workspace.hpp"

namespace grove {

enum class StageStatus { pending, running, success, failed, skipped };
enum class RunOutcome { in_progress, success, failed, aborted };

const char* to_string(StageStatus status);
const char* to_string(RunOutcome outcome);

// The fixed stage list, in execution order. Cleanup always runs, whatever
// happened before it.
extern const std::vector<std::string> kStageOrder;

struct StageEntry {
  std::string name;
  StageStatus status = StageStatus::pending;
  std::uint64_t started_at = 0;  // backend clock units
  std::uint64_t ended_at = 0;
  std::string detail;  // failure cause / log excerpt, empty otherwise
};

// One execution of the main pipeline for one ref.
struct PipelineRun {
  std::string run_id;
  std::uint64_t run_number = 0;  // per-ref, dense over runs that actually started
  RefKey ref;
  PipelineEvent trigger;
  std::vector<StageEntry> stage_log;  // always kStageOrder, in order
  RunOutcome outcome = RunOutcome::in_progress;
  std::vector<std::string> artifact_paths;  // workspace-relative
  std::optional<reporting::TestReport> report;
  std::optional<TaskHandle> environment;  // the deploy task, when deploy succeeded
  std::chrono::system_clock::time_point created_at;
};

// The live QA environment for a ref. At most one per ref at any quiescent
// point; replaced wholesale on the next successful deploy.
struct EnvironmentRecord {
  RefKey ref;
  TaskHandle task;
  Endpoint endpoint;
  std::string created_by_run;
};

// What schedule_event decided. `displaced_delivery_id` names the pending
// event this one replaced (coalescing) or cancelled (cleanup), so callers —
// and reference models — can tell exactly which events will never run.
struct ScheduleResult {
  enum class Kind { scheduled, coalesced, cleanup_dispatched };
  Kind kind = Kind::scheduled;
  std::string run_id;
  std::optional<std::string> displaced_delivery_id;
};

// Per-stage deadlines, in the backend's own clock units: wall-clock
// milliseconds for process backends, ticks for the simulator.
struct StageTimeouts {
  std::uint64_t build_wall_ms = 15 * 60 * 1000ULL;
  std::uint64_t deploy_wall_ms = 5 * 60 * 1000ULL;
  std::uint64_t test_wall_ms = 10 * 60 * 1000ULL;
  std::uint64_t build_ticks = 200;
  std::uint64_t deploy_ticks = 100;
  std::uint64_t test_ticks = 150;
};

struct EngineOptions {
  std::string repository = "example/app";  // identity field in notifications
  std::string portal_base_url = "http://127.0.0.1:8081";
  std::filesystem::path templates_dir = "templates";
  std::vector<std::string> build_targets = {"frontend", "backend"};
  StageTimeouts timeouts;
  // Lenient by default: failing test CASES land in the report without
  // failing the run. Strict mode fails the test stage on any nonzero exit.
  bool strict_tests = false;
};

// The two pipelines. Events come in through schedule_event; each ref gets
// its own executor so distinct refs run concurrently while one ref's runs
// stay serialized, with single-slot coalescing of pending pushes.
class Engine {
 public:
  Engine(Backend& backend, WorkspaceStore& workspaces, SourceProvider& sources,
         notify::Notifier& notifier, EngineOptions options);
  ~Engine();  // aborts active runs, drops queued work, joins executors

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // Routes a normalized event: main events create (or coalesce into) a
  // pending run; cleanup events cancel pending work, abort the active run,
  // and queue the teardown.
  ScheduleResult schedule_event(const PipelineEvent& event);

  // Manual teardown (the stop-env path). Blocks until done; returns the
  // number of tasks actually stopped.
  int stop_environment(const RefKey& ref);

  // Blocks until no executor is busy and no work is queued. Returns false on
  // timeout; 0 means wait forever.
  bool wait_idle(std::uint64_t timeout_ms = 0);

  // Snapshot accessors for the portal and tests.
  std::vector<PipelineRun> runs() const;  // oldest first
  std::optional<PipelineRun> find_run(const std::string& run_id) const;
  std::vector<EnvironmentRecord> environments() const;

  const EngineOptions& options() const { return options_; }

 private:
  struct QueueItem {
    PipelineEvent event;
    std::string run_id;
  };
  struct Lane {
    std::deque<QueueItem> queue;
    bool busy = false;
    bool abort_requested = false;
    std::jthread worker;
  };
  struct RunContext;  // per-run working state, engine.cpp only

  Lane& lane_for(const std::string& safe_id);  // caller holds mutex_
  void lane_loop(std::stop_token st, Lane* lane);
  void execute_main(Lane& lane, const QueueItem& item);
  int execute_cleanup(const RefKey& ref);

  bool stage_checkout(RunContext& ctx);
  bool stage_prepare(RunContext& ctx);
  bool stage_register(RunContext& ctx);
  bool stage_build(RunContext& ctx);
  bool stage_deploy(RunContext& ctx);
  bool stage_test(RunContext& ctx);
  bool stage_report(RunContext& ctx);
  void stage_cleanup(RunContext& ctx);

  enum class WaitVerdict { done, timed_out, aborted };
  WaitVerdict wait_tasks_stopped(RunContext& ctx, const std::vector<std::string>& task_ids,
                                 std::uint64_t limit);
  void stop_run_tasks(RunContext& ctx, bool include_deploy);
  void mark_stage(const std::string& run_id, const std::string& stage, StageStatus status,
                  std::uint64_t at, const std::string& detail = "");
  void update_run(const std::string& run_id, const std::function<void(PipelineRun&)>& fn);
  bool abort_requested(const Lane& lane) const;
  std::uint64_t stage_limit(const std::string& stage) const;

  Backend& backend_;
  WorkspaceStore& workspaces_;
  SourceProvider& sources_;
  notify::Notifier& notifier_;
  EngineOptions options_;

  mutable std::mutex mutex_;
  std::condition_variable_any cv_;
  std::map<std::string, std::unique_ptr<Lane>> lanes_;  // by safe_id
  std::map<std::string, PipelineRun> runs_by_id_;
  std::vector<std::string> run_order_;
  std::map<std::string, EnvironmentRecord> environments_;  // by safe_id
  std::map<std::string, std::uint64_t> run_counters_;      // by safe_id
  bool shutting_down_ = false;
};

}  // namespace grove
