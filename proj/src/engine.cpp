#include "grove/engine.hpp"

#include <algorithm>

#include "grove/errors.hpp"
#include "grove/log.hpp"
#include "grove/templates.hpp"
#include "grove/util.hpp"

namespace grove {

namespace fs = std::filesystem;

const std::vector<std::string> kStageOrder = {
    "checkout", "prepare", "register-taskdefs", "build",
    "deploy",   "test",    "report",            "cleanup",
};

const char* to_string(StageStatus status) {
  switch (status) {
    case StageStatus::pending: return "pending";
    case StageStatus::running: return "running";
    case StageStatus::success: return "success";
    case StageStatus::failed: return "failed";
    case StageStatus::skipped: return "skipped";
  }
  return "?";
}

const char* to_string(RunOutcome outcome) {
  switch (outcome) {
    case RunOutcome::in_progress: return "in-progress";
    case RunOutcome::success: return "success";
    case RunOutcome::failed: return "failed";
    case RunOutcome::aborted: return "aborted";
  }
  return "?";
}

namespace {

const std::vector<std::string> kRoles = {"build", "deploy", "test"};

std::string tail_of(const std::string& text, std::size_t n = 300) {
  if (text.size() <= n) return text;
  return "..." + text.substr(text.size() - n);
}

}  // namespace

// Working state for one main-pipeline execution, owned by the lane thread.
struct Engine::RunContext {
  Lane& lane;
  std::string run_id;
  RefKey ref;
  PipelineEvent trigger;
  Workspace ws;
  std::map<std::string, TaskDefinition> defs;   // role -> rendered definition
  std::vector<std::string> launched_task_ids;   // everything this run started
  std::string deploy_task_id;
  std::vector<fs::path> result_files;
  std::vector<reporting::TestCaseResult> synthesized;
  std::string failed_stage;
  std::string failure_detail;
  bool aborted = false;
  bool deploy_succeeded = false;

  // Env every task gets; roles add their own keys on top. The simulator
  // expands {{VAR}} markers against this map, which is how scripted
  // scenarios key failures off a commit id.
  std::map<std::string, std::string> base_env() const {
    return {
        {"WORKSPACE", ws.root_path.string()},
        {"REF_NAME", ref.name},
        {"SAFE_ID", ref.safe_id},
        {"RUN_ID", run_id},
        {"COMMIT", trigger.commit_id.value_or("")},
    };
  }
};

Engine::Engine(Backend& backend, WorkspaceStore& workspaces, SourceProvider& sources,
               notify::Notifier& notifier, EngineOptions options)
    : backend_(backend),
      workspaces_(workspaces),
      sources_(sources),
      notifier_(notifier),
      options_(std::move(options)) {}

Engine::~Engine() {
  {
    std::lock_guard lock(mutex_);
    shutting_down_ = true;
    for (auto& [safe_id, lane] : lanes_) {
      lane->abort_requested = true;  // active runs bail out at the next beat
      lane->worker.request_stop();
    }
  }
  cv_.notify_all();
  for (auto& [safe_id, lane] : lanes_) {
    if (lane->worker.joinable()) lane->worker.join();
  }
}

Engine::Lane& Engine::lane_for(const std::string& safe_id) {
  auto it = lanes_.find(safe_id);
  if (it != lanes_.end()) return *it->second;
  auto lane = std::make_unique<Lane>();
  Lane* raw = lane.get();
  lane->worker = std::jthread([this, raw](std::stop_token st) { lane_loop(st, raw); });
  return *lanes_.emplace(safe_id, std::move(lane)).first->second;
}

ScheduleResult Engine::schedule_event(const PipelineEvent& event) {
  std::lock_guard lock(mutex_);
  if (shutting_down_) throw RejectedError("engine is shutting down");

  Lane& lane = lane_for(event.ref.safe_id);
  ScheduleResult result;

  if (is_cleanup_event(event.kind)) {
    // Cancel any pending main run: the ref is going away.
    for (auto it = lane.queue.begin(); it != lane.queue.end();) {
      if (!is_cleanup_event(it->event.kind)) {
        result.displaced_delivery_id = it->event.delivery_id;
        it = lane.queue.erase(it);
      } else {
        ++it;
      }
    }
    if (lane.busy) lane.abort_requested = true;
    QueueItem item{event, util::fresh_id("cl")};
    if (!lane.queue.empty() && is_cleanup_event(lane.queue.back().event.kind)) {
      lane.queue.back() = item;  // two teardowns collapse to one
    } else {
      lane.queue.push_back(item);
    }
    result.kind = ScheduleResult::Kind::cleanup_dispatched;
    result.run_id = item.run_id;
  } else {
    QueueItem item{event, util::fresh_id("run")};
    if (!lane.queue.empty() && !is_cleanup_event(lane.queue.back().event.kind)) {
      // Single pending slot per ref: the newest push wins.
      result.displaced_delivery_id = lane.queue.back().event.delivery_id;
      lane.queue.back() = item;
      result.kind = ScheduleResult::Kind::coalesced;
    } else {
      lane.queue.push_back(item);
      result.kind = ScheduleResult::Kind::scheduled;
    }
    result.run_id = item.run_id;
  }
  cv_.notify_all();
  return result;
}

void Engine::lane_loop(std::stop_token st, Lane* lane) {
  std::unique_lock lock(mutex_);
  while (true) {
    cv_.wait(lock, st, [&] { return !lane->queue.empty() || shutting_down_; });
    if (shutting_down_ || (st.stop_requested() && lane->queue.empty())) return;
    if (lane->queue.empty()) continue;

    QueueItem item = lane->queue.front();
    lane->queue.pop_front();
    lane->busy = true;
    if (!is_cleanup_event(item.event.kind)) lane->abort_requested = false;
    lock.unlock();

    try {
      if (is_cleanup_event(item.event.kind)) {
        int n = execute_cleanup(item.event.ref);
        log::info("cleanup for ", item.event.ref.safe_id, ": ", n, " task(s) stopped");
      } else {
        execute_main(*lane, item);
      }
    } catch (const std::exception& e) {
      log::error("executor for ", item.event.ref.safe_id, " crashed: ", e.what());
    }

    lock.lock();
    lane->busy = false;
    cv_.notify_all();
  }
}

bool Engine::abort_requested(const Lane& lane) const {
  std::lock_guard lock(mutex_);
  return lane.abort_requested;
}

std::uint64_t Engine::stage_limit(const std::string& stage) const {
  const bool ticks = backend_.clock_domain() == Backend::ClockDomain::ticks;
  const StageTimeouts& t = options_.timeouts;
  if (stage == "build") return ticks ? t.build_ticks : t.build_wall_ms;
  if (stage == "deploy") return ticks ? t.deploy_ticks : t.deploy_wall_ms;
  if (stage == "test") return ticks ? t.test_ticks : t.test_wall_ms;
  return ticks ? t.build_ticks : t.build_wall_ms;
}

void Engine::update_run(const std::string& run_id, const std::function<void(PipelineRun&)>& fn) {
  std::lock_guard lock(mutex_);
  auto it = runs_by_id_.find(run_id);
  if (it != runs_by_id_.end()) fn(it->second);
}

void Engine::mark_stage(const std::string& run_id, const std::string& stage, StageStatus status,
                        std::uint64_t at, const std::string& detail) {
  update_run(run_id, [&](PipelineRun& run) {
    for (auto& entry : run.stage_log) {
      if (entry.name != stage) continue;
      entry.status = status;
      if (status == StageStatus::running) {
        entry.started_at = at;
      } else {
        if (entry.started_at == 0) entry.started_at = at;
        entry.ended_at = at;
      }
      if (!detail.empty()) entry.detail = detail;
      return;
    }
  });
}

void Engine::execute_main(Lane& lane, const QueueItem& item) {
  RunContext ctx{lane};
  ctx.run_id = item.run_id;
  ctx.ref = item.event.ref;
  ctx.trigger = item.event;

  {
    std::lock_guard lock(mutex_);
    PipelineRun run;
    run.run_id = ctx.run_id;
    run.run_number = ++run_counters_[ctx.ref.safe_id];
    run.ref = ctx.ref;
    run.trigger = item.event;
    run.created_at = std::chrono::system_clock::now();
    for (const auto& name : kStageOrder) run.stage_log.push_back({name});
    runs_by_id_.emplace(run.run_id, run);
    run_order_.push_back(run.run_id);
  }

  using StageFn = bool (Engine::*)(RunContext&);
  const std::vector<std::pair<std::string, StageFn>> stages = {
      {"checkout", &Engine::stage_checkout}, {"prepare", &Engine::stage_prepare},
      {"register-taskdefs", &Engine::stage_register}, {"build", &Engine::stage_build},
      {"deploy", &Engine::stage_deploy}, {"test", &Engine::stage_test},
      {"report", &Engine::stage_report},
  };

  bool on_track = true;
  for (const auto& [name, fn] : stages) {
    if (!on_track) {
      mark_stage(ctx.run_id, name, StageStatus::skipped, backend_.now());
      continue;
    }
    if (abort_requested(lane)) {
      ctx.aborted = true;
      on_track = false;
      mark_stage(ctx.run_id, name, StageStatus::skipped, backend_.now(), "run aborted");
      continue;
    }
    mark_stage(ctx.run_id, name, StageStatus::running, backend_.now());
    bool ok = false;
    try {
      ok = (this->*fn)(ctx);
    } catch (const std::exception& e) {
      ctx.failure_detail = e.what();
    }
    if (ok) {
      mark_stage(ctx.run_id, name, StageStatus::success, backend_.now());
      continue;
    }
    on_track = false;
    if (ctx.aborted) {
      mark_stage(ctx.run_id, name, StageStatus::failed, backend_.now(),
                 "run aborted by a teardown event");
    } else {
      if (ctx.failure_detail.empty()) ctx.failure_detail = "stage failed";
      ctx.failed_stage = name;
      mark_stage(ctx.run_id, name, StageStatus::failed, backend_.now(), ctx.failure_detail);
      log::warn("run ", ctx.run_id, " (", ctx.ref.safe_id, "): stage ", name,
                " failed: ", ctx.failure_detail);
    }
    // Error path: anything this run started must go, including a deploy task
    // that already became the environment. A pre-existing environment from an
    // earlier run carries a different run tag and is left alone.
    stop_run_tasks(ctx, /*include_deploy=*/true);
  }

  mark_stage(ctx.run_id, "cleanup", StageStatus::running, backend_.now());
  stage_cleanup(ctx);
  mark_stage(ctx.run_id, "cleanup", StageStatus::success, backend_.now());

  RunOutcome outcome = ctx.aborted ? RunOutcome::aborted
                       : ctx.failed_stage.empty() ? RunOutcome::success
                                                  : RunOutcome::failed;
  std::uint64_t run_number = 0;
  update_run(ctx.run_id, [&](PipelineRun& run) {
    run.outcome = outcome;
    run_number = run.run_number;
  });
  log::info("run ", ctx.run_id, " (", ctx.ref.safe_id, ") finished: ", to_string(outcome));

  if (outcome == RunOutcome::failed) {
    // Exactly one alert per failed run; aborted runs are intentional teardown.
    try {
      notifier_.notify_failure(options_.repository, ctx.ref.name, run_number,
                               options_.portal_base_url + "/runs/" + ctx.run_id,
                               "stage '" + ctx.failed_stage + "' failed: " +
                                   tail_of(ctx.failure_detail, 200));
    } catch (const std::exception& e) {
      log::warn("failure notification could not be built: ", e.what());
    }
  }
}

bool Engine::stage_checkout(RunContext& ctx) {
  ctx.ws = workspaces_.create(ctx.ref);
  sources_.materialize(ctx.ref, ctx.trigger.commit_id, ctx.ws.src_dir());
  return true;
}

bool Engine::stage_prepare(RunContext& ctx) {
  for (const auto& role : kRoles) {
    fs::path file = options_.templates_dir / (role + ".json");
    std::string text = util::read_file(file);
    ctx.defs[role] =
        render_task_definition(text, ctx.ref.safe_id + "-" + role, ctx.ws.root_path);
  }
  return true;
}

bool Engine::stage_register(RunContext& ctx) {
  for (const auto& role : kRoles) {
    backend_.register_task_definition(ctx.defs.at(role));
  }
  return true;
}

bool Engine::stage_build(RunContext& ctx) {
  std::vector<std::string> ids;
  for (const auto& target : options_.build_targets) {
    auto env = ctx.base_env();
    env["BUILD_TARGET"] = target;
    TaskHandle h = backend_.launch_task(
        ctx.ref.safe_id + "-build", Cluster::build,
        {{"ref", ctx.ref.safe_id}, {"run", ctx.run_id}, {"role", "build-" + target}}, env);
    ids.push_back(h.task_id);
    ctx.launched_task_ids.push_back(h.task_id);
  }

  switch (wait_tasks_stopped(ctx, ids, stage_limit("build"))) {
    case WaitVerdict::aborted: return false;
    case WaitVerdict::timed_out:
      ctx.failure_detail = "build timed out";
      return false;
    case WaitVerdict::done: break;
  }

  for (std::size_t i = 0; i < ids.size(); ++i) {
    TaskHandle h = backend_.poll_task(ids[i]);
    if (h.exit_code.value_or(-1) != 0) {
      ctx.failure_detail = "build target '" + options_.build_targets[i] + "' exited " +
                           std::to_string(h.exit_code.value_or(-1)) + ": " +
                           tail_of(backend_.fetch_logs(ids[i]));
      return false;
    }
  }

  // Whatever the tasks left under out/ is the artifact set.
  std::vector<std::string> artifacts;
  if (fs::is_directory(ctx.ws.out_dir())) {
    for (const auto& entry : fs::recursive_directory_iterator(ctx.ws.out_dir())) {
      if (entry.is_regular_file()) {
        artifacts.push_back(fs::relative(entry.path(), ctx.ws.root_path).generic_string());
      }
    }
  }
  std::sort(artifacts.begin(), artifacts.end());
  update_run(ctx.run_id, [&](PipelineRun& run) { run.artifact_paths = artifacts; });
  return true;
}

bool Engine::stage_deploy(RunContext& ctx) {
  // Replacement order is fixed: the previous environment is stopped before
  // the new task is launched. No fallback if the new one never comes up.
  auto old_tasks = backend_.list_tasks(Cluster::deploy, {{"ref", ctx.ref.safe_id}});
  std::vector<std::string> stopping;
  for (const auto& h : old_tasks) {
    if (h.status != TaskStatus::stopped) {
      backend_.stop_task(h.task_id);
      stopping.push_back(h.task_id);
    }
  }
  {
    std::lock_guard lock(mutex_);
    environments_.erase(ctx.ref.safe_id);
  }
  if (!stopping.empty() &&
      wait_tasks_stopped(ctx, stopping, stage_limit("deploy")) != WaitVerdict::done) {
    if (ctx.aborted) return false;
    ctx.failure_detail = "previous environment did not stop in time";
    return false;
  }

  auto env = ctx.base_env();
  TaskHandle h = backend_.launch_task(
      ctx.ref.safe_id + "-deploy", Cluster::deploy,
      {{"ref", ctx.ref.safe_id}, {"run", ctx.run_id}, {"role", "deploy"}}, env);
  ctx.launched_task_ids.push_back(h.task_id);
  ctx.deploy_task_id = h.task_id;

  const std::uint64_t deadline = backend_.now() + stage_limit("deploy");
  while (true) {
    if (abort_requested(ctx.lane)) {
      ctx.aborted = true;
      return false;
    }
    h = backend_.poll_task(ctx.deploy_task_id);
    if (h.status == TaskStatus::running && h.endpoint) break;
    if (h.status == TaskStatus::stopped) {
      ctx.failure_detail = "deploy task stopped before serving (exit " +
                           std::to_string(h.exit_code.value_or(-1)) + "): " +
                           tail_of(backend_.fetch_logs(ctx.deploy_task_id));
      return false;
    }
    if (backend_.now() >= deadline) {
      ctx.failure_detail = "deploy task did not become ready in time";
      return false;
    }
    backend_.wait_beat();
  }

  {
    std::lock_guard lock(mutex_);
    environments_[ctx.ref.safe_id] =
        EnvironmentRecord{ctx.ref, h, *h.endpoint, ctx.run_id};
  }
  update_run(ctx.run_id, [&](PipelineRun& run) { run.environment = h; });
  ctx.deploy_succeeded = true;
  return true;
}

bool Engine::stage_test(RunContext& ctx) {
  // One case per file. Sources normally land in src/, so src/tests is the
  // usual spot; a bare tests/ at the workspace root works too.
  fs::path tests_dir = ctx.ws.src_dir() / "tests";
  if (!fs::is_directory(tests_dir)) tests_dir = ctx.ws.root_path / "tests";

  std::vector<fs::path> cases;
  if (fs::is_directory(tests_dir)) {
    for (const auto& entry : fs::directory_iterator(tests_dir)) {
      std::string name = entry.path().filename().string();
      if (entry.is_regular_file() && !name.starts_with('.') && !name.starts_with('_')) {
        cases.push_back(entry.path());
      }
    }
  }
  std::sort(cases.begin(), cases.end());
  if (cases.empty()) return true;  // nothing to run; report shows zero totals

  TaskHandle env_task = backend_.poll_task(ctx.deploy_task_id);
  Endpoint endpoint = env_task.endpoint.value_or(Endpoint{});

  std::vector<std::string> ids;
  std::vector<std::string> stems;
  for (const auto& file : cases) {
    auto env = ctx.base_env();
    env["TEST_CASE"] = file.filename().string();
    env["TEST_CASE_STEM"] = file.stem().string();
    env["ENDPOINT_HOST"] = endpoint.host;
    env["ENDPOINT_PORT"] = std::to_string(endpoint.port);
    env["RESULTS_DIR"] = ctx.ws.results_dir().string();
    TaskHandle h = backend_.launch_task(
        ctx.ref.safe_id + "-test", Cluster::test,
        {{"ref", ctx.ref.safe_id}, {"run", ctx.run_id}, {"role", "test-" + file.stem().string()}},
        env);
    ids.push_back(h.task_id);
    stems.push_back(file.stem().string());
    ctx.launched_task_ids.push_back(h.task_id);
  }

  switch (wait_tasks_stopped(ctx, ids, stage_limit("test"))) {
    case WaitVerdict::aborted: return false;
    case WaitVerdict::timed_out:
      ctx.failure_detail = "test stage timed out";
      return false;
    case WaitVerdict::done: break;
  }

  for (std::size_t i = 0; i < ids.size(); ++i) {
    TaskHandle h = backend_.poll_task(ids[i]);
    fs::path expected = ctx.ws.results_dir() / (stems[i] + ".xml");
    if (!fs::exists(expected)) {
      reporting::TestCaseResult synth;
      synth.case_name = stems[i];
      synth.status = reporting::CaseStatus::errored;
      synth.message = "test task exited " + std::to_string(h.exit_code.value_or(-1)) +
                      " without writing a result file";
      ctx.synthesized.push_back(synth);
    }
    if (options_.strict_tests && h.exit_code.value_or(-1) != 0) {
      ctx.failure_detail = "test case '" + stems[i] + "' exited " +
                           std::to_string(h.exit_code.value_or(-1)) + " (strict mode): " +
                           tail_of(backend_.fetch_logs(ids[i]));
      return false;
    }
  }

  if (fs::is_directory(ctx.ws.results_dir())) {
    for (const auto& entry : fs::directory_iterator(ctx.ws.results_dir())) {
      if (entry.is_regular_file() && entry.path().extension() == ".xml") {
        ctx.result_files.push_back(entry.path());
      }
    }
  }
  return true;
}

bool Engine::stage_report(RunContext& ctx) {
  reporting::TestReport report =
      reporting::aggregate(ctx.run_id, ctx.result_files, ctx.synthesized);
  update_run(ctx.run_id, [&](PipelineRun& run) { run.report = report; });
  return true;
}

void Engine::stage_cleanup(RunContext& ctx) {
  // Finally-semantics: every sub-step is best-effort, and nothing here can
  // change the run's outcome.
  const bool keep_environment =
      ctx.deploy_succeeded && ctx.failed_stage.empty() && !ctx.aborted;
  try {
    for (const auto& id : ctx.launched_task_ids) {
      if (keep_environment && id == ctx.deploy_task_id) continue;
      TaskHandle h = backend_.poll_task(id);
      if (h.status != TaskStatus::stopped) backend_.stop_task(id);
    }
  } catch (const std::exception& e) {
    log::warn("cleanup: stopping leftover tasks: ", e.what());
  }
  try {
    if (!ctx.ws.root_path.empty()) workspaces_.clear(ctx.ref);
  } catch (const std::exception& e) {
    log::warn("cleanup: clearing workspace: ", e.what());
  }
  for (const auto& role : kRoles) {
    try {
      backend_.deregister_task_definition(ctx.ref.safe_id + "-" + role);
    } catch (const std::exception&) {
      // never registered — fine
    }
  }
}

Engine::WaitVerdict Engine::wait_tasks_stopped(RunContext& ctx,
                                               const std::vector<std::string>& task_ids,
                                               std::uint64_t limit) {
  const std::uint64_t deadline = backend_.now() + limit;
  while (true) {
    if (abort_requested(ctx.lane)) {
      ctx.aborted = true;
      return WaitVerdict::aborted;
    }
    bool all_stopped = true;
    for (const auto& id : task_ids) {
      if (backend_.poll_task(id).status != TaskStatus::stopped) {
        all_stopped = false;
        break;
      }
    }
    if (all_stopped) return WaitVerdict::done;
    if (backend_.now() >= deadline) return WaitVerdict::timed_out;
    backend_.wait_beat();
  }
}

void Engine::stop_run_tasks(RunContext& ctx, bool include_deploy) {
  for (const auto& id : ctx.launched_task_ids) {
    if (!include_deploy && id == ctx.deploy_task_id) continue;
    try {
      if (backend_.poll_task(id).status != TaskStatus::stopped) backend_.stop_task(id);
    } catch (const std::exception& e) {
      log::warn("stopping task ", id, ": ", e.what());
    }
  }
  if (include_deploy) {
    std::lock_guard lock(mutex_);
    auto it = environments_.find(ctx.ref.safe_id);
    if (it != environments_.end() && it->second.created_by_run == ctx.run_id) {
      environments_.erase(it);
    }
  }
}

int Engine::execute_cleanup(const RefKey& ref) {
  int stopped = 0;
  try {
    for (const auto& h : backend_.list_tasks(std::nullopt, {{"ref", ref.safe_id}})) {
      if (h.status != TaskStatus::stopped) {
        backend_.stop_task(h.task_id);
        ++stopped;
      }
    }
  } catch (const std::exception& e) {
    log::warn("cleanup for ", ref.safe_id, ": stopping tasks: ", e.what());
  }
  try {
    workspaces_.destroy(ref);
  } catch (const std::exception& e) {
    log::warn("cleanup for ", ref.safe_id, ": workspace: ", e.what());
  }
  for (const auto& role : kRoles) {
    try {
      backend_.deregister_task_definition(ref.safe_id + "-" + role);
    } catch (const std::exception&) {
    }
  }
  {
    std::lock_guard lock(mutex_);
    environments_.erase(ref.safe_id);
  }
  return stopped;
}

int Engine::stop_environment(const RefKey& ref) {
  {
    std::unique_lock lock(mutex_);
    auto it = lanes_.find(ref.safe_id);
    if (it != lanes_.end()) {
      Lane& lane = *it->second;
      // Same discipline as a delete event: drop pending work, abort the
      // active run, wait until the lane drains, then tear down.
      for (auto qit = lane.queue.begin(); qit != lane.queue.end();) {
        if (!is_cleanup_event(qit->event.kind)) {
          qit = lane.queue.erase(qit);
        } else {
          ++qit;
        }
      }
      if (lane.busy) lane.abort_requested = true;
      cv_.wait(lock, [&] { return !lane.busy && lane.queue.empty(); });
    }
  }
  return execute_cleanup(ref);
}

bool Engine::wait_idle(std::uint64_t timeout_ms) {
  std::unique_lock lock(mutex_);
  auto idle = [&] {
    for (const auto& [safe_id, lane] : lanes_) {
      if (lane->busy || !lane->queue.empty()) return false;
    }
    return true;
  };
  if (timeout_ms == 0) {
    cv_.wait(lock, idle);
    return true;
  }
  return cv_.wait_for(lock, std::chrono::milliseconds(timeout_ms), idle);
}

std::vector<PipelineRun> Engine::runs() const {
  std::lock_guard lock(mutex_);
  std::vector<PipelineRun> out;
  out.reserve(run_order_.size());
  for (const auto& id : run_order_) {
    auto it = runs_by_id_.find(id);
    if (it != runs_by_id_.end()) out.push_back(it->second);
  }
  return out;
}

std::optional<PipelineRun> Engine::find_run(const std::string& run_id) const {
  std::lock_guard lock(mutex_);
  auto it = runs_by_id_.find(run_id);
  if (it == runs_by_id_.end()) return std::nullopt;
  return it->second;
}

std::vector<EnvironmentRecord> Engine::environments() const {
  std::lock_guard lock(mutex_);
  std::vector<EnvironmentRecord> out;
  out.reserve(environments_.size());
  for (const auto& [safe_id, record] : environments_) out.push_back(record);
  return out;
}

}  // namespace grove
