#include "grove/sim_backend.hpp"

#include <algorithm>

#include "grove/errors.hpp"
#include "grove/log.hpp"
#include "grove/util.hpp"

namespace grove {

namespace fs = std::filesystem;

SimBackend::SimBackend(Mode mode, std::uint64_t tick_interval_ms, int max_concurrent_tasks)
    : mode_(mode), max_concurrent_(max_concurrent_tasks) {
  if (mode_ == Mode::auto_tick) {
    ticker_ = std::jthread([this, tick_interval_ms](std::stop_token st) {
      while (!st.stop_requested()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(tick_interval_ms));
        advance(1);
      }
    });
  }
}

SimBackend::~SimBackend() {
  {
    std::lock_guard lock(mutex_);
    shutting_down_ = true;
  }
  tick_cv_.notify_all();
  if (ticker_.joinable()) {
    ticker_.request_stop();
    ticker_.join();
  }
}

void SimBackend::program(const SimProgram& p) {
  std::lock_guard lock(mutex_);
  programs_[p.image_ref] = p;
}

void SimBackend::advance(std::uint64_t ticks) {
  for (std::uint64_t i = 0; i < ticks; ++i) {
    {
      std::lock_guard lock(mutex_);
      step_locked();
    }
    tick_cv_.notify_all();
  }
}

void SimBackend::step_locked() {
  ++tick_;
  // Task ids are ordered by launch sequence, so iteration order is stable.
  for (auto& [id, t] : tasks_) {
    if (t.finished) continue;
    if (t.handle.status == TaskStatus::pending && t.launch_tick < tick_) {
      transition_running_locked(t);
    }
    if (t.handle.status == TaskStatus::running && !t.program.serves_endpoint) {
      const std::uint64_t stop_tick = t.launch_tick + std::max<std::uint64_t>(t.program.duration_ticks, 1);
      if (tick_ >= stop_tick) {
        int code = t.program.exit_code;
        if (!t.program.fail_when.empty()) {
          bool all = true;
          for (const auto& [k, v] : t.program.fail_when) {
            auto it = t.env.find(k);
            if (it == t.env.end() || it->second != v) {
              all = false;
              break;
            }
          }
          if (all) code = t.program.fail_exit_code;
        }
        transition_stopped_locked(t, code, /*forced=*/false);
      }
    }
  }
}

void SimBackend::transition_running_locked(Task& t) {
  t.handle.status = TaskStatus::running;
  if (t.program.serves_endpoint) {
    if (t.handle.cluster == Cluster::deploy) {
      t.handle.endpoint = Endpoint{"sim-host", next_port_++};
    }
    apply_writes_locked(t);
    t.log += util::expand_markers(t.program.log_text, t.env);
  }
  const int running = running_count_locked(t.handle.cluster);
  peak_[t.handle.cluster] = std::max(peak_[t.handle.cluster], running);
  record_locked("running", &t, t.handle.definition);
}

void SimBackend::transition_stopped_locked(Task& t, int exit_code, bool forced) {
  if (!forced) {
    apply_writes_locked(t);
    t.log += util::expand_markers(t.program.log_text, t.env);
  }
  t.handle.status = TaskStatus::stopped;
  t.handle.exit_code = exit_code;
  t.handle.stopped_at = tick_;
  t.finished = true;
  record_locked("stopped", &t, t.handle.definition);
}

void SimBackend::apply_writes_locked(Task& t) {
  if (t.program.writes.empty()) return;
  const auto def = definitions_.find(t.handle.definition);
  if (def == definitions_.end() || def->second.volume_mounts.empty()) {
    t.log += "\n[sim] writes skipped: no volume mount";
    return;
  }
  const fs::path mount = def->second.volume_mounts.front().mount_path;
  for (const auto& [rel, content] : t.program.writes) {
    const std::string expanded_rel = util::expand_markers(rel, t.env);
    const fs::path target = (mount / expanded_rel).lexically_normal();
    if (!util::path_within(target, mount)) {
      t.log += "\n[sim] write refused (escapes mount): " + expanded_rel;
      continue;
    }
    // A symlinked parent must still resolve inside the mount.
    const fs::path parent = target.parent_path();
    std::error_code ec;
    const fs::path resolved = fs::weakly_canonical(parent, ec);
    if (!ec && !util::path_within(resolved / target.filename(), fs::weakly_canonical(mount, ec))) {
      t.log += "\n[sim] write refused (escapes mount): " + expanded_rel;
      continue;
    }
    try {
      util::write_file(target, util::expand_markers(content, t.env));
      writes_.emplace_back(t.handle.task_id, target.string());
    } catch (const std::exception& e) {
      t.log += std::string("\n[sim] write failed: ") + e.what();
    }
  }
}

void SimBackend::record_locked(const std::string& kind, const Task* t, const std::string& definition) {
  BackendEvent ev;
  ev.seq = ++seq_;
  ev.at = tick_;
  ev.kind = kind;
  ev.definition = definition;
  if (t != nullptr) {
    ev.task_id = t->handle.task_id;
    ev.cluster = t->handle.cluster;
    ev.tags = t->handle.tags;
  }
  events_.push_back(std::move(ev));
}

int SimBackend::running_count_locked(Cluster cluster) const {
  int n = 0;
  for (const auto& [id, t] : tasks_) {
    if (t.handle.cluster == cluster && t.handle.status == TaskStatus::running) ++n;
  }
  return n;
}

std::string SimBackend::register_task_definition(const TaskDefinition& def) {
  if (def.name.empty()) throw RejectedError("task definition name must not be empty");
  std::lock_guard lock(mutex_);
  definitions_[def.name] = def;
  record_locked("register", nullptr, def.name);
  return def.name;
}

void SimBackend::deregister_task_definition(const std::string& name) {
  std::lock_guard lock(mutex_);
  definitions_.erase(name);
  record_locked("deregister", nullptr, name);
}

std::optional<TaskDefinition> SimBackend::find_task_definition(const std::string& name) const {
  std::lock_guard lock(mutex_);
  auto it = definitions_.find(name);
  if (it == definitions_.end()) return std::nullopt;
  return it->second;
}

TaskHandle SimBackend::launch_task(const std::string& definition_name, Cluster cluster,
                                   const std::map<std::string, std::string>& tags,
                                   const std::map<std::string, std::string>& env_overrides) {
  std::lock_guard lock(mutex_);
  auto def = definitions_.find(definition_name);
  if (def == definitions_.end()) {
    throw RejectedError("launch rejected: unknown task definition '" + definition_name + "'");
  }
  if (max_concurrent_ > 0) {
    int active = 0;
    for (const auto& [id, t] : tasks_) {
      if (t.handle.status != TaskStatus::stopped) ++active;
    }
    if (active >= max_concurrent_) {
      throw CapacityError("simulator capacity exceeded (" + std::to_string(max_concurrent_) + " tasks)");
    }
  }

  Task t;
  t.handle.task_id = "sim-" + util::to_hex(next_task_num_++, 6);
  t.handle.cluster = cluster;
  t.handle.definition = definition_name;
  t.handle.status = TaskStatus::pending;
  t.handle.tags = tags;
  t.handle.started_at = tick_;
  t.launch_tick = tick_;
  auto prog = programs_.find(def->second.image_ref);
  t.program = prog != programs_.end() ? prog->second : SimProgram{def->second.image_ref};
  t.env = def->second.env_vars;
  for (const auto& [k, v] : env_overrides) t.env[k] = v;
  t.env["TASK_ID"] = t.handle.task_id;
  t.env["CLUSTER"] = to_string(cluster);

  record_locked("launch", &t, definition_name);
  auto [it, inserted] = tasks_.emplace(t.handle.task_id, std::move(t));
  return it->second.handle;
}

TaskHandle SimBackend::poll_task(const std::string& task_id) const {
  std::lock_guard lock(mutex_);
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) throw NotFoundError("unknown task id '" + task_id + "'");
  return it->second.handle;
}

void SimBackend::stop_task(const std::string& task_id) {
  std::lock_guard lock(mutex_);
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) throw NotFoundError("unknown task id '" + task_id + "'");
  Task& t = it->second;
  record_locked("stop-request", &t, t.handle.definition);
  if (t.handle.status == TaskStatus::stopped) return;  // idempotent
  if (t.handle.status == TaskStatus::pending) transition_running_locked(t);
  transition_stopped_locked(t, 137, /*forced=*/true);
}

std::vector<TaskHandle> SimBackend::list_tasks(std::optional<Cluster> cluster,
                                               const std::map<std::string, std::string>& tag_filter) const {
  std::lock_guard lock(mutex_);
  std::vector<TaskHandle> out;
  for (const auto& [id, t] : tasks_) {
    if (cluster && t.handle.cluster != *cluster) continue;
    bool match = true;
    for (const auto& [k, v] : tag_filter) {
      auto tag = t.handle.tags.find(k);
      if (tag == t.handle.tags.end() || tag->second != v) {
        match = false;
        break;
      }
    }
    if (match) out.push_back(t.handle);
  }
  return out;
}

std::string SimBackend::fetch_logs(const std::string& task_id) const {
  std::lock_guard lock(mutex_);
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) throw NotFoundError("unknown task id '" + task_id + "'");
  return it->second.log;
}

std::uint64_t SimBackend::now() const {
  std::lock_guard lock(mutex_);
  return tick_;
}

void SimBackend::wait_beat() {
  std::unique_lock lock(mutex_);
  const std::uint64_t seen = tick_;
  tick_cv_.wait_for(lock, std::chrono::milliseconds(50),
                    [&] { return tick_ != seen || shutting_down_; });
}

std::vector<BackendEvent> SimBackend::event_log() const {
  std::lock_guard lock(mutex_);
  return events_;
}

int SimBackend::peak_concurrency(Cluster cluster) const {
  std::lock_guard lock(mutex_);
  auto it = peak_.find(cluster);
  return it == peak_.end() ? 0 : it->second;
}

std::vector<std::pair<std::string, std::string>> SimBackend::write_log() const {
  std::lock_guard lock(mutex_);
  return writes_;
}

}  // namespace grove
