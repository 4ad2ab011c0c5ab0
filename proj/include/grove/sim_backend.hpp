#pragma once

#include <condition_variable>
#include <filesystem>
#include <mutex>
#include <thread>

#include "grove/backend.hpp"

namespace grove {

// Scripted behavior for one image reference. Launching any task whose
// definition names the image makes the task follow the script.
struct SimProgram {
  std::string image_ref;
  std::uint64_t duration_ticks = 1;  // ignored when serves_endpoint
  int exit_code = 0;
  std::string log_text;
  std::vector<std::pair<std::string, std::string>> writes;  // (relative path, content)
  bool serves_endpoint = false;
  // When every listed env pair matches the task's effective env, the task
  // exits with fail_exit_code instead of exit_code.
  std::map<std::string, std::string> fail_when;
  int fail_exit_code = 1;
};

// Deterministic in-memory task backend driven by an integer tick clock.
// `manual` mode advances only through advance(); `auto_tick` mode runs a
// ticker thread so the simulator progresses in wall time.
//
// Write paths and log text expand {{VAR}} markers against the task's
// effective environment, and writes land under the task's first volume
// mount. A write that would escape the mount is skipped and noted in the log.
class SimBackend final : public Backend {
 public:
  enum class Mode { manual, auto_tick };

  explicit SimBackend(Mode mode = Mode::manual, std::uint64_t tick_interval_ms = 20,
                      int max_concurrent_tasks = 0);
  ~SimBackend() override;

  // Scripting surface.
  void program(const SimProgram& p);
  void advance(std::uint64_t ticks = 1);

  // Backend interface.
  std::string register_task_definition(const TaskDefinition& def) override;
  void deregister_task_definition(const std::string& name) override;
  std::optional<TaskDefinition> find_task_definition(const std::string& name) const override;
  TaskHandle launch_task(const std::string& definition_name, Cluster cluster,
                         const std::map<std::string, std::string>& tags,
                         const std::map<std::string, std::string>& env_overrides) override;
  TaskHandle poll_task(const std::string& task_id) const override;
  void stop_task(const std::string& task_id) override;
  std::vector<TaskHandle> list_tasks(std::optional<Cluster> cluster,
                                     const std::map<std::string, std::string>& tag_filter) const override;
  std::string fetch_logs(const std::string& task_id) const override;
  ClockDomain clock_domain() const override { return ClockDomain::ticks; }
  std::uint64_t now() const override;
  void wait_beat() override;

  // Introspection for tests and the portal.
  std::vector<BackendEvent> event_log() const;
  int peak_concurrency(Cluster cluster) const;
  // (task_id, absolute path) for every file a simulated task wrote.
  std::vector<std::pair<std::string, std::string>> write_log() const;

 private:
  struct Task {
    TaskHandle handle;
    std::uint64_t launch_tick = 0;
    SimProgram program;
    std::map<std::string, std::string> env;
    std::string log;
    bool finished = false;  // reached its scripted end or was force-stopped
  };

  void step_locked();
  void transition_running_locked(Task& t);
  void transition_stopped_locked(Task& t, int exit_code, bool forced);
  void apply_writes_locked(Task& t);
  void record_locked(const std::string& kind, const Task* t, const std::string& definition);
  int running_count_locked(Cluster cluster) const;

  mutable std::mutex mutex_;
  std::condition_variable tick_cv_;
  Mode mode_;
  std::uint64_t tick_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t next_task_num_ = 0;
  int next_port_ = 42000;
  int max_concurrent_;
  std::map<std::string, TaskDefinition> definitions_;
  std::map<std::string, SimProgram> programs_;
  std::map<std::string, Task> tasks_;
  std::vector<BackendEvent> events_;
  std::map<Cluster, int> peak_;
  std::vector<std::pair<std::string, std::string>> writes_;
  bool shutting_down_ = false;
  std::jthread ticker_;
};

}  // namespace grove
