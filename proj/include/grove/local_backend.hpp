#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <mutex>
#include <thread>

#include "grove/backend.hpp"

namespace grove {

// What an image reference means on this machine. Args and the working dir
// expand {{VAR}} markers against the task's effective environment, so one
// entry can serve every ref ("python3 {{WORKSPACE}}/src/tests/{{TEST_CASE}}").
struct LocalImage {
  std::string executable;  // resolved through PATH
  std::vector<std::string> args;
  std::string working_dir;  // empty: the task's workspace mount
};

// Runs tasks as local child processes. Deploy-cluster tasks get a free
// loopback port through the PORT env var; their endpoint becomes visible
// once something accepts TCP connections on it. stdout/stderr land in one
// log file per task under `log_dir`.
class LocalBackend final : public Backend {
 public:
  LocalBackend(std::map<std::string, LocalImage> images, std::filesystem::path log_dir,
               std::uint64_t beat_ms = 2000, int max_concurrent_tasks = 0);
  ~LocalBackend() override;  // stops everything, reaps every child

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
  ClockDomain clock_domain() const override { return ClockDomain::wall_ms; }
  std::uint64_t now() const override;
  void wait_beat() override;

  // True once every child has been waited on — the no-zombies check.
  bool all_reaped() const;

 private:
  struct Proc {
    TaskHandle handle;
    long pid = -1;
    std::filesystem::path log_file;
    int port = 0;          // deploy tasks only
    bool reaped = false;   // waitpid collected the exit status
    bool term_sent = false;
    std::uint64_t kill_after = 0;  // escalate SIGTERM -> SIGKILL past this
  };

  void reaper_loop(std::stop_token st);
  void scan_locked();  // reap exits, probe endpoints, escalate kills
  int running_count_locked() const;

  std::map<std::string, LocalImage> images_;
  std::filesystem::path log_dir_;
  std::uint64_t beat_ms_;
  int max_concurrent_;
  std::chrono::steady_clock::time_point epoch_;

  mutable std::mutex mutex_;
  std::condition_variable beat_cv_;
  std::map<std::string, TaskDefinition> definitions_;
  std::map<std::string, Proc> procs_;
  std::uint64_t next_task_num_ = 0;
  bool shutting_down_ = false;
  std::jthread reaper_;
};

}  // namespace grove
