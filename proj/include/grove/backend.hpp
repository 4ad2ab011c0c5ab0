#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace grove {

// The three fixed pools tasks run in, one per pipeline phase.
enum class Cluster { build, deploy, test };

const char* to_string(Cluster cluster);
std::optional<Cluster> cluster_from_string(const std::string& name);

struct PortMapping {
  int container_port = 0;
  std::string protocol = "tcp";
  bool operator==(const PortMapping&) const = default;
};

struct VolumeMount {
  std::string volume_id;
  std::string mount_path;  // host-side directory the task sees as its volume
  bool operator==(const VolumeMount&) const = default;
};

// Blueprint a task is launched from. Registered by name; re-registering a
// name replaces the stored definition.
struct TaskDefinition {
  std::string name;
  std::string image_ref;  // registry-style reference; selects behavior, never pulled
  std::vector<std::string> command;
  std::map<std::string, std::string> env_vars;
  std::vector<PortMapping> port_mappings;
  std::vector<VolumeMount> volume_mounts;
  int cpu_units = 256;
  int memory_mb = 512;

  bool operator==(const TaskDefinition&) const = default;
};

enum class TaskStatus { pending, running, stopped };

const char* to_string(TaskStatus status);

struct Endpoint {
  std::string host;
  int port = 0;
  bool operator==(const Endpoint&) const = default;
};

// Live (or finished) instance of a definition. Snapshots are values; polling
// returns a fresh copy.
struct TaskHandle {
  std::string task_id;
  Cluster cluster = Cluster::build;
  std::string definition;
  TaskStatus status = TaskStatus::pending;
  std::optional<int> exit_code;        // present iff stopped
  std::optional<Endpoint> endpoint;    // deploy-cluster tasks that reached running
  std::map<std::string, std::string> tags;
  std::uint64_t started_at = 0;  // backend clock units
  std::uint64_t stopped_at = 0;
};

// One entry of the backend's serialized operation trace. The seq order is the
// order the backend committed each transition; tests replay it against a
// sequential reference.
struct BackendEvent {
  std::uint64_t seq = 0;
  std::uint64_t at = 0;  // backend clock units
  std::string kind;      // register | deregister | launch | running | stopped | stop-request
  std::string task_id;   // empty for definition events
  std::string definition;
  Cluster cluster = Cluster::build;
  std::map<std::string, std::string> tags;
};

// Serverless-task pool: definitions, tag-indexed tasks, logs. All operations
// are safe to call from concurrent threads.
class Backend {
 public:
  enum class ClockDomain { wall_ms, ticks };

  virtual ~Backend() = default;

  virtual std::string register_task_definition(const TaskDefinition& def) = 0;
  virtual void deregister_task_definition(const std::string& name) = 0;
  virtual std::optional<TaskDefinition> find_task_definition(const std::string& name) const = 0;

  virtual TaskHandle launch_task(const std::string& definition_name, Cluster cluster,
                                 const std::map<std::string, std::string>& tags,
                                 const std::map<std::string, std::string>& env_overrides) = 0;
  virtual TaskHandle poll_task(const std::string& task_id) const = 0;
  virtual void stop_task(const std::string& task_id) = 0;
  virtual std::vector<TaskHandle> list_tasks(std::optional<Cluster> cluster,
                                             const std::map<std::string, std::string>& tag_filter) const = 0;
  virtual std::string fetch_logs(const std::string& task_id) const = 0;

  // Engine poll support: a monotonically increasing clock plus a bounded wait
  // between polls ("one beat").
  virtual ClockDomain clock_domain() const = 0;
  virtual std::uint64_t now() const = 0;
  virtual void wait_beat() = 0;
};

}  // namespace grove
