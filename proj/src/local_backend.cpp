#include "grove/local_backend.hpp"

#include <fcntl.h>
#include <netinet/in.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstring>

#include "grove/errors.hpp"
#include "grove/log.hpp"
#include "grove/util.hpp"

extern char** environ;

namespace grove {

namespace fs = std::filesystem;

namespace {

// Asks the kernel for a free loopback port. Racy by nature (the socket is
// closed again before the child binds), but plenty at desk scale.
int allocate_port() {
  int sock = ::socket(AF_INET, SOCK_STREAM, 0);
  if (sock < 0) throw EnvironmentError("socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  if (::bind(sock, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(sock);
    throw EnvironmentError("bind() for port allocation failed");
  }
  socklen_t len = sizeof(addr);
  ::getsockname(sock, reinterpret_cast<sockaddr*>(&addr), &len);
  int port = ntohs(addr.sin_port);
  ::close(sock);
  return port;
}

bool port_accepts(int port) {
  int sock = ::socket(AF_INET, SOCK_STREAM, 0);
  if (sock < 0) return false;
  timeval tv{0, 200 * 1000};  // 200 ms is generous on loopback
  ::setsockopt(sock, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<uint16_t>(port));
  bool ok = ::connect(sock, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0;
  ::close(sock);
  return ok;
}

}  // namespace

LocalBackend::LocalBackend(std::map<std::string, LocalImage> images, fs::path log_dir,
                           std::uint64_t beat_ms, int max_concurrent_tasks)
    : images_(std::move(images)),
      log_dir_(std::move(log_dir)),
      beat_ms_(beat_ms),
      max_concurrent_(max_concurrent_tasks),
      epoch_(std::chrono::steady_clock::now()) {
  fs::create_directories(log_dir_);
  reaper_ = std::jthread([this](std::stop_token st) { reaper_loop(st); });
}

LocalBackend::~LocalBackend() {
  {
    std::lock_guard lock(mutex_);
    shutting_down_ = true;
    for (auto& [id, proc] : procs_) {
      if (proc.handle.status != TaskStatus::stopped && proc.pid > 0) {
        ::kill(static_cast<pid_t>(proc.pid), SIGKILL);
      }
    }
  }
  reaper_.request_stop();
  beat_cv_.notify_all();
  if (reaper_.joinable()) reaper_.join();

  // Collect any stragglers so nothing outlives us as a zombie.
  std::lock_guard lock(mutex_);
  for (auto& [id, proc] : procs_) {
    if (proc.pid > 0 && !proc.reaped) {
      int status = 0;
      ::waitpid(static_cast<pid_t>(proc.pid), &status, 0);
      proc.reaped = true;
    }
  }
}

std::uint64_t LocalBackend::now() const {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                        std::chrono::steady_clock::now() - epoch_)
                                        .count());
}

void LocalBackend::wait_beat() {
  std::unique_lock lock(mutex_);
  beat_cv_.wait_for(lock, std::chrono::milliseconds(beat_ms_));
}

std::string LocalBackend::register_task_definition(const TaskDefinition& def) {
  if (def.name.empty()) throw RejectedError("task definition needs a name");
  if (def.image_ref.empty()) throw RejectedError("task definition needs an image_ref");
  std::lock_guard lock(mutex_);
  definitions_[def.name] = def;
  return def.name;
}

void LocalBackend::deregister_task_definition(const std::string& name) {
  std::lock_guard lock(mutex_);
  if (definitions_.erase(name) == 0) throw NotFoundError("no task definition named " + name);
}

std::optional<TaskDefinition> LocalBackend::find_task_definition(const std::string& name) const {
  std::lock_guard lock(mutex_);
  auto it = definitions_.find(name);
  if (it == definitions_.end()) return std::nullopt;
  return it->second;
}

int LocalBackend::running_count_locked() const {
  int n = 0;
  for (const auto& [id, proc] : procs_) {
    if (proc.handle.status != TaskStatus::stopped) ++n;
  }
  return n;
}

TaskHandle LocalBackend::launch_task(const std::string& definition_name, Cluster cluster,
                                     const std::map<std::string, std::string>& tags,
                                     const std::map<std::string, std::string>& env_overrides) {
  TaskDefinition def;
  LocalImage image;
  std::string task_id;
  int port = 0;
  {
    std::lock_guard lock(mutex_);
    auto dit = definitions_.find(definition_name);
    if (dit == definitions_.end()) {
      throw RejectedError("launch of unknown task definition " + definition_name);
    }
    def = dit->second;
    auto iit = images_.find(def.image_ref);
    if (iit == images_.end()) {
      throw RejectedError("image " + def.image_ref + " has no local image-table entry");
    }
    image = iit->second;
    if (max_concurrent_ > 0 && running_count_locked() >= max_concurrent_) {
      throw CapacityError("local backend at its concurrent-task limit");
    }
    task_id = "lt-" + std::to_string(next_task_num_++);
  }

  // Effective env: definition env, then caller overrides, then the plumbing
  // vars every task can rely on.
  std::map<std::string, std::string> env = def.env_vars;
  for (const auto& [k, v] : env_overrides) env[k] = v;
  std::string mount = def.volume_mounts.empty() ? "" : def.volume_mounts.front().mount_path;
  if (!mount.empty()) env["WORKSPACE"] = mount;
  if (cluster == Cluster::deploy) {
    port = allocate_port();
    env["PORT"] = std::to_string(port);
  }

  std::vector<std::string> argv_store;
  argv_store.push_back(image.executable);
  for (const auto& arg : image.args) argv_store.push_back(util::expand_markers(arg, env));
  for (const auto& arg : def.command) argv_store.push_back(util::expand_markers(arg, env));
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  argv.push_back(nullptr);

  std::vector<std::string> env_store;
  for (char** e = environ; *e != nullptr; ++e) {
    const char* eq = std::strchr(*e, '=');
    if (eq && env.count(std::string(*e, eq - *e)) == 0) env_store.emplace_back(*e);
  }
  for (const auto& [k, v] : env) env_store.push_back(k + "=" + v);
  std::vector<char*> envp;
  for (auto& s : env_store) envp.push_back(s.data());
  envp.push_back(nullptr);

  std::string workdir = image.working_dir.empty() ? mount : util::expand_markers(image.working_dir, env);
  fs::path log_file = log_dir_ / (task_id + ".log");

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, 1, log_file.c_str(), O_WRONLY | O_CREAT | O_TRUNC,
                                   0644);
  posix_spawn_file_actions_adddup2(&actions, 1, 2);
  if (!workdir.empty()) {
    posix_spawn_file_actions_addchdir_np(&actions, workdir.c_str());
  }

  pid_t pid = -1;
  int rc = posix_spawnp(&pid, image.executable.c_str(), &actions, nullptr, argv.data(),
                        envp.data());
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    throw EnvironmentError("could not spawn " + image.executable + ": " + std::strerror(rc));
  }

  Proc proc;
  proc.handle.task_id = task_id;
  proc.handle.cluster = cluster;
  proc.handle.definition = definition_name;
  proc.handle.status = TaskStatus::running;  // the process exists as of now
  proc.handle.tags = tags;
  proc.handle.started_at = now();
  proc.pid = pid;
  proc.log_file = log_file;
  proc.port = port;

  std::lock_guard lock(mutex_);
  auto [it, inserted] = procs_.emplace(task_id, std::move(proc));
  beat_cv_.notify_all();
  return it->second.handle;
}

TaskHandle LocalBackend::poll_task(const std::string& task_id) const {
  std::lock_guard lock(mutex_);
  auto it = procs_.find(task_id);
  if (it == procs_.end()) throw NotFoundError("no task with id " + task_id);
  return it->second.handle;
}

void LocalBackend::stop_task(const std::string& task_id) {
  std::lock_guard lock(mutex_);
  auto it = procs_.find(task_id);
  if (it == procs_.end()) throw NotFoundError("no task with id " + task_id);
  Proc& proc = it->second;
  if (proc.handle.status == TaskStatus::stopped || proc.term_sent) return;
  proc.term_sent = true;
  proc.kill_after = now() + 2000;  // SIGKILL follows if TERM is ignored
  if (proc.pid > 0) ::kill(static_cast<pid_t>(proc.pid), SIGTERM);
  beat_cv_.notify_all();
}

std::vector<TaskHandle> LocalBackend::list_tasks(
    std::optional<Cluster> cluster, const std::map<std::string, std::string>& tag_filter) const {
  std::lock_guard lock(mutex_);
  std::vector<TaskHandle> out;
  for (const auto& [id, proc] : procs_) {
    if (cluster && proc.handle.cluster != *cluster) continue;
    bool match = true;
    for (const auto& [k, v] : tag_filter) {
      auto tag = proc.handle.tags.find(k);
      if (tag == proc.handle.tags.end() || tag->second != v) {
        match = false;
        break;
      }
    }
    if (match) out.push_back(proc.handle);
  }
  return out;
}

std::string LocalBackend::fetch_logs(const std::string& task_id) const {
  fs::path file;
  {
    std::lock_guard lock(mutex_);
    auto it = procs_.find(task_id);
    if (it == procs_.end()) throw NotFoundError("no task with id " + task_id);
    file = it->second.log_file;
  }
  try {
    return util::read_file(file);
  } catch (const std::exception&) {
    return "";
  }
}

bool LocalBackend::all_reaped() const {
  std::lock_guard lock(mutex_);
  for (const auto& [id, proc] : procs_) {
    if (proc.pid > 0 && !proc.reaped) return false;
  }
  return true;
}

void LocalBackend::scan_locked() {
  bool changed = false;
  for (auto& [id, proc] : procs_) {
    if (proc.handle.status == TaskStatus::stopped) continue;

    int status = 0;
    pid_t r = ::waitpid(static_cast<pid_t>(proc.pid), &status, WNOHANG);
    if (r == proc.pid) {
      proc.reaped = true;
      proc.handle.status = TaskStatus::stopped;
      proc.handle.stopped_at = now();
      proc.handle.endpoint.reset();
      if (WIFEXITED(status)) {
        proc.handle.exit_code = WEXITSTATUS(status);
      } else if (WIFSIGNALED(status)) {
        proc.handle.exit_code = 128 + WTERMSIG(status);
      } else {
        proc.handle.exit_code = -1;
      }
      changed = true;
      continue;
    }

    if (proc.term_sent && now() >= proc.kill_after && proc.pid > 0) {
      ::kill(static_cast<pid_t>(proc.pid), SIGKILL);
      proc.kill_after = now() + 60000;  // don't spam the signal
    }

    if (proc.handle.cluster == Cluster::deploy && !proc.handle.endpoint && proc.port > 0 &&
        !proc.term_sent) {
      if (port_accepts(proc.port)) {
        proc.handle.endpoint = Endpoint{"127.0.0.1", proc.port};
        changed = true;
      }
    }
  }
  if (changed) beat_cv_.notify_all();
}

void LocalBackend::reaper_loop(std::stop_token st) {
  while (!st.stop_requested()) {
    {
      std::lock_guard lock(mutex_);
      scan_locked();
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  std::lock_guard lock(mutex_);
  scan_locked();
}

}  // namespace grove
