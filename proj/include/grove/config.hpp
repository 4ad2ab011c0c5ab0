#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "grove/engine.hpp"
#include "grove/local_backend.hpp"
#include "grove/sim_backend.hpp"

namespace grove {

struct BindConfig {
  std::string gateway_host = "127.0.0.1";
  int gateway_port = 8080;
  std::string portal_host = "127.0.0.1";
  int portal_port = 8081;
};

struct NotifyConfig {
  std::string webhook_url;  // empty: no outbound webhook sink
  std::size_t buffer_size = 256;
};

struct SimSettings {
  bool auto_tick = true;
  std::uint64_t tick_ms = 20;
  int max_concurrent_tasks = 0;
  std::vector<SimProgram> programs;
};

struct LocalSettings {
  std::filesystem::path images_file;  // image-table JSON, required for local
  std::uint64_t beat_ms = 2000;       // poll cadence between task status checks
};

// One JSON document configures the whole service; see configs/ for examples.
struct Config {
  std::string repository = "example/app";
  std::filesystem::path storage_root;
  std::string hook_token;
  std::string backend = "sim";  // sim | local
  std::filesystem::path source_root;
  std::filesystem::path templates_dir = "templates";
  std::vector<std::string> build_targets = {"frontend", "backend"};
  bool strict_tests = false;
  StageTimeouts timeouts;
  BindConfig bind;
  NotifyConfig notify;
  SimSettings sim;
  LocalSettings local;
};

Config load_config(const std::filesystem::path& file);

// image-ref -> {executable, args, working_dir} table for the local backend.
std::map<std::string, LocalImage> load_image_table(const std::filesystem::path& file);

// Shared by config files and replay scenarios.
std::vector<SimProgram> parse_sim_programs(const nlohmann::json& list);

}  // namespace grove
