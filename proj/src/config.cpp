#include "grove/config.hpp"

#include <nlohmann/json.hpp>

#include "grove/errors.hpp"
#include "grove/util.hpp"

namespace grove {

using nlohmann::json;

namespace {

json parse_file(const std::filesystem::path& file) {
  try {
    return json::parse(util::read_file(file));
  } catch (const json::exception& e) {
    throw RejectedError(file.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace

std::vector<SimProgram> parse_sim_programs(const json& list) {
  std::vector<SimProgram> programs;
  for (const auto& entry : list) {
    SimProgram p;
    p.image_ref = entry.at("image_ref").get<std::string>();
    p.duration_ticks = entry.value("duration_ticks", p.duration_ticks);
    p.exit_code = entry.value("exit_code", p.exit_code);
    p.log_text = entry.value("log_text", p.log_text);
    p.serves_endpoint = entry.value("serves_endpoint", p.serves_endpoint);
    p.fail_exit_code = entry.value("fail_exit_code", p.fail_exit_code);
    if (entry.contains("writes")) {
      for (const auto& w : entry["writes"]) {
        p.writes.emplace_back(w.at("path").get<std::string>(),
                              w.at("content").get<std::string>());
      }
    }
    if (entry.contains("fail_when")) {
      for (const auto& [k, v] : entry["fail_when"].items()) {
        p.fail_when[k] = v.get<std::string>();
      }
    }
    programs.push_back(std::move(p));
  }
  return programs;
}

Config load_config(const std::filesystem::path& file) {
  json doc = parse_file(file);
  Config cfg;
  try {
    cfg.repository = doc.value("repository", cfg.repository);
    cfg.storage_root = doc.at("storage_root").get<std::string>();
    cfg.hook_token = doc.at("hook_token").get<std::string>();
    cfg.backend = doc.value("backend", cfg.backend);
    if (cfg.backend != "sim" && cfg.backend != "local") {
      throw RejectedError("backend must be 'sim' or 'local', not '" + cfg.backend + "'");
    }
    if (doc.contains("source_root")) cfg.source_root = doc["source_root"].get<std::string>();
    if (doc.contains("templates_dir")) cfg.templates_dir = doc["templates_dir"].get<std::string>();
    if (doc.contains("build_targets")) {
      cfg.build_targets = doc["build_targets"].get<std::vector<std::string>>();
    }
    cfg.strict_tests = doc.value("strict_tests", false);

    if (doc.contains("timeouts")) {
      const auto& t = doc["timeouts"];
      cfg.timeouts.build_wall_ms = t.value("build_ms", cfg.timeouts.build_wall_ms);
      cfg.timeouts.deploy_wall_ms = t.value("deploy_ms", cfg.timeouts.deploy_wall_ms);
      cfg.timeouts.test_wall_ms = t.value("test_ms", cfg.timeouts.test_wall_ms);
      cfg.timeouts.build_ticks = t.value("build_ticks", cfg.timeouts.build_ticks);
      cfg.timeouts.deploy_ticks = t.value("deploy_ticks", cfg.timeouts.deploy_ticks);
      cfg.timeouts.test_ticks = t.value("test_ticks", cfg.timeouts.test_ticks);
    }
    if (doc.contains("bind")) {
      const auto& b = doc["bind"];
      cfg.bind.gateway_host = b.value("gateway_host", cfg.bind.gateway_host);
      cfg.bind.gateway_port = b.value("gateway_port", cfg.bind.gateway_port);
      cfg.bind.portal_host = b.value("portal_host", cfg.bind.portal_host);
      cfg.bind.portal_port = b.value("portal_port", cfg.bind.portal_port);
    }
    if (doc.contains("notify")) {
      const auto& n = doc["notify"];
      cfg.notify.webhook_url = n.value("webhook_url", "");
      cfg.notify.buffer_size = n.value("buffer_size", cfg.notify.buffer_size);
    }
    if (doc.contains("sim")) {
      const auto& s = doc["sim"];
      cfg.sim.auto_tick = s.value("auto_tick", cfg.sim.auto_tick);
      cfg.sim.tick_ms = s.value("tick_ms", cfg.sim.tick_ms);
      cfg.sim.max_concurrent_tasks = s.value("max_concurrent_tasks", 0);
      if (s.contains("programs")) cfg.sim.programs = parse_sim_programs(s["programs"]);
    }
    if (doc.contains("local")) {
      const auto& l = doc["local"];
      if (l.contains("images_file")) cfg.local.images_file = l["images_file"].get<std::string>();
      cfg.local.beat_ms = l.value("beat_ms", cfg.local.beat_ms);
    }
  } catch (const json::exception& e) {
    throw RejectedError("config " + file.string() + ": " + e.what());
  }
  return cfg;
}

std::map<std::string, LocalImage> load_image_table(const std::filesystem::path& file) {
  json doc = parse_file(file);
  std::map<std::string, LocalImage> table;
  try {
    for (const auto& [image_ref, entry] : doc.items()) {
      LocalImage img;
      img.executable = entry.at("executable").get<std::string>();
      if (entry.contains("args")) img.args = entry["args"].get<std::vector<std::string>>();
      img.working_dir = entry.value("working_dir", "");
      table[image_ref] = std::move(img);
    }
  } catch (const json::exception& e) {
    throw RejectedError("image table " + file.string() + ": " + e.what());
  }
  return table;
}

}  // namespace grove
