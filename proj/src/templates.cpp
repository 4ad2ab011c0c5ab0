#include "grove/templates.hpp"

#include <nlohmann/json.hpp>

#include "grove/errors.hpp"
#include "grove/util.hpp"

namespace grove {

TaskDefinition render_task_definition(const std::string& template_text,
                                      const std::string& registered_name,
                                      const std::filesystem::path& workspace_root) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(template_text);
  } catch (const nlohmann::json::exception& e) {
    throw RejectedError(std::string("task template is not valid JSON: ") + e.what());
  }

  TaskDefinition def;
  def.name = registered_name;
  try {
    def.image_ref = doc.at("image_ref").get<std::string>();
    if (doc.contains("command")) def.command = doc["command"].get<std::vector<std::string>>();
    if (doc.contains("env")) {
      for (const auto& [k, v] : doc["env"].items()) def.env_vars[k] = v.get<std::string>();
    }
    if (doc.contains("ports")) {
      for (const auto& p : doc["ports"]) {
        PortMapping pm;
        pm.container_port = p.at("container_port").get<int>();
        pm.protocol = p.value("protocol", "tcp");
        def.port_mappings.push_back(pm);
      }
    }
    for (const auto& m : doc.at("volume_mounts")) {
      VolumeMount vm;
      vm.volume_id = m.at("volume_id").get<std::string>();
      vm.mount_path = m.at("mount_path").get<std::string>();
      def.volume_mounts.push_back(vm);
    }
    def.cpu_units = doc.value("cpu_units", def.cpu_units);
    def.memory_mb = doc.value("memory_mb", def.memory_mb);
  } catch (const nlohmann::json::exception& e) {
    throw RejectedError(std::string("task template missing required field: ") + e.what());
  }

  bool substituted = false;
  for (auto& mount : def.volume_mounts) {
    if (util::contains_marker(mount.mount_path, "WORKSPACE")) {
      mount.mount_path =
          util::expand_markers(mount.mount_path, {{"WORKSPACE", workspace_root.string()}});
      substituted = true;
    }
  }
  if (!substituted) {
    throw RejectedError("task template has no {{WORKSPACE}} marker in any volume mount");
  }
  return def;
}

}  // namespace grove
