#pragma once

#include <filesystem>
#include <string>

#include "grove/backend.hpp"

namespace grove {

// Builds a TaskDefinition from one of the shipped JSON templates. Only the
// volume-mount paths are touched: every {{WORKSPACE}} marker in a mount path
// is replaced with `workspace_root`. The template must carry at least one
// mount with the marker — a template that never references the workspace
// cannot isolate anything and is rejected.
//
// Template schema (all fields but name/image_ref/volume_mounts optional):
//   { "name": "build", "image_ref": "app/build", "command": [...],
//     "env": {...}, "ports": [{"container_port": 8080, "protocol": "tcp"}],
//     "volume_mounts": [{"volume_id": "ws", "mount_path": "{{WORKSPACE}}"}],
//     "cpu_units": 256, "memory_mb": 512 }
//
// `registered_name` overrides the template's own name so each ref registers
// its private copies without colliding with other refs.
TaskDefinition render_task_definition(const std::string& template_text,
                                      const std::string& registered_name,
                                      const std::filesystem::path& workspace_root);

}  // namespace grove
