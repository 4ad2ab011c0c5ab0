#include "grove/backend.hpp"

namespace grove {

const char* to_string(Cluster cluster) {
  switch (cluster) {
    case Cluster::build: return "build";
    case Cluster::deploy: return "deploy";
    case Cluster::test: return "test";
  }
  return "?";
}

std::optional<Cluster> cluster_from_string(const std::string& name) {
  if (name == "build") return Cluster::build;
  if (name == "deploy") return Cluster::deploy;
  if (name == "test") return Cluster::test;
  return std::nullopt;
}

const char* to_string(TaskStatus status) {
  switch (status) {
    case TaskStatus::pending: return "pending";
    case TaskStatus::running: return "running";
    case TaskStatus::stopped: return "stopped";
  }
  return "?";
}

}  // namespace grove
