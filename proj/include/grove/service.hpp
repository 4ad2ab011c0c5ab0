#pragma once

#include <memory>

#include "grove/config.hpp"
#include "grove/gateway.hpp"
#include "grove/portal.hpp"
#include "grove/sources.hpp"
#include "grove/workspace.hpp"

namespace grove {

// Wires one complete instance from a Config: backend, workspaces, sources,
// notifier, engine, gateway and portal. `serve` and `replay` both stand on
// this; tests can too when they want the full stack in-process.
class Service {
 public:
  explicit Service(Config cfg);
  ~Service();  // servers first, then engine, then backend

  // Binds gateway and portal per cfg.bind. Returns false when a bind fails.
  bool start_http();

  Engine& engine() { return *engine_; }
  GatewayCore& gateway() { return *gateway_core_; }
  Backend& backend() { return *backend_; }
  SimBackend* sim() { return sim_; }  // null when backend=local
  notify::RingSink& ring() { return *ring_; }
  const Config& config() const { return cfg_; }
  int gateway_port() const;
  int portal_port() const;

 private:
  Config cfg_;
  std::unique_ptr<Backend> backend_;
  SimBackend* sim_ = nullptr;
  std::unique_ptr<WorkspaceStore> workspaces_;
  std::unique_ptr<DirSourceProvider> sources_;
  std::shared_ptr<notify::RingSink> ring_;
  notify::Notifier notifier_;
  std::unique_ptr<Engine> engine_;
  std::unique_ptr<GatewayCore> gateway_core_;
  std::unique_ptr<GatewayServer> gateway_server_;
  std::unique_ptr<PortalServer> portal_server_;
};

}  // namespace grove
