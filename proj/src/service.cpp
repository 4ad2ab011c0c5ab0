#include "grove/service.hpp"

#include "grove/errors.hpp"
#include "grove/local_backend.hpp"
#include "grove/log.hpp"

namespace grove {

Service::Service(Config cfg) : cfg_(std::move(cfg)) {
  if (cfg_.storage_root.empty()) throw RejectedError("config needs a storage_root");

  if (cfg_.backend == "local") {
    if (cfg_.local.images_file.empty()) {
      throw RejectedError("local backend needs local.images_file");
    }
    auto images = load_image_table(cfg_.local.images_file);
    backend_ = std::make_unique<LocalBackend>(std::move(images),
                                              cfg_.storage_root / ".task-logs",
                                              cfg_.local.beat_ms);
  } else {
    auto sim = std::make_unique<SimBackend>(
        cfg_.sim.auto_tick ? SimBackend::Mode::auto_tick : SimBackend::Mode::manual,
        cfg_.sim.tick_ms, cfg_.sim.max_concurrent_tasks);
    for (const auto& program : cfg_.sim.programs) sim->program(program);
    sim_ = sim.get();
    backend_ = std::move(sim);
  }

  workspaces_ = std::make_unique<WorkspaceStore>(cfg_.storage_root);
  sources_ = std::make_unique<DirSourceProvider>(cfg_.source_root);

  ring_ = std::make_shared<notify::RingSink>(cfg_.notify.buffer_size);
  notifier_.add_sink(std::make_shared<notify::LogSink>());
  notifier_.add_sink(ring_);
  if (!cfg_.notify.webhook_url.empty()) {
    notifier_.add_sink(std::make_shared<notify::WebhookSink>(cfg_.notify.webhook_url));
  }

  EngineOptions options;
  options.repository = cfg_.repository;
  options.templates_dir = cfg_.templates_dir;
  options.build_targets = cfg_.build_targets;
  options.timeouts = cfg_.timeouts;
  options.strict_tests = cfg_.strict_tests;
  options.portal_base_url = "http://" + cfg_.bind.portal_host + ":" +
                            std::to_string(cfg_.bind.portal_port);
  engine_ = std::make_unique<Engine>(*backend_, *workspaces_, *sources_, notifier_, options);

  gateway_core_ = std::make_unique<GatewayCore>(
      cfg_.hook_token, [this](const PipelineEvent& e) { return engine_->schedule_event(e); });
}

Service::~Service() {
  if (gateway_server_) gateway_server_->stop();
  if (portal_server_) portal_server_->stop();
  engine_.reset();   // aborts in-flight runs before the backend goes away
  backend_.reset();
}

bool Service::start_http() {
  gateway_server_ = std::make_unique<GatewayServer>(*gateway_core_, *engine_, cfg_.hook_token);
  if (!gateway_server_->start(cfg_.bind.gateway_host, cfg_.bind.gateway_port)) {
    log::error("gateway bind to ", cfg_.bind.gateway_host, ":", cfg_.bind.gateway_port,
               " failed");
    return false;
  }
  portal_server_ = std::make_unique<PortalServer>(PortalCore(*engine_, *ring_));
  if (!portal_server_->start(cfg_.bind.portal_host, cfg_.bind.portal_port)) {
    log::error("portal bind to ", cfg_.bind.portal_host, ":", cfg_.bind.portal_port, " failed");
    return false;
  }
  log::info("gateway on ", cfg_.bind.gateway_host, ":", gateway_server_->port(), ", portal on ",
            cfg_.bind.portal_host, ":", portal_server_->port());
  return true;
}

int Service::gateway_port() const { return gateway_server_ ? gateway_server_->port() : 0; }
int Service::portal_port() const { return portal_server_ ? portal_server_->port() : 0; }

}  // namespace grove
