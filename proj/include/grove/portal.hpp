#pragma once

#include <memory>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "grove/engine.hpp"
#include "grove/notifier.hpp"

namespace grove {

// Read-only projections of engine state, shaped for the status API. No call
// here mutates anything; the HTTP layer below is a thin shell around these.
class PortalCore {
 public:
  PortalCore(const Engine& engine, const notify::RingSink& ring);

  nlohmann::json runs() const;
  nlohmann::json run_detail(const std::string& run_id) const;    // throws NotFoundError
  std::string run_report_html(const std::string& run_id) const;  // throws NotFoundError
  nlohmann::json environments() const;
  nlohmann::json notifications() const;
  nlohmann::json health() const;

 private:
  const Engine& engine_;
  const notify::RingSink& ring_;
};

// GET /runs, /runs/{id}, /runs/{id}/report.html, /environments,
// /notifications, /healthz — loopback by default, no auth, no writes.
class PortalServer {
 public:
  explicit PortalServer(PortalCore core);
  ~PortalServer();

  bool start(const std::string& host, int port);  // port 0 picks a free port
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace grove
