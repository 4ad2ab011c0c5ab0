#include "grove/portal.hpp"

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "grove/errors.hpp"
#include "grove/util.hpp"

namespace grove {

using nlohmann::json;

namespace {

json ref_json(const RefKey& ref) {
  return {{"kind", to_string(ref.kind)}, {"name", ref.name}, {"safe_id", ref.safe_id}};
}

json stage_summary(const PipelineRun& run) {
  json summary = {{"total", run.stage_log.size()}, {"success", 0}, {"failed", 0},
                  {"skipped", 0},                  {"pending", 0}, {"running", 0}};
  for (const auto& entry : run.stage_log) {
    std::string key = to_string(entry.status);
    summary[key] = summary[key].get<int>() + 1;
  }
  return summary;
}

}  // namespace

PortalCore::PortalCore(const Engine& engine, const notify::RingSink& ring)
    : engine_(engine), ring_(ring) {}

json PortalCore::runs() const {
  json out = json::array();
  for (const auto& run : engine_.runs()) {
    out.push_back({{"run_id", run.run_id},
                   {"run_number", run.run_number},
                   {"ref", ref_json(run.ref)},
                   {"outcome", to_string(run.outcome)},
                   {"stages", stage_summary(run)},
                   {"created_at", util::format_iso8601(run.created_at)}});
  }
  return out;
}

json PortalCore::run_detail(const std::string& run_id) const {
  auto run = engine_.find_run(run_id);
  if (!run) throw NotFoundError("no run with id " + run_id);

  json stages = json::array();
  for (const auto& entry : run->stage_log) {
    json s = {{"name", entry.name},
              {"status", to_string(entry.status)},
              {"started_at", entry.started_at},
              {"ended_at", entry.ended_at}};
    if (!entry.detail.empty()) s["detail"] = entry.detail;
    stages.push_back(std::move(s));
  }

  json out = {{"run_id", run->run_id},
              {"run_number", run->run_number},
              {"ref", ref_json(run->ref)},
              {"outcome", to_string(run->outcome)},
              {"trigger",
               {{"kind", to_string(run->trigger.kind)},
                {"delivery_id", run->trigger.delivery_id},
                {"commit", run->trigger.commit_id.value_or("")}}},
              {"stage_log", std::move(stages)},
              {"artifact_paths", run->artifact_paths},
              {"created_at", util::format_iso8601(run->created_at)}};
  if (run->environment) {
    json env = {{"task_id", run->environment->task_id}};
    if (run->environment->endpoint) {
      env["endpoint"] = {{"host", run->environment->endpoint->host},
                         {"port", run->environment->endpoint->port}};
    }
    out["environment"] = std::move(env);
  }
  if (run->report) {
    out["report"] = json::parse(reporting::render_report(*run->report,
                                                         reporting::ReportFormat::json));
  }
  return out;
}

std::string PortalCore::run_report_html(const std::string& run_id) const {
  auto run = engine_.find_run(run_id);
  if (!run) throw NotFoundError("no run with id " + run_id);
  if (!run->report) throw NotFoundError("run " + run_id + " has no report");
  return reporting::render_report(*run->report, reporting::ReportFormat::html);
}

json PortalCore::environments() const {
  json out = json::array();
  for (const auto& record : engine_.environments()) {
    out.push_back({{"ref", ref_json(record.ref)},
                   {"task_id", record.task.task_id},
                   {"endpoint", {{"host", record.endpoint.host}, {"port", record.endpoint.port}}},
                   {"created_by_run", record.created_by_run}});
  }
  return out;
}

json PortalCore::notifications() const {
  json out = json::array();
  for (const auto& n : ring_.recent()) {
    out.push_back({{"text", n.text},
                   {"repository", n.repository},
                   {"ref", n.ref},
                   {"run_url", n.run_url},
                   {"run_number", n.run_number},
                   {"message", n.message},
                   {"delivered_at", n.delivered_at}});
  }
  return out;
}

json PortalCore::health() const {
  return {{"status", "ok"},
          {"runs", engine_.runs().size()},
          {"environments", engine_.environments().size()}};
}

// ---------------------------------------------------------------------------

struct PortalServer::Impl {
  PortalCore core;
  httplib::Server server;
  std::thread thread;
};

namespace {

void reply_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(2), "application/json");
}

// Runs `fn`, translating NotFoundError into a 404 response.
template <typename Fn>
void guard(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const NotFoundError& e) {
    reply_json(res, json{{"error", e.what()}}, 404);
  } catch (const std::exception& e) {
    reply_json(res, json{{"error", e.what()}}, 500);
  }
}

}  // namespace

PortalServer::PortalServer(PortalCore core) : impl_(new Impl{std::move(core)}) {
  auto& server = impl_->server;
  PortalCore* portal = &impl_->core;

  server.Get("/runs", [portal](const httplib::Request&, httplib::Response& res) {
    guard(res, [&] { reply_json(res, portal->runs()); });
  });
  server.Get("/runs/([^/]+)/report.html", [portal](const httplib::Request& req,
                                                   httplib::Response& res) {
    guard(res, [&] {
      res.set_content(portal->run_report_html(req.matches[1].str()), "text/html");
    });
  });
  server.Get("/runs/([^/]+)", [portal](const httplib::Request& req, httplib::Response& res) {
    guard(res, [&] { reply_json(res, portal->run_detail(req.matches[1].str())); });
  });
  server.Get("/environments", [portal](const httplib::Request&, httplib::Response& res) {
    guard(res, [&] { reply_json(res, portal->environments()); });
  });
  server.Get("/notifications", [portal](const httplib::Request&, httplib::Response& res) {
    guard(res, [&] { reply_json(res, portal->notifications()); });
  });
  server.Get("/healthz", [portal](const httplib::Request&, httplib::Response& res) {
    guard(res, [&] { reply_json(res, portal->health()); });
  });
}

PortalServer::~PortalServer() { stop(); }

bool PortalServer::start(const std::string& host, int port) {
  auto& server = impl_->server;
  if (port == 0) {
    port_ = server.bind_to_any_port(host);
    if (port_ <= 0) return false;
  } else {
    if (!server.bind_to_port(host, port)) return false;
    port_ = port;
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  server.wait_until_ready();
  return true;
}

void PortalServer::stop() {
  if (impl_->thread.joinable()) {
    impl_->server.stop();
    impl_->thread.join();
  }
}

}  // namespace grove
