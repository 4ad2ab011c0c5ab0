#include "grove/gateway.hpp"

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "grove/errors.hpp"
#include "grove/log.hpp"
#include "grove/util.hpp"

namespace grove {

using nlohmann::json;

namespace {

Normalization ignored(const std::string& reason) {
  Normalization n;
  n.is_event = false;
  n.ignored_reason = reason;
  return n;
}

Normalization event_of(EventKind kind, RefKind ref_kind, const std::string& name,
                       std::optional<std::string> commit) {
  Normalization n;
  n.is_event = true;
  n.kind = kind;
  n.ref = make_ref_key(ref_kind, name);
  n.commit_id = std::move(commit);
  return n;
}

std::string require_string(const json& payload, const char* key, const char* event_name) {
  if (!payload.contains(key) || !payload[key].is_string()) {
    throw RejectedError(std::string(event_name) + " payload missing required field '" + key + "'");
  }
  return payload[key].get<std::string>();
}

Normalization normalize_push(const json& payload) {
  std::string ref = require_string(payload, "ref", "push");
  if (payload.value("deleted", false)) {
    return ignored("push-shaped deletion; deletions arrive on the lifecycle hook");
  }
  const std::string prefix = "refs/heads/";
  if (ref.rfind(prefix, 0) != 0) {
    return ignored("push to a non-branch ref");
  }
  std::string branch = ref.substr(prefix.size());
  if (branch.empty()) throw RejectedError("push payload has an empty branch name");

  std::optional<std::string> commit;
  if (payload.contains("after") && payload["after"].is_string()) {
    commit = payload["after"].get<std::string>();
  } else if (payload.contains("head_commit") && payload["head_commit"].is_object() &&
             payload["head_commit"].contains("id")) {
    commit = payload["head_commit"]["id"].get<std::string>();
  } else {
    throw RejectedError("push payload missing required field 'after'");
  }
  return event_of(EventKind::branch_pushed, RefKind::branch, branch, commit);
}

Normalization normalize_delete(const json& payload) {
  std::string ref = require_string(payload, "ref", "delete");
  std::string ref_type = require_string(payload, "ref_type", "delete");
  if (ref_type != "branch") {
    return ignored("deletion of a " + ref_type + ", not a branch");
  }
  return event_of(EventKind::branch_deleted, RefKind::branch, ref, std::nullopt);
}

Normalization normalize_pull_request(const json& payload) {
  std::string action = require_string(payload, "action", "pull_request");
  if (!payload.contains("number") || !payload["number"].is_number_integer()) {
    throw RejectedError("pull_request payload missing required field 'number'");
  }
  std::string number = std::to_string(payload["number"].get<long long>());

  std::optional<std::string> commit;
  if (payload.contains("pull_request") && payload["pull_request"].is_object()) {
    const auto& pr = payload["pull_request"];
    if (pr.contains("head") && pr["head"].is_object() && pr["head"].contains("sha")) {
      commit = pr["head"]["sha"].get<std::string>();
    }
  }

  if (action == "opened") {
    return event_of(EventKind::pr_opened, RefKind::pull_request, number, commit);
  }
  if (action == "synchronize") {
    return event_of(EventKind::pr_updated, RefKind::pull_request, number, commit);
  }
  if (action == "closed") {
    return event_of(EventKind::pr_closed, RefKind::pull_request, number, std::nullopt);
  }
  return ignored("unsupported pull_request action '" + action + "'");
}

}  // namespace

Normalization normalize_event(const std::string& event_name, const json& payload) {
  if (event_name == "push") return normalize_push(payload);
  if (event_name == "delete") return normalize_delete(payload);
  if (event_name == "pull_request") return normalize_pull_request(payload);
  return ignored("unsupported event '" + event_name + "'");
}

GatewayCore::GatewayCore(std::string hook_token, EventSink sink, std::size_t dedup_window)
    : hook_token_(std::move(hook_token)), sink_(std::move(sink)), dedup_window_(dedup_window) {}

bool GatewayCore::token_ok(const std::string& token) const {
  return util::constant_time_equal(token, hook_token_);
}

bool GatewayCore::already_seen(const std::string& delivery_id) {
  std::lock_guard lock(mu_);
  if (seen_.count(delivery_id)) return true;
  seen_.insert(delivery_id);
  seen_order_.push_back(delivery_id);
  while (seen_order_.size() > dedup_window_) {
    seen_.erase(seen_order_.front());
    seen_order_.pop_front();
  }
  return false;
}

std::uint64_t GatewayCore::enqueued_count() const {
  std::lock_guard lock(mu_);
  return enqueued_;
}

HookResponse GatewayCore::dispatch(const std::string& event_name, const std::string& body,
                                   const std::optional<std::string>& delivery_id) {
  json payload;
  try {
    payload = json::parse(body);
  } catch (const json::exception&) {
    return {400, json{{"error", "body is not valid JSON"}}.dump()};
  }

  Normalization n;
  try {
    n = normalize_event(event_name, payload);
  } catch (const RejectedError& e) {
    return {400, json{{"error", e.what()}}.dump()};
  }
  if (!n.is_event) {
    return {202, json{{"status", "ignored"}, {"reason", n.ignored_reason}}.dump()};
  }

  PipelineEvent event;
  event.kind = n.kind;
  event.ref = n.ref;
  event.commit_id = n.commit_id;
  event.delivery_id = delivery_id.value_or(util::fresh_id("dlv"));
  event.received_at = std::chrono::system_clock::now();

  if (already_seen(event.delivery_id)) {
    return {202, json{{"status", "duplicate"}, {"delivery_id", event.delivery_id}}.dump()};
  }

  ScheduleResult scheduled = sink_(event);
  {
    std::lock_guard lock(mu_);
    ++enqueued_;
  }
  json out{{"delivery_id", event.delivery_id}};
  if (scheduled.kind == ScheduleResult::Kind::coalesced) out["coalesced"] = true;
  return {200, out.dump()};
}

HookResponse GatewayCore::handle_push_hook(const std::string& token, const std::string& body,
                                           const std::optional<std::string>& delivery_id) {
  if (!token_ok(token)) return {403, json{{"error", "bad token"}}.dump()};
  // A body with no `ref` is some other event kind aimed at the wrong hook;
  // acknowledge it so the sender does not retry.
  try {
    json peek = json::parse(body);
    if (!peek.is_object() || !peek.contains("ref")) {
      return {202, json{{"status", "ignored"}, {"reason", "not a push payload"}}.dump()};
    }
  } catch (const json::exception&) {
    return {400, json{{"error", "body is not valid JSON"}}.dump()};
  }
  return dispatch("push", body, delivery_id);
}

HookResponse GatewayCore::handle_lifecycle_hook(const std::string& token,
                                                const std::optional<std::string>& event_name,
                                                const std::string& body,
                                                const std::optional<std::string>& delivery_id) {
  if (!token_ok(token)) return {403, json{{"error", "bad token"}}.dump()};
  if (!event_name || event_name->empty()) {
    return {400, json{{"error", "missing X-GitHub-Event header"}}.dump()};
  }
  return dispatch(*event_name, body, delivery_id);
}

// ---------------------------------------------------------------------------

struct GatewayServer::Impl {
  GatewayCore& core;
  Engine& engine;
  std::string hook_token;
  httplib::Server server;
  std::thread thread;
};

GatewayServer::GatewayServer(GatewayCore& core, Engine& engine, std::string hook_token)
    : impl_(new Impl{core, engine, std::move(hook_token)}) {
  auto& server = impl_->server;

  server.Post("/hooks/multibranch/invoke", [this](const httplib::Request& req,
                                                  httplib::Response& res) {
    std::optional<std::string> delivery;
    if (req.has_header("X-GitHub-Delivery")) delivery = req.get_header_value("X-GitHub-Delivery");
    HookResponse r = impl_->core.handle_push_hook(req.get_param_value("token"), req.body, delivery);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });

  server.Post("/hooks/lifecycle/invoke", [this](const httplib::Request& req,
                                                httplib::Response& res) {
    std::optional<std::string> event_name;
    if (req.has_header("X-GitHub-Event")) event_name = req.get_header_value("X-GitHub-Event");
    std::optional<std::string> delivery;
    if (req.has_header("X-GitHub-Delivery")) delivery = req.get_header_value("X-GitHub-Delivery");
    HookResponse r = impl_->core.handle_lifecycle_hook(req.get_param_value("token"), event_name,
                                                       req.body, delivery);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });

  // Manual teardown, same path the cleanup pipeline takes. Token-guarded
  // like the hooks; the read-only portal never mutates anything.
  server.Post("/admin/cleanup", [this](const httplib::Request& req, httplib::Response& res) {
    if (!util::constant_time_equal(req.get_param_value("token"), impl_->hook_token)) {
      res.status = 403;
      res.set_content(json{{"error", "bad token"}}.dump(), "application/json");
      return;
    }
    std::string name = req.get_param_value("name");
    std::string kind = req.get_param_value("kind");
    if (name.empty()) {
      res.status = 400;
      res.set_content(json{{"error", "missing 'name' parameter"}}.dump(), "application/json");
      return;
    }
    RefKey ref = make_ref_key(kind == "pull-request" ? RefKind::pull_request : RefKind::branch,
                              name);
    int stopped = impl_->engine.stop_environment(ref);
    res.set_content(json{{"ref", name}, {"stopped", stopped}}.dump(), "application/json");
  });

  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"status", "ok"}}.dump(), "application/json");
  });
}

GatewayServer::~GatewayServer() { stop(); }

bool GatewayServer::start(const std::string& host, int port) {
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

void GatewayServer::stop() {
  if (impl_->thread.joinable()) {
    impl_->server.stop();
    impl_->thread.join();
  }
}

}  // namespace grove
