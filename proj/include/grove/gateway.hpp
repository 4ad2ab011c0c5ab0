#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_set>

#include <nlohmann/json_fwd.hpp>

#include "grove/engine.hpp"
#include "grove/event.hpp"

namespace grove {

// normalize_event's verdict: either a routable event or a reasoned shrug.
// Malformed payloads (recognized event name, required field missing) throw
// RejectedError instead — that distinction maps to 400 vs 202 at the edge.
struct Normalization {
  bool is_event = false;
  EventKind kind = EventKind::branch_pushed;
  RefKey ref;
  std::optional<std::string> commit_id;
  std::string ignored_reason;  // set when !is_event
};

// Pure routing table from (event name, payload) to a normalized event.
// Recognized names: push, delete, pull_request, ping.
Normalization normalize_event(const std::string& event_name, const nlohmann::json& payload);

// What a hook handler tells the HTTP layer to answer.
struct HookResponse {
  int status = 200;  // 200 accepted, 202 ignored, 400 malformed, 403 auth
  std::string body;  // JSON text
};

// The webhook ingress, transport-free. Authenticates the token, drops
// replayed delivery ids, normalizes the payload, and hands accepted events
// to the sink (the engine, in production).
class GatewayCore {
 public:
  using EventSink = std::function<ScheduleResult(const PipelineEvent&)>;

  GatewayCore(std::string hook_token, EventSink sink, std::size_t dedup_window = 1000);

  // POST /hooks/multibranch/invoke?token=… — the push hook. Bodies without
  // a `ref` field are not push payloads and are acknowledged-and-ignored.
  HookResponse handle_push_hook(const std::string& token, const std::string& body,
                                const std::optional<std::string>& delivery_id);

  // POST /hooks/lifecycle/invoke?token=… — deletions and pull-request
  // lifecycle, dispatched by the X-GitHub-Event header.
  HookResponse handle_lifecycle_hook(const std::string& token,
                                     const std::optional<std::string>& event_name,
                                     const std::string& body,
                                     const std::optional<std::string>& delivery_id);

  // Exactly one enqueue per accepted request; rejected/ignored enqueue none.
  std::uint64_t enqueued_count() const;

 private:
  bool token_ok(const std::string& token) const;
  bool already_seen(const std::string& delivery_id);
  HookResponse dispatch(const std::string& event_name, const std::string& body,
                        const std::optional<std::string>& delivery_id);

  std::string hook_token_;
  EventSink sink_;
  std::size_t dedup_window_;

  mutable std::mutex mu_;
  std::deque<std::string> seen_order_;
  std::unordered_set<std::string> seen_;
  std::uint64_t enqueued_ = 0;
};

// HTTP front for GatewayCore plus the token-guarded manual-teardown route
// the stop-env command uses (the portal stays read-only, so the mutating
// admin route lives here with the other authenticated writes).
class GatewayServer {
 public:
  GatewayServer(GatewayCore& core, Engine& engine, std::string hook_token);
  ~GatewayServer();

  // Binds and serves on a background thread. port 0 picks a free port.
  bool start(const std::string& host, int port);
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace grove
