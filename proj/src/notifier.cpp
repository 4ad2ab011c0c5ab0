#include "grove/notifier.hpp"

#include <chrono>
#include <memory>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "grove/errors.hpp"
#include "grove/log.hpp"
#include "grove/util.hpp"

namespace grove::notify {

WebhookSink::WebhookSink(std::string url) : url_(std::move(url)) {}

void WebhookSink::notify(const Notification& n) {
  ++attempted_;
  nlohmann::json body = {
      {"text", n.text},           {"repository", n.repository}, {"ref", n.ref},
      {"run_url", n.run_url},     {"run_number", n.run_number}, {"message", n.message},
  };

  // Split scheme://host:port/path by hand; httplib wants host and path apart.
  std::string rest = url_;
  if (rest.rfind("http://", 0) == 0) rest = rest.substr(7);
  auto slash = rest.find('/');
  std::string host = slash == std::string::npos ? rest : rest.substr(0, slash);
  std::string path = slash == std::string::npos ? "/" : rest.substr(slash);

  httplib::Client client(host);
  client.set_connection_timeout(2, 0);
  client.set_read_timeout(2, 0);
  auto res = client.Post(path, body.dump(), "application/json");
  if (res && res->status >= 200 && res->status < 300) {
    ++delivered_;
  } else {
    log::warn("notify: webhook delivery failed for ", n.ref,
              res ? " (status " + std::to_string(res->status) + ")" : " (no response)");
  }
}

void LogSink::notify(const Notification& n) {
  log::warn("ALERT ", n.text);
}

RingSink::RingSink(std::size_t capacity) : capacity_(capacity) {}

void RingSink::notify(const Notification& n) {
  std::lock_guard lock(mu_);
  ring_.push_back(n);
  while (ring_.size() > capacity_) ring_.pop_front();
}

std::vector<Notification> RingSink::recent() const {
  std::lock_guard lock(mu_);
  return {ring_.rbegin(), ring_.rend()};
}

void Notifier::add_sink(std::shared_ptr<Sink> sink) { sinks_.push_back(std::move(sink)); }

Notification Notifier::notify_failure(const std::string& repository, const std::string& ref,
                                      std::uint64_t run_number, const std::string& run_url,
                                      const std::string& message) {
  if (repository.empty() || ref.empty() || run_url.empty() || run_number == 0) {
    throw RejectedError("notification identity fields must be set");
  }
  Notification n;
  n.repository = repository;
  n.ref = ref;
  n.run_number = run_number;
  n.run_url = run_url;
  n.message = message;
  n.delivered_at = util::format_iso8601(std::chrono::system_clock::now());
  std::ostringstream text;
  text << repository << " " << ref << " run #" << run_number << " failed: " << message << " ("
       << run_url << ")";
  n.text = text.str();

  for (auto& sink : sinks_) {
    try {
      sink->notify(n);
    } catch (const std::exception& e) {
      log::warn("notify: sink raised: ", e.what());
    }
  }
  ++emitted_;
  return n;
}

}  // namespace grove::notify
