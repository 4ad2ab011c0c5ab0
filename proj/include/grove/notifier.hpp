#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace grove::notify {

// One failure alert. `run_url` points at the portal page for the run so the
// receiving channel can link straight to the report.
struct Notification {
  std::string repository;
  std::string ref;
  std::uint64_t run_number = 0;
  std::string run_url;
  std::string message;         // short human summary ("stage 'build' failed", ...)
  std::string text;            // full rendered line, what a chat channel would show
  std::string delivered_at;    // ISO-8601, wall clock at emit time
};

// Where alerts go. Implementations must not throw out of notify(); a sink
// that cannot deliver logs and swallows so the other sinks still run.
class Sink {
 public:
  virtual ~Sink() = default;
  virtual void notify(const Notification& n) = 0;
};

// POSTs the alert as JSON to a webhook URL (chat-channel integration).
// Keys: text, repository, ref, run_url, run_number, message.
class WebhookSink final : public Sink {
 public:
  explicit WebhookSink(std::string url);
  void notify(const Notification& n) override;

  // Requests attempted / delivered with 2xx. For tests and /healthz-ish
  // introspection; no retry bookkeeping because delivery is at-most-once.
  std::uint64_t attempted() const { return attempted_; }
  std::uint64_t delivered() const { return delivered_; }

 private:
  std::string url_;
  std::uint64_t attempted_ = 0;
  std::uint64_t delivered_ = 0;
};

// Writes one warn-level log line per alert.
class LogSink final : public Sink {
 public:
  void notify(const Notification& n) override;
};

// Keeps the most recent alerts in memory for the portal's /notifications
// view. Oldest entries fall off once `capacity` is reached.
class RingSink final : public Sink {
 public:
  explicit RingSink(std::size_t capacity = 256);
  void notify(const Notification& n) override;
  std::vector<Notification> recent() const;  // newest first

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::deque<Notification> ring_;
};

// Fans a failure out to every configured sink. Exactly one notification per
// failed run; aborted and successful runs are silent.
class Notifier {
 public:
  void add_sink(std::shared_ptr<Sink> sink);

  // Renders `text` from the parts and delivers to all sinks. The four
  // identity fields must be set (non-empty strings, run_number > 0) or the
  // call is rejected before anything is sent. Sink errors are logged and do
  // not stop later sinks.
  Notification notify_failure(const std::string& repository, const std::string& ref,
                              std::uint64_t run_number, const std::string& run_url,
                              const std::string& message);

  std::uint64_t emitted() const { return emitted_; }

 private:
  std::vector<std::shared_ptr<Sink>> sinks_;
  std::uint64_t emitted_ = 0;
};

}  // namespace grove::notify
