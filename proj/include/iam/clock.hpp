#pragma once

#include <atomic>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace iam {

// All persisted instants are UTC with one-second resolution.
using Instant = std::chrono::sys_seconds;

// RFC 3339 UTC, e.g. "2026-03-01T09:30:00Z".
std::string format_rfc3339(Instant t);
std::optional<Instant> parse_rfc3339(std::string_view text);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Instant now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Instant now() const override {
    return std::chrono::time_point_cast<std::chrono::seconds>(
        std::chrono::system_clock::now());
  }
};

// Logical clock for tests and replayable runs. Safe to advance from one
// thread while another reads it.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Instant start) : seconds_(start.time_since_epoch().count()) {}

  Instant now() const override {
    return Instant{std::chrono::seconds{seconds_.load()}};
  }
  void advance(std::chrono::seconds by) { seconds_ += by.count(); }
  void set(Instant t) { seconds_ = t.time_since_epoch().count(); }

 private:
  std::atomic<std::int64_t> seconds_;
};

}  // namespace iam
