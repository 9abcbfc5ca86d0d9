#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>

namespace concore {

using Timestamp = std::chrono::sys_seconds;

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_iso8601(Timestamp t);
Timestamp parse_iso8601(std::string_view text);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() override;
};

/// Deterministic clock: start, start + step, start + 2*step, ...
class LogicalClock final : public Clock {
 public:
  explicit LogicalClock(Timestamp start, std::chrono::seconds step = std::chrono::seconds{60})
      : next_(start), step_(step) {}

  Timestamp now() override;

 private:
  std::mutex mu_;
  Timestamp next_;
  std::chrono::seconds step_;
};

/// Fixed epoch used by seeded runs: 2025-01-01T00:00:00Z.
Timestamp default_epoch();

/// Opaque id generator. Seeded sources yield the same id sequence on every run.
class IdSource {
 public:
  explicit IdSource(std::optional<std::uint64_t> seed = std::nullopt);

  std::string next(std::string_view prefix);

 private:
  std::mutex mu_;
  std::mt19937_64 rng_;
};

}  // namespace concore
