#include "concore/clock.hpp"

#include <cctype>
#include <charconv>

#include <fmt/format.h>

#include "concore/error.hpp"

namespace concore {

using namespace std::chrono;

std::string format_iso8601(Timestamp t) {
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

namespace {

int read_int(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) throw ParseError("timestamp too short");
  int value = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      throw ParseError(fmt::format("bad timestamp '{}'", text));
    }
  }
  std::from_chars(text.data() + pos, text.data() + pos + len, value);
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) throw ParseError(fmt::format("bad timestamp '{}'", text));
}

}  // namespace

Timestamp parse_iso8601(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SSZ
  if (text.size() != 20) throw ParseError(fmt::format("bad timestamp '{}'", text));
  const int y = read_int(text, 0, 4);
  expect_char(text, 4, '-');
  const int mo = read_int(text, 5, 2);
  expect_char(text, 7, '-');
  const int d = read_int(text, 8, 2);
  expect_char(text, 10, 'T');
  const int h = read_int(text, 11, 2);
  expect_char(text, 13, ':');
  const int mi = read_int(text, 14, 2);
  expect_char(text, 16, ':');
  const int s = read_int(text, 17, 2);
  expect_char(text, 19, 'Z');

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
    throw ParseError(fmt::format("bad timestamp '{}'", text));
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

Timestamp SystemClock::now() { return floor<seconds>(system_clock::now()); }

Timestamp LogicalClock::now() {
  std::lock_guard lock(mu_);
  const Timestamp t = next_;
  next_ += step_;
  return t;
}

Timestamp default_epoch() { return sys_days{year{2025} / January / 1}; }

IdSource::IdSource(std::optional<std::uint64_t> seed)
    : rng_(seed ? *seed : std::random_device{}()) {}

std::string IdSource::next(std::string_view prefix) {
  std::lock_guard lock(mu_);
  return fmt::format("{}-{:016x}", prefix, rng_());
}

}  // namespace concore
