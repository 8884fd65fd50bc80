#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <random>
#include <string>
#include <string_view>

namespace remi {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// ISO-8601 UTC with millisecond precision, e.g. "2024-05-01T08:30:00.000Z".
std::string format_timestamp(Timestamp t);
Timestamp parse_timestamp(std::string_view text);

// "YYYY-MM-DD" in UTC.
std::string format_date(Timestamp t);
int year_of(Timestamp t);

class Clock {
public:
    virtual ~Clock() = default;
    virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
public:
    Timestamp now() const override;
};

// Deterministic clock for tests and reproducible exports.
class ManualClock final : public Clock {
public:
    explicit ManualClock(Timestamp start) : now_(start.time_since_epoch().count()) {}

    Timestamp now() const override { return Timestamp(std::chrono::milliseconds(now_.load())); }
    void set(Timestamp t) { now_ = t.time_since_epoch().count(); }
    void advance(std::chrono::milliseconds d) { now_ += d.count(); }

private:
    std::atomic<std::int64_t> now_;
};

class IdGenerator {
public:
    virtual ~IdGenerator() = default;
    virtual std::string next(std::string_view prefix) = 0;
};

// prefix + "_" + 16 random hex digits.
class RandomIdGenerator final : public IdGenerator {
public:
    RandomIdGenerator();
    std::string next(std::string_view prefix) override;

private:
    std::mutex mutex_;
    std::mt19937_64 rng_;
};

}  // namespace remi
