#include "remi/core/clock.hpp"

#include "remi/core/error.hpp"

#include <cstdio>
#include <ctime>

namespace remi {

namespace {

std::tm to_utc_tm(Timestamp t) {
    auto secs = std::chrono::floor<std::chrono::seconds>(t);
    std::time_t tt = static_cast<std::time_t>(secs.time_since_epoch().count());
    std::tm tm{};
    gmtime_r(&tt, &tm);
    return tm;
}

}  // namespace

std::string format_timestamp(Timestamp t) {
    std::tm tm = to_utc_tm(t);
    auto ms = t.time_since_epoch().count() % 1000;
    if (ms < 0) ms += 1000;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buf;
}

Timestamp parse_timestamp(std::string_view text) {
    std::tm tm{};
    int ms = 0;
    std::string s(text);
    int n = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3dZ", &tm.tm_year, &tm.tm_mon, &tm.tm_mday,
                        &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &ms);
    if (n < 6) throw Error(ErrorCode::validation, "invalid timestamp: " + s);
    if (n < 7) ms = 0;
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    std::time_t secs = timegm(&tm);
    return Timestamp(std::chrono::milliseconds(static_cast<std::int64_t>(secs) * 1000 + ms));
}

std::string format_date(Timestamp t) {
    std::tm tm = to_utc_tm(t);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday);
    return buf;
}

int year_of(Timestamp t) { return to_utc_tm(t).tm_year + 1900; }

Timestamp SystemClock::now() const {
    return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

RandomIdGenerator::RandomIdGenerator() : rng_(std::random_device{}()) {}

std::string RandomIdGenerator::next(std::string_view prefix) {
    std::uint64_t v;
    {
        std::lock_guard lock(mutex_);
        v = rng_();
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    std::string id(prefix);
    id += '_';
    id += buf;
    return id;
}

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::not_found: return "not_found";
        case ErrorCode::conflict: return "conflict";
        case ErrorCode::precondition: return "precondition_failed";
        case ErrorCode::validation: return "validation_error";
        case ErrorCode::unauthorized: return "unauthorized";
        case ErrorCode::forbidden: return "forbidden";
        case ErrorCode::provider: return "provider_error";
        case ErrorCode::io: return "io_error";
    }
    return "unknown";
}

}  // namespace remi
