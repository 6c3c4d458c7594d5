#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace debatebench {

std::string trim(std::string_view s);
std::vector<std::string> split_lines(std::string_view text);

/// FNV-1a 64-bit hash, used for content digests and scripted-backend
/// fingerprints. Stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

/// Formats a time point as ISO-8601 UTC with second resolution
/// ("2024-06-14T00:00:00Z").
std::string iso8601_utc(std::chrono::system_clock::time_point tp);

/// Parses the format produced by iso8601_utc. Throws ConfigError on
/// malformed input.
std::chrono::system_clock::time_point parse_iso8601_utc(const std::string& s);

/// Time source for record timestamps. Runs that must produce byte-identical
/// stores (scripted backends) use a fixed clock.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::chrono::system_clock::time_point now() const = 0;
};

class SystemClock final : public Clock {
public:
    std::chrono::system_clock::time_point now() const override {
        return std::chrono::system_clock::now();
    }
};

class FixedClock final : public Clock {
public:
    explicit FixedClock(std::chrono::system_clock::time_point at) : at_(at) {}
    std::chrono::system_clock::time_point now() const override { return at_; }

private:
    std::chrono::system_clock::time_point at_;
};

}  // namespace debatebench
