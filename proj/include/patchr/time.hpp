#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace patchr {

// UTC instant with second precision.
class Timestamp {
public:
    constexpr Timestamp() = default;
    constexpr explicit Timestamp(std::int64_t unix_seconds) : seconds_(unix_seconds) {}

    static Timestamp now();
    // RFC 3339 / xsd:dateTime. Offsets are folded into UTC, fractional
    // seconds are truncated. Throws Error(InvalidTimestamp).
    static Timestamp parse(std::string_view text);

    constexpr std::int64_t unix_seconds() const noexcept { return seconds_; }
    // "YYYY-MM-DDTHH:MM:SSZ"
    std::string to_rfc3339() const;

    constexpr auto operator<=>(const Timestamp&) const = default;

private:
    std::int64_t seconds_ = 0;
};

}  // namespace patchr
