#include "patchr/time.hpp"

#include "patchr/error.hpp"

#include <cstdio>

namespace patchr {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

bool leap(std::int64_t y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

unsigned days_in_month(std::int64_t y, unsigned m) {
    static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && leap(y) ? 29 : kDays[m - 1];
}

[[noreturn]] void bad(std::string_view text, const char* why) {
    throw Error(ErrorCode::InvalidTimestamp, "invalid timestamp '" + std::string(text) + "': " + why);
}

}  // namespace

Timestamp Timestamp::now() {
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(
        std::chrono::system_clock::now().time_since_epoch());
    return Timestamp(secs.count());
}

Timestamp Timestamp::parse(std::string_view text) {
    std::size_t pos = 0;
    auto digits = [&](std::size_t n) -> std::int64_t {
        if (pos + n > text.size()) bad(text, "truncated");
        std::int64_t v = 0;
        for (std::size_t i = 0; i < n; ++i) {
            char c = text[pos + i];
            if (c < '0' || c > '9') bad(text, "expected digit");
            v = v * 10 + (c - '0');
        }
        pos += n;
        return v;
    };
    auto expect = [&](char c) {
        if (pos >= text.size() || text[pos] != c) bad(text, "unexpected character");
        ++pos;
    };

    std::int64_t year = digits(4);
    expect('-');
    auto month = static_cast<unsigned>(digits(2));
    expect('-');
    auto day = static_cast<unsigned>(digits(2));
    if (pos >= text.size() || (text[pos] != 'T' && text[pos] != 't')) bad(text, "expected 'T'");
    ++pos;
    std::int64_t hour = digits(2);
    expect(':');
    std::int64_t minute = digits(2);
    expect(':');
    std::int64_t second = digits(2);
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        std::size_t start = pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
        if (pos == start) bad(text, "empty fraction");
    }
    std::int64_t offset = 0;
    if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
        ++pos;
    } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        int sign = text[pos] == '-' ? -1 : 1;
        ++pos;
        std::int64_t oh = digits(2);
        expect(':');
        std::int64_t om = digits(2);
        if (oh > 23 || om > 59) bad(text, "offset out of range");
        offset = sign * (oh * 3600 + om * 60);
    } else {
        bad(text, "missing time zone (expected 'Z' or an offset)");
    }
    if (pos != text.size()) bad(text, "trailing characters");
    if (month < 1 || month > 12) bad(text, "month out of range");
    if (day < 1 || day > days_in_month(year, month)) bad(text, "day out of range");
    if (hour > 23 || minute > 59 || second > 59) bad(text, "time out of range");

    std::int64_t days = days_from_civil(year, month, day);
    return Timestamp(days * 86400 + hour * 3600 + minute * 60 + second - offset);
}

std::string Timestamp::to_rfc3339() const {
    std::int64_t days = seconds_ / 86400;
    std::int64_t rem = seconds_ % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<long long>(y), m, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem % 3600) / 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

}  // namespace patchr
