#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mstates {

/// Calendar day, stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days d) : days_(d.time_since_epoch().count()) {}
    static constexpr Date from_days(std::int32_t days) {
        Date d;
        d.days_ = days;
        return d;
    }
    static Date ymd(int y, unsigned m, unsigned d);

    constexpr std::int32_t days_since_epoch() const { return days_; }
    std::chrono::sys_days sys_days() const {
        return std::chrono::sys_days{std::chrono::days{days_}};
    }
    std::string iso() const;

    constexpr auto operator<=>(const Date&) const = default;

private:
    std::int32_t days_ = 0;
};

/// Parses YYYY-MM-DD. Returns nullopt on malformed or impossible dates.
std::optional<Date> parse_date(std::string_view text);

/// Like parse_date but throws DataError naming `what` on failure.
Date parse_date_or_throw(std::string_view text, std::string_view what);

/// Half-open or closed range is up to the caller; both ends are plain days.
struct DateRange {
    Date start;
    Date end;
};

}  // namespace mstates
