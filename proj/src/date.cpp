#include "mstates/date.hpp"

#include <charconv>
#include <cstdio>

#include "mstates/error.hpp"

namespace mstates {

Date Date::ymd(int y, unsigned m, unsigned d) {
    std::chrono::year_month_day v{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!v.ok()) throw DataError("invalid calendar date");
    return Date{std::chrono::sys_days{v}};
}

std::string Date::iso() const {
    std::chrono::year_month_day v{sys_days()};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(v.year()), unsigned(v.month()),
                  unsigned(v.day()));
    return buf;
}

std::optional<Date> parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    auto num = [&](std::size_t pos, std::size_t len, auto& out) {
        auto [p, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
        return ec == std::errc{} && p == text.data() + pos + len;
    };
    if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return std::nullopt;
    std::chrono::year_month_day v{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!v.ok()) return std::nullopt;
    return Date{std::chrono::sys_days{v}};
}

Date parse_date_or_throw(std::string_view text, std::string_view what) {
    auto d = parse_date(text);
    if (!d) throw DataError(std::string(what) + ": malformed date '" + std::string(text) + "'");
    return *d;
}

}  // namespace mstates
