#include "mstates/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mstates/error.hpp"

namespace mstates {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_price(std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

std::ptrdiff_t TradingCalendar::index_of(Date d) const {
    auto it = std::lower_bound(dates.begin(), dates.end(), d);
    if (it == dates.end() || *it != d) return -1;
    return it - dates.begin();
}

RawQuoteSeries load_quotes(const std::filesystem::path& path, CsvSchema schema) {
    (void)schema;  // only the yahoo export layout exists today
    std::ifstream in(path);
    if (!in) throw DataError("cannot open quote file " + path.string());

    RawQuoteSeries series;
    series.ticker = path.stem().string();
    const std::string where = path.filename().string();

    std::string line;
    if (!std::getline(in, line)) throw DataError(where + ": empty file");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
    auto header = split_csv(line);
    std::ptrdiff_t date_col = -1, price_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "Date") date_col = static_cast<std::ptrdiff_t>(i);
        if (header[i] == "Adj Close") price_col = static_cast<std::ptrdiff_t>(i);
    }
    if (date_col < 0) throw DataError(where + ": missing required column 'Date'");
    if (price_col < 0) throw DataError(where + ": missing required column 'Adj Close'");

    std::optional<Date> last;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split_csv(line);
        const auto needed = static_cast<std::size_t>(std::max(date_col, price_col));
        if (cells.size() <= needed) {
            throw DataError(where + ":" + std::to_string(lineno) + ": too few columns");
        }
        Date date = parse_date_or_throw(cells[date_col], where + ":" + std::to_string(lineno));
        if (last && date <= *last) {
            throw DataError(where + ":" + std::to_string(lineno) + ": non-monotone dates");
        }
        last = date;
        auto price = parse_price(cells[price_col]);
        if (!price) {
            series.unquoted_dates.push_back(date);
            series.diagnostics.push_back("line " + std::to_string(lineno) + ": unparseable price '" +
                                         std::string(cells[price_col]) + "', day treated as unquoted");
            continue;
        }
        if (*price <= 0.0) {
            throw DataError(where + ":" + std::to_string(lineno) + ": non-positive price");
        }
        series.points.push_back({date, *price});
    }
    return series;
}

std::vector<RawQuoteSeries> load_quote_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw DataError("data directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<RawQuoteSeries> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(load_quotes(f));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.ticker < b.ticker; });
    return out;
}

TradingCalendar build_calendar(const std::vector<RawQuoteSeries>& series, DateRange horizon) {
    if (series.empty()) throw DataError("build_calendar: no series given");
    if (!(horizon.start < horizon.end)) throw DataError("build_calendar: horizon start must precede end");
    std::set<Date> all;
    for (const auto& s : series) {
        for (const auto& p : s.points) {
            if (p.date >= horizon.start && p.date <= horizon.end) all.insert(p.date);
        }
    }
    if (all.empty()) throw DataError("build_calendar: no quotes inside the horizon");
    return TradingCalendar{{all.begin(), all.end()}};
}

std::size_t max_interior_gap(const std::vector<bool>& quoted) {
    auto first = std::find(quoted.begin(), quoted.end(), true);
    if (first == quoted.end()) return 0;
    auto last = std::find(quoted.rbegin(), quoted.rend(), true).base();
    std::size_t best = 0, run = 0;
    for (auto it = first; it != last; ++it) {
        run = *it ? 0 : run + 1;
        best = std::max(best, run);
    }
    return best;
}

namespace {

PriceRow materialize(const RawQuoteSeries& s, const TradingCalendar& cal) {
    PriceRow row{std::vector<double>(cal.size(), 0.0), std::vector<bool>(cal.size(), false)};
    for (const auto& p : s.points) {
        auto idx = cal.index_of(p.date);
        if (idx < 0) continue;
        row.price[idx] = p.adjusted_close;
        row.quoted[idx] = true;
    }
    return row;
}

std::optional<std::string> gap_violation(const PriceRow& row, const TradingCalendar& cal) {
    const auto& q = row.quoted;
    if (std::find(q.begin(), q.end(), true) == q.end()) return "no quotes inside the horizon";
    if (!q.front()) return "not quoted on first calendar day " + cal.dates.front().iso();
    if (!q.back()) return "not quoted on last calendar day " + cal.dates.back().iso();
    std::size_t run = 0;
    for (std::size_t t = 0; t < q.size(); ++t) {
        run = q[t] ? 0 : run + 1;
        if (run > kMaxUnquotedRun) {
            return "more than " + std::to_string(kMaxUnquotedRun) + " consecutive unquoted days ending " +
                   cal.dates[t].iso();
        }
    }
    return std::nullopt;
}

}  // namespace

PriceTable filter_universe(const std::vector<RawQuoteSeries>& series, const TradingCalendar& calendar,
                           const std::string& index_ticker) {
    if (calendar.dates.empty()) throw DataError("filter_universe: empty calendar");
    std::vector<const RawQuoteSeries*> sorted;
    sorted.reserve(series.size());
    for (const auto& s : series) sorted.push_back(&s);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->ticker < b->ticker; });

    PriceTable table;
    table.calendar = calendar;
    table.index_ticker = index_ticker;
    bool index_seen = false;
    for (const auto* s : sorted) {
        PriceRow row = materialize(*s, calendar);
        if (s->ticker == index_ticker) {
            index_seen = true;
            auto missing = std::find(row.quoted.begin(), row.quoted.end(), false);
            if (missing != row.quoted.end()) {
                throw DataError("index ticker " + index_ticker + " filtered out: no quote on " +
                                calendar.dates[missing - row.quoted.begin()].iso());
            }
            table.index_row = std::move(row);
            continue;
        }
        if (auto why = gap_violation(row, calendar)) {
            table.excluded.push_back({s->ticker, *why});
            continue;
        }
        table.tickers.push_back(s->ticker);
        table.rows.push_back(std::move(row));
    }
    if (!index_seen) throw DataError("index ticker " + index_ticker + " not found among the inputs");
    if (table.tickers.empty()) throw DataError("filter_universe: no ticker survives the gap filter");
    return table;
}

std::vector<RawQuoteSeries> to_series(const PriceTable& table) {
    auto convert = [&](const std::string& ticker, const PriceRow& row) {
        RawQuoteSeries s;
        s.ticker = ticker;
        for (std::size_t t = 0; t < row.quoted.size(); ++t) {
            if (row.quoted[t]) s.points.push_back({table.calendar.dates[t], row.price[t]});
        }
        return s;
    };
    std::vector<RawQuoteSeries> out;
    for (std::size_t i = 0; i < table.tickers.size(); ++i) out.push_back(convert(table.tickers[i], table.rows[i]));
    out.push_back(convert(table.index_ticker, table.index_row));
    return out;
}

nlohmann::json ingest_manifest(const PriceTable& table) {
    nlohmann::json j;
    std::vector<std::string> dates;
    dates.reserve(table.calendar.size());
    for (auto d : table.calendar.dates) dates.push_back(d.iso());
    j["calendar"] = dates;
    j["n_days"] = table.calendar.size();
    j["index_ticker"] = table.index_ticker;
    j["tickers"] = table.tickers;
    j["n_tickers"] = table.tickers.size();
    auto ex = nlohmann::json::array();
    for (const auto& e : table.excluded) ex.push_back({{"ticker", e.ticker}, {"reason", e.reason}});
    j["excluded"] = ex;
    return j;
}

}  // namespace mstates
