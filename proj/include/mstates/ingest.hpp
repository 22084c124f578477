#pragma once

// Daily quote ingestion: per-ticker CSV files, a union trading calendar,
// and the gap filter that decides which tickers enter the universe.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mstates/date.hpp"

namespace mstates {

struct QuotePoint {
    Date date;
    double adjusted_close = 0.0;
};

struct RawQuoteSeries {
    std::string ticker;
    std::vector<QuotePoint> points;  // strictly increasing dates, positive prices
    std::vector<Date> unquoted_dates;  // rows present in the file with an unusable price
    std::vector<std::string> diagnostics;
};

struct TradingCalendar {
    std::vector<Date> dates;

    std::size_t size() const { return dates.size(); }
    /// Index of `d` in the calendar, or -1.
    std::ptrdiff_t index_of(Date d) const;
};

/// One row of the aligned grid: a price per calendar day plus whether that
/// day carried an actual quote. Unquoted cells hold 0.
struct PriceRow {
    std::vector<double> price;
    std::vector<bool> quoted;
};

struct Exclusion {
    std::string ticker;
    std::string reason;
};

struct PriceTable {
    TradingCalendar calendar;
    std::vector<std::string> tickers;  // sorted lexicographically
    std::string index_ticker;
    std::vector<PriceRow> rows;  // one per ticker
    PriceRow index_row;
    std::vector<Exclusion> excluded;

    std::size_t n_tickers() const { return tickers.size(); }
};

enum class CsvSchema { yahoo };

/// Reads Date / Adj Close columns. The ticker id is the filename stem.
/// Throws DataError on a missing file, missing column, non-monotone dates
/// or a non-positive price. Rows whose price is not a number ("null", empty)
/// are skipped and recorded in `unquoted_dates`.
RawQuoteSeries load_quotes(const std::filesystem::path& path, CsvSchema schema = CsvSchema::yahoo);

/// Loads every *.csv under `dir`, sorted by ticker.
std::vector<RawQuoteSeries> load_quote_directory(const std::filesystem::path& dir);

/// Union of all quoted dates clipped to [horizon.start, horizon.end].
TradingCalendar build_calendar(const std::vector<RawQuoteSeries>& series, DateRange horizon);

/// Longest run of consecutive unquoted days strictly inside the row's
/// first..last quoted cell.
std::size_t max_interior_gap(const std::vector<bool>& quoted);

inline constexpr std::size_t kMaxUnquotedRun = 2;

/// Keeps tickers quoted on the first and last calendar day whose interior
/// unquoted runs never exceed kMaxUnquotedRun. The index must be quoted on
/// every calendar day. Throws DataError when nothing survives or the index
/// is missing/filtered.
PriceTable filter_universe(const std::vector<RawQuoteSeries>& series, const TradingCalendar& calendar,
                           const std::string& index_ticker);

/// Inverse view of a table: one RawQuoteSeries per retained row plus the index.
std::vector<RawQuoteSeries> to_series(const PriceTable& table);

nlohmann::json ingest_manifest(const PriceTable& table);

}  // namespace mstates
