#pragma once

#include "core/date.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace finvision::market {

// One trading day of OHLCV data. Series are kept sorted ascending by date
// with no duplicates; every bar satisfies low <= open,close <= high.
struct Bar {
    Date date;
    double open = 0;
    double high = 0;
    double low = 0;
    double close = 0;
    double volume = 0;
    std::optional<double> adjusted_close;
};

struct NewsItem {
    std::string ticker;        // upper-case normalized
    std::string published_at;  // raw ISO-8601 timestamp from the file
    Date published_date;       // date component of published_at
    std::string title;
    std::string body;          // may be empty
    std::string source;
};

// Loads `date,open,high,low,close,volume[,adjusted_close]` CSV. Rows may be in
// any order; the result is sorted ascending. Malformed rows, duplicate dates
// and OHLC violations raise Error::data naming the offending line.
std::vector<Bar> load_bars(const std::filesystem::path& path);

// Swaps each close for its adjusted close where present. Used only for
// dataset-reconciliation runs; charts and the pipeline default to raw closes.
void apply_adjusted_closes(std::vector<Bar>& bars);

// Loads the JSON-lines news file and keeps items for `ticker` published on
// `date`. File order is preserved. Unknown keys are ignored.
std::vector<NewsItem> load_news(const std::filesystem::path& path, std::string_view ticker,
                                Date date);

// Bar dates within [start, end], ascending. Empty result is fine.
std::vector<Date> trading_days(std::span<const Bar> bars, Date start, Date end);

// Index of the bar with exactly this date, if any.
std::optional<std::size_t> bar_index(std::span<const Bar> bars, Date date);

} // namespace finvision::market
