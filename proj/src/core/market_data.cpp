#include "core/market_data.hpp"

#include "core/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace finvision::market {
namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_number(const std::string& s, const char* what, int line_no) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error::data("bars CSV line " + std::to_string(line_no) + ": bad " +
                          std::string(what) + " value '" + s + "'");
    }
    return v;
}

std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

} // namespace

std::vector<Bar> load_bars(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error::data("cannot open bars file: " + path.string());

    std::string header;
    if (!std::getline(in, header)) throw Error::data("empty bars file: " + path.string());
    if (!header.empty() && header.back() == '\r') header.pop_back();

    auto cols = split_csv_line(header);
    const std::vector<std::string> required = {"date", "open", "high", "low", "close", "volume"};
    bool header_ok = cols.size() == 6 || (cols.size() == 7 && cols[6] == "adjusted_close");
    for (std::size_t i = 0; header_ok && i < required.size(); ++i) {
        if (cols[i] != required[i]) header_ok = false;
    }
    if (!header_ok) {
        throw Error::data("bars CSV header must be "
                          "'date,open,high,low,close,volume[,adjusted_close]' in " +
                          path.string());
    }
    const bool has_adjusted = cols.size() == 7;

    std::vector<Bar> bars;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;

        auto fields = split_csv_line(line);
        if (fields.size() != cols.size()) {
            throw Error::data("bars CSV line " + std::to_string(line_no) + ": expected " +
                              std::to_string(cols.size()) + " fields, got " +
                              std::to_string(fields.size()));
        }

        Bar bar;
        if (!Date::try_parse(fields[0], bar.date)) {
            throw Error::data("bars CSV line " + std::to_string(line_no) + ": bad date '" +
                              fields[0] + "'");
        }
        bar.open = parse_number(fields[1], "open", line_no);
        bar.high = parse_number(fields[2], "high", line_no);
        bar.low = parse_number(fields[3], "low", line_no);
        bar.close = parse_number(fields[4], "close", line_no);
        bar.volume = parse_number(fields[5], "volume", line_no);
        if (has_adjusted && !fields[6].empty()) {
            bar.adjusted_close = parse_number(fields[6], "adjusted_close", line_no);
        }

        if (bar.open <= 0 || bar.high <= 0 || bar.low <= 0 || bar.close <= 0) {
            throw Error::data("bars CSV line " + std::to_string(line_no) +
                              ": prices must be positive");
        }
        if (bar.volume < 0) {
            throw Error::data("bars CSV line " + std::to_string(line_no) +
                              ": volume must be non-negative");
        }
        if (bar.adjusted_close && *bar.adjusted_close <= 0) {
            throw Error::data("bars CSV line " + std::to_string(line_no) +
                              ": adjusted_close must be positive");
        }
        if (bar.low > bar.high || bar.open < bar.low || bar.open > bar.high ||
            bar.close < bar.low || bar.close > bar.high) {
            throw Error::data("bars CSV line " + std::to_string(line_no) +
                              ": OHLC violation (low <= open,close <= high) on " +
                              bar.date.to_string());
        }
        bars.push_back(bar);
    }
    if (bars.empty()) throw Error::data("bars file has no data rows: " + path.string());

    std::stable_sort(bars.begin(), bars.end(),
                     [](const Bar& a, const Bar& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < bars.size(); ++i) {
        if (bars[i].date == bars[i - 1].date) {
            throw Error::data("duplicate bar date " + bars[i].date.to_string() + " in " +
                              path.string());
        }
    }
    return bars;
}

void apply_adjusted_closes(std::vector<Bar>& bars) {
    for (auto& bar : bars) {
        if (bar.adjusted_close) bar.close = *bar.adjusted_close;
    }
}

std::vector<NewsItem> load_news(const std::filesystem::path& path, std::string_view ticker,
                                Date date) {
    std::ifstream in(path);
    if (!in) throw Error::data("cannot open news file: " + path.string());

    const std::string want_ticker = upper(ticker);
    std::vector<NewsItem> items;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;

        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            throw Error::data("news JSONL line " + std::to_string(line_no) + ": malformed JSON");
        }
        for (const char* key : {"ticker", "published_at", "title"}) {
            if (!obj.contains(key) || !obj[key].is_string()) {
                throw Error::data("news JSONL line " + std::to_string(line_no) +
                                  ": missing string field '" + key + "'");
            }
        }

        NewsItem item;
        item.ticker = upper(obj["ticker"].get<std::string>());
        item.published_at = obj["published_at"].get<std::string>();
        item.title = obj["title"].get<std::string>();
        item.body = obj.value("body", std::string{});
        item.source = obj.value("source", std::string{});

        if (item.ticker.empty()) {
            throw Error::data("news JSONL line " + std::to_string(line_no) + ": empty ticker");
        }
        if (item.title.empty()) {
            throw Error::data("news JSONL line " + std::to_string(line_no) + ": empty title");
        }
        // Date component of an ISO-8601 timestamp ("2023-06-01T09:30:00Z" or a
        // plain date).
        std::string_view ts = item.published_at;
        std::string_view date_part = ts.substr(0, std::min<std::size_t>(ts.size(), 10));
        if (!Date::try_parse(date_part, item.published_date)) {
            throw Error::data("news JSONL line " + std::to_string(line_no) +
                              ": bad published_at timestamp '" + item.published_at + "'");
        }

        if (item.ticker == want_ticker && item.published_date == date) {
            items.push_back(std::move(item));
        }
    }
    return items;
}

std::vector<Date> trading_days(std::span<const Bar> bars, Date start, Date end) {
    if (start > end) throw Error::invalid("trading_days: start after end");
    std::vector<Date> out;
    for (const auto& bar : bars) {
        if (bar.date >= start && bar.date <= end) out.push_back(bar.date);
    }
    return out;
}

std::optional<std::size_t> bar_index(std::span<const Bar> bars, Date date) {
    auto it = std::lower_bound(bars.begin(), bars.end(), date,
                               [](const Bar& b, Date d) { return b.date < d; });
    if (it != bars.end() && it->date == date) {
        return static_cast<std::size_t>(it - bars.begin());
    }
    return std::nullopt;
}

} // namespace finvision::market
