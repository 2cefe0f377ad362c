#include "core/errors.hpp"
#include "core/market_data.hpp"

#include "support/tmpdir.hpp"

#include <doctest.h>

#include <fstream>
#include <set>

using namespace finvision;
using test_support::TempDir;

namespace {

std::filesystem::path write(const TempDir& dir, const std::string& name,
                            const std::string& content) {
    auto path = dir / name;
    std::ofstream out(path);
    out << content;
    return path;
}

} // namespace

TEST_SUITE_BEGIN("market_data");

TEST_CASE("loads a single bar") {
    TempDir dir("bars");
    auto path = write(dir, "bars.csv",
                      "date,open,high,low,close,volume\n"
                      "2023-06-01,180.0,182.0,179.0,181.0,1000000\n");
    auto bars = market::load_bars(path);
    REQUIRE(bars.size() == 1);
    CHECK(bars[0].date.to_string() == "2023-06-01");
    CHECK(bars[0].close == 181.0);
    CHECK(bars[0].volume == 1000000.0);
    CHECK_FALSE(bars[0].adjusted_close.has_value());
}

TEST_CASE("sorts rows by date") {
    TempDir dir("bars");
    auto path = write(dir, "bars.csv",
                      "date,open,high,low,close,volume\n"
                      "2023-06-02,180,182,179,181,100\n"
                      "2023-06-01,170,172,169,171,100\n");
    auto bars = market::load_bars(path);
    REQUIRE(bars.size() == 2);
    CHECK(bars[0].date.to_string() == "2023-06-01");
    CHECK(bars[1].date.to_string() == "2023-06-02");
}

TEST_CASE("rejects OHLC violations naming the line") {
    TempDir dir("bars");
    auto path = write(dir, "bars.csv",
                      "date,open,high,low,close,volume\n"
                      "2023-06-01,180,182,179,181,100\n"
                      "2023-06-02,183,182,185,184,100\n");
    try {
        market::load_bars(path);
        FAIL("expected an OHLC violation");
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::data);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        CHECK(std::string(e.what()).find("OHLC") != std::string::npos);
    }
}

TEST_CASE("rejects duplicate dates, empty files and malformed rows") {
    TempDir dir("bars");
    CHECK_THROWS_AS(market::load_bars(dir / "missing.csv"), Error);

    auto empty = write(dir, "empty.csv", "date,open,high,low,close,volume\n");
    CHECK_THROWS_AS(market::load_bars(empty), Error);

    auto dup = write(dir, "dup.csv",
                     "date,open,high,low,close,volume\n"
                     "2023-06-01,180,182,179,181,100\n"
                     "2023-06-01,180,182,179,181,100\n");
    CHECK_THROWS_AS(market::load_bars(dup), Error);

    auto bad = write(dir, "bad.csv",
                     "date,open,high,low,close,volume\n"
                     "2023-06-01,180,182,abc,181,100\n");
    try {
        market::load_bars(bad);
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    auto bad_header = write(dir, "hdr.csv", "time,open,high,low,close,volume\n");
    CHECK_THROWS_AS(market::load_bars(bad_header), Error);
}

TEST_CASE("reads the optional adjusted_close column") {
    TempDir dir("bars");
    auto path = write(dir, "bars.csv",
                      "date,open,high,low,close,volume,adjusted_close\n"
                      "2023-06-01,180,182,179,181,100,180.5\n"
                      "2023-06-02,181,183,180,182,100,\n");
    auto bars = market::load_bars(path);
    REQUIRE(bars.size() == 2);
    CHECK(bars[0].adjusted_close == 180.5);
    CHECK_FALSE(bars[1].adjusted_close.has_value());

    market::apply_adjusted_closes(bars);
    CHECK(bars[0].close == 180.5);
    CHECK(bars[1].close == 182.0);
}

TEST_CASE("news filter keeps only the requested ticker and date") {
    TempDir dir("news");
    std::string lines =
        R"({"ticker":"AAPL","published_at":"2023-06-01T09:30:00Z","title":"a1","body":"b","source":"s"})" "\n"
        R"({"ticker":"aapl","published_at":"2023-06-01T15:00:00Z","title":"a2","body":"","source":"s"})" "\n"
        R"({"ticker":"AAPL","published_at":"2023-06-02T09:00:00Z","title":"a3","body":"b","source":"s"})" "\n"
        R"({"ticker":"MSFT","published_at":"2023-06-01T09:00:00Z","title":"m1","body":"b","source":"s"})" "\n"
        R"({"ticker":"AAPL","published_at":"2023-06-02T10:00:00Z","title":"a4","body":"b","source":"s","extra_key":42})" "\n";
    auto path = write(dir, "news.jsonl", lines);

    auto first = market::load_news(path, "AAPL", Date::parse("2023-06-01"));
    REQUIRE(first.size() == 2);  // case-insensitive ticker match, order preserved
    CHECK(first[0].title == "a1");
    CHECK(first[1].title == "a2");
    CHECK(first[1].body.empty());
    CHECK(first[0].ticker == "AAPL");

    auto second = market::load_news(path, "AAPL", Date::parse("2023-06-02"));
    CHECK(second.size() == 2);  // unknown keys ignored

    auto none = market::load_news(path, "AAPL", Date::parse("2023-06-05"));
    CHECK(none.empty());
}

TEST_CASE("news loader reports malformed lines") {
    TempDir dir("news");
    auto bad_json = write(dir, "bad.jsonl", "{\"ticker\":\"AAPL\"\n");
    try {
        market::load_news(bad_json, "AAPL", Date::parse("2023-06-01"));
        FAIL("expected malformed-line error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }

    auto no_title = write(
        dir, "no_title.jsonl",
        R"({"ticker":"AAPL","published_at":"2023-06-01T00:00:00Z","title":"","body":"x"})" "\n");
    CHECK_THROWS_AS(market::load_news(no_title, "AAPL", Date::parse("2023-06-01")), Error);
}

TEST_CASE("a testing-window-sized corpus loads cleanly") {
    // 4,886 items spread over the 145 trading days of a Jun-Dec window.
    TempDir dir("news");
    std::string lines;
    Date day = Date::parse("2023-06-01");
    std::vector<Date> days;
    while (days.size() < 145) {
        if (day.weekday() != 0 && day.weekday() != 6) days.push_back(day);
        day = day.add_days(1);
    }
    int total = 0;
    for (int i = 0; total < 4886; i = (i + 1) % 145) {
        lines += R"({"ticker":"AAPL","published_at":")" + days[i].to_string() +
                 R"(T12:00:00Z","title":"item )" + std::to_string(total) +
                 R"(","body":"text","source":"feed"})" "\n";
        ++total;
    }
    auto path = write(dir, "corpus.jsonl", lines);
    auto items = market::load_news(path, "AAPL", days[0]);
    CHECK(items.size() == 4886 / 145 + 1);  // first day gets the remainder item
}

TEST_CASE("trading_days filters inclusively and stays sorted") {
    std::vector<market::Bar> bars;
    for (int i = 0; i < 10; ++i) {
        market::Bar bar;
        bar.date = Date::parse("2023-06-01").add_days(i);
        bar.open = bar.high = bar.low = bar.close = 100;
        bars.push_back(bar);
    }
    auto days = market::trading_days(bars, Date::parse("2023-06-03"), Date::parse("2023-06-06"));
    REQUIRE(days.size() == 4);
    CHECK(days.front().to_string() == "2023-06-03");
    CHECK(days.back().to_string() == "2023-06-06");

    auto single = market::trading_days(bars, bars[2].date, bars[2].date);
    CHECK(single.size() == 1);

    auto none = market::trading_days(bars, Date::parse("2024-01-01"), Date::parse("2024-02-01"));
    CHECK(none.empty());

    CHECK_THROWS_AS(market::trading_days(bars, Date::parse("2023-06-05"),
                                         Date::parse("2023-06-01")),
                    Error);
}

TEST_CASE("the 2023 test window has 145 trading days in the dataset calendar") {
    // Weekdays of Jun 1 - Dec 29 2023, minus the five full-day market holidays
    // and the two shortened sessions the dataset drops (Jul 3, Nov 24).
    std::set<std::string> skip = {"2023-06-19", "2023-07-04", "2023-09-04",
                                  "2023-11-23", "2023-12-25", "2023-07-03",
                                  "2023-11-24"};
    std::vector<market::Bar> bars;
    Date d = Date::parse("2023-06-01");
    Date end = Date::parse("2023-12-29");
    while (d <= end) {
        if (d.weekday() != 0 && d.weekday() != 6 && !skip.count(d.to_string())) {
            market::Bar bar;
            bar.date = d;
            bar.open = bar.high = bar.low = bar.close = 100;
            bars.push_back(bar);
        }
        d = d.add_days(1);
    }
    auto days = market::trading_days(bars, Date::parse("2023-06-01"), Date::parse("2023-12-29"));
    CHECK(days.size() == 145);
}

TEST_SUITE_END();
