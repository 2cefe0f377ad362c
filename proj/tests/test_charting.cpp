#include "core/chart.hpp"
#include "core/errors.hpp"
#include "core/indicators.hpp"

#include "support/synth.hpp"

#include <doctest.h>

using namespace finvision;
using namespace finvision::charting;

namespace {

std::pair<std::vector<market::Bar>, market::IndicatorFrame> window_of(int total, int window,
                                                                      std::uint64_t seed) {
    auto bars = test_support::random_walk_bars(Date::parse("2023-01-02"), total, seed);
    auto frame = market::compute_indicators(bars, {});
    std::size_t n = std::min<std::size_t>(window, bars.size());
    std::vector<market::Bar> tail(bars.end() - n, bars.end());
    return {tail, market::tail_frame(frame, n)};
}

} // namespace

TEST_SUITE_BEGIN("charting");

TEST_CASE("technical chart has the five fixed panels") {
    auto [bars, frame] = window_of(120, 60, 5);
    auto spec = build_technical_chart(bars, frame, "TEST 2023-06-23");
    CHECK(spec.width == 1200);
    CHECK(spec.height == 900);
    CHECK_FALSE(spec.truncated);
    REQUIRE(spec.panels.size() == 5);
    CHECK(spec.panels[0].kind == PanelKind::candlestick);
    CHECK(spec.panels[0].ohlc.has_value());
    CHECK(spec.panels[1].kind == PanelKind::histogram);
    CHECK(spec.panels[2].name == "rsi14");
    CHECK(spec.panels[2].guides == std::vector<double>{30.0, 70.0});
    CHECK(spec.panels[3].name == "macd");
    CHECK(spec.panels[4].name == "kdj");

    int total_height = 0;
    for (const auto& panel : spec.panels) total_height += panel.height_px;
    CHECK(total_height == spec.height);

    CHECK(spec.dates.size() == 60);
}

TEST_CASE("short history sets the truncation flag") {
    auto [bars, frame] = window_of(20, 60, 6);
    auto spec = build_technical_chart(bars, frame, "TEST");
    CHECK(spec.truncated);
    CHECK(spec.dates.size() == 20);
    REQUIRE(spec.panels.size() == 5);
}

TEST_CASE("price-panel overlays carry the indicator series verbatim") {
    auto [bars, frame] = window_of(150, 60, 7);
    auto spec = build_technical_chart(bars, frame, "TEST");
    const Panel& price = spec.panels[0];
    REQUIRE(price.lines.size() == 5);
    CHECK(price.lines[0].name == "sma10");
    CHECK(price.lines[1].name == "sma50");
    CHECK(price.lines[2].name == "bb_upper");
    for (std::size_t i = 0; i < frame.size(); ++i) {
        CHECK(price.lines[0].values[i] == frame.sma_short[i]);
        CHECK(price.lines[1].values[i] == frame.sma_long[i]);
        CHECK(price.lines[2].values[i] == frame.bb_upper[i]);
        CHECK(price.lines[3].values[i] == frame.bb_mid[i]);
        CHECK(price.lines[4].values[i] == frame.bb_lower[i]);
    }
    // candles match the bars
    for (std::size_t i = 0; i < bars.size(); ++i) {
        CHECK(price.ohlc->open[i] == bars[i].open);
        CHECK(price.ohlc->close[i] == bars[i].close);
    }
}

TEST_CASE("misaligned frames and empty bars are rejected") {
    auto [bars, frame] = window_of(100, 60, 8);
    auto bad_frame = market::tail_frame(frame, 59);
    CHECK_THROWS_AS(build_technical_chart(bars, bad_frame, "TEST"), Error);
    CHECK_THROWS_AS(build_technical_chart({}, frame, "TEST"), Error);
}

TEST_CASE("signal chart marks buys and sells at the close") {
    auto bars = test_support::random_walk_bars(Date::parse("2023-03-01"), 30, 9);
    std::vector<std::pair<Date, agents::Action>> decisions = {
        {bars[5].date, agents::Action::buy},
        {bars[12].date, agents::Action::sell},
        {bars[20].date, agents::Action::hold},
    };
    auto spec = build_signal_chart(bars, decisions, "TEST signals");
    CHECK(spec.width == 1000);
    CHECK(spec.height == 500);
    REQUIRE(spec.panels.size() == 1);
    const Panel& panel = spec.panels[0];
    REQUIRE(panel.markers.size() == 2);  // HOLD days carry no marker
    CHECK(panel.markers[0].kind == MarkerKind::buy);
    CHECK(panel.markers[0].date == bars[5].date);
    CHECK(panel.markers[0].price == bars[5].close);
    CHECK(panel.markers[1].kind == MarkerKind::sell);
    CHECK(panel.markers[1].price == bars[12].close);
}

TEST_CASE("all-hold and empty decision lists yield markerless charts") {
    auto bars = test_support::random_walk_bars(Date::parse("2023-03-01"), 30, 10);
    std::vector<std::pair<Date, agents::Action>> holds;
    for (const auto& bar : bars) holds.emplace_back(bar.date, agents::Action::hold);
    CHECK(build_signal_chart(bars, holds, "T").panels[0].markers.empty());
    CHECK(build_signal_chart(bars, {}, "T").panels[0].markers.empty());
}

TEST_CASE("decision dates outside the bars are an error") {
    auto bars = test_support::random_walk_bars(Date::parse("2023-03-01"), 30, 11);
    std::vector<std::pair<Date, agents::Action>> decisions = {
        {Date::parse("2030-01-01"), agents::Action::buy}};
    CHECK_THROWS_AS(build_signal_chart(bars, decisions, "T"), Error);
}

TEST_CASE("marker count equals the non-hold decisions in range") {
    test_support::Rng rng(77);
    auto bars = test_support::random_walk_bars(Date::parse("2023-03-01"), 30, 12);
    std::vector<std::pair<Date, agents::Action>> decisions;
    int non_hold = 0;
    for (const auto& bar : bars) {
        int roll = rng.uniform_int(0, 2);
        auto action = roll == 0   ? agents::Action::buy
                      : roll == 1 ? agents::Action::sell
                                  : agents::Action::hold;
        if (action != agents::Action::hold) ++non_hold;
        decisions.emplace_back(bar.date, action);
    }
    auto spec = build_signal_chart(bars, decisions, "T");
    CHECK(static_cast<int>(spec.panels[0].markers.size()) == non_hold);
}

TEST_CASE("spec json round-trips equality") {
    auto [bars, frame] = window_of(80, 60, 13);
    auto a = build_technical_chart(bars, frame, "TEST");
    auto b = build_technical_chart(bars, frame, "TEST");
    CHECK(a == b);
    auto c = build_technical_chart(bars, frame, "OTHER");
    CHECK_FALSE(a == c);
}

TEST_SUITE_END();
