#include "core/analytics.hpp"
#include "core/errors.hpp"

#include "support/oracles.hpp"
#include "support/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace finvision;
using test_support::Rng;

namespace {

analytics::EquityCurve curve_of(const std::vector<double>& values) {
    analytics::EquityCurve curve;
    Date d = Date::parse("2023-06-01");
    for (double v : values) {
        curve.push(d, v);
        d = d.add_days(1);
    }
    return curve;
}

bool close_rel(double a, double b, double tol) {
    double scale = std::max({std::abs(a), std::abs(b), 1.0});
    return std::abs(a - b) <= tol * scale;
}

} // namespace

TEST_SUITE_BEGIN("analytics");

TEST_CASE("arr follows the simple scaling formula") {
    std::vector<double> values(127, 100.0);
    values.back() = 110.0;
    CHECK(analytics::arr(curve_of(values), 252) == doctest::Approx(0.20).epsilon(1e-12));

    CHECK(analytics::arr(curve_of(std::vector<double>(10, 100.0)), 252) == 0.0);

    CHECK_THROWS_AS(analytics::arr(curve_of({100.0}), 252), Error);
}

TEST_CASE("arr is invariant under uniform scaling") {
    Rng rng(11);
    std::vector<double> values;
    double v = 100;
    for (int i = 0; i < 50; ++i) {
        v *= rng.uniform(0.98, 1.03);
        values.push_back(v);
    }
    double base = analytics::arr(curve_of(values), 252);
    for (double& x : values) x *= 7.25;
    CHECK(analytics::arr(curve_of(values), 252) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("sharpe of a symmetric two-return curve is zero") {
    auto curve = curve_of({100.0, 101.0, 99.99});
    // returns +1% then -1%: mean 0
    auto s = analytics::sharpe(curve, 0.0, std::sqrt(252.0));
    CHECK(s.daily == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("sharpe rejects degenerate curves") {
    CHECK_THROWS_AS(analytics::sharpe(curve_of({100.0, 100.0, 100.0}), 0.0, 1.0), Error);
    CHECK_THROWS_AS(analytics::sharpe(curve_of({100.0, 101.0}), 0.0, 1.0), Error);
}

TEST_CASE("mdd matches hand examples exactly") {
    CHECK(analytics::mdd(curve_of({100, 120, 90, 110})) == 0.25);
    CHECK(analytics::mdd(curve_of({100, 50, 100, 25})) == 0.75);
    CHECK(analytics::mdd(curve_of({100, 100, 101, 150})) == 0.0);
}

TEST_CASE("metrics match oracles on randomized curves") {
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        int n = rng.uniform_int(3, 400);
        std::vector<double> values;
        double v = rng.uniform(50, 5000);
        for (int i = 0; i < n; ++i) {
            v *= rng.uniform(0.95, 1.06);
            values.push_back(v);
        }
        auto curve = curve_of(values);
        CHECK(close_rel(analytics::arr(curve, 252), test_oracle::arr(values, 252), 1e-9));
        CHECK(close_rel(analytics::mdd(curve), test_oracle::mdd(values), 1e-9));
        try {
            auto s = analytics::sharpe(curve, 0.0001, std::sqrt(252.0));
            auto o = test_oracle::sharpe(values, 0.0001, std::sqrt(252.0));
            CHECK(close_rel(s.daily, o.daily, 1e-9));
            CHECK(close_rel(s.annualized, o.annualized, 1e-9));
        } catch (const Error&) {
            // zero-variance curves are legitimately rejected
        }

        // scaling invariance for mdd
        std::vector<double> scaled = values;
        for (double& x : scaled) x *= 3.0;
        auto scaled_curve = curve_of(scaled);
        CHECK(close_rel(analytics::mdd(curve), analytics::mdd(scaled_curve), 1e-12));
        CHECK(analytics::mdd(curve) >= 0.0);
        CHECK(analytics::mdd(curve) <= 1.0);
    }
}

TEST_CASE("buy-and-hold on a doubling series doubles the capital") {
    std::vector<market::Bar> bars;
    Date d = Date::parse("2023-06-01");
    for (int i = 0; i < 20; ++i) {
        market::Bar bar;
        bar.date = d;
        bar.open = i == 0 ? 100.0 : 100.0 + i * 5.0;
        bar.close = i == 19 ? 200.0 : 100.0 + i * 5.0;
        bar.high = std::max(bar.open, bar.close) + 1;
        bar.low = std::min(bar.open, bar.close) - 1;
        bar.volume = 1000;
        bars.push_back(bar);
        d = d.add_days(1);
    }
    auto result = analytics::baseline_buy_hold(bars, bars.front().date, bars.back().date, 10000.0);
    REQUIRE(result.curve.size() == 20);
    CHECK(result.curve.values.back() == 20000.0);  // fractional shares, exact doubling
    REQUIRE(result.fills.size() == 1);
    CHECK(result.fills[0].price == 100.0);
}

TEST_CASE("buy-and-hold respects the window and rejects empty ones") {
    auto bars = test_support::random_walk_bars(Date::parse("2023-01-02"), 50, 3);
    auto result = analytics::baseline_buy_hold(bars, bars[10].date, bars[19].date, 5000.0);
    CHECK(result.curve.size() == 10);
    CHECK(result.curve.dates.front() == bars[10].date);
    CHECK_THROWS_AS(analytics::baseline_buy_hold(bars, Date::parse("2030-01-01"),
                                                 Date::parse("2030-02-01"), 5000.0),
                    Error);
}

TEST_CASE("single-bar window yields a one-point curve that metrics reject") {
    auto bars = test_support::random_walk_bars(Date::parse("2023-01-02"), 10, 4);
    auto result = analytics::baseline_buy_hold(bars, bars[5].date, bars[5].date, 1000.0);
    CHECK(result.curve.size() == 1);
    CHECK_THROWS_AS(analytics::arr(result.curve, 252), Error);
}

TEST_CASE("buy-and-hold matches the closed form on a geometric series") {
    std::vector<market::Bar> bars;
    Date d = Date::parse("2023-06-01");
    double price = 100.0;
    for (int i = 0; i < 145; ++i) {
        market::Bar bar;
        bar.date = d;
        bar.open = price;
        price *= 1.001;
        bar.close = price;
        bar.high = price + 1;
        bar.low = std::min(bar.open, price) - 1;
        bar.volume = 1;
        bars.push_back(bar);
        d = d.add_days(1);
    }
    auto result =
        analytics::baseline_buy_hold(bars, bars.front().date, bars.back().date, 10000.0);
    // shares = capital / open_0; value_t = shares * close_t = capital * 1.001^(t+1)
    for (std::size_t t = 0; t < result.curve.size(); ++t) {
        double expect = 10000.0 * std::pow(1.001, static_cast<double>(t + 1));
        CHECK(close_rel(result.curve.values[t], expect, 1e-9));
    }
}

TEST_CASE("macd baseline never trades on constant prices") {
    std::vector<market::Bar> bars;
    Date d = Date::parse("2023-01-02");
    for (int i = 0; i < 120; ++i) {
        market::Bar bar;
        bar.date = d;
        bar.open = bar.high = bar.low = bar.close = 100.0;
        bar.volume = 1;
        bars.push_back(bar);
        d = d.add_days(1);
    }
    auto result = analytics::baseline_macd(bars, bars[60].date, bars.back().date, 10000.0, {});
    CHECK(result.fills.empty());
    for (double v : result.curve.values) CHECK(v == 10000.0);
}

TEST_CASE("a single engineered golden cross produces exactly one buy") {
    // Long decline then a sharp recovery: the MACD line crosses its signal
    // upward once inside the window.
    std::vector<market::Bar> bars;
    Date d = Date::parse("2023-01-02");
    double price = 200.0;
    for (int i = 0; i < 80; ++i) {
        price *= 0.995;
        market::Bar bar;
        bar.date = d;
        bar.open = bar.high = bar.low = bar.close = price;
        bar.volume = 1;
        bars.push_back(bar);
        d = d.add_days(1);
    }
    for (int i = 0; i < 40; ++i) {
        price *= 1.012;
        market::Bar bar;
        bar.date = d;
        bar.open = bar.high = bar.low = bar.close = price;
        bar.volume = 1;
        bars.push_back(bar);
        d = d.add_days(1);
    }
    market::IndicatorParams params;
    auto result = analytics::baseline_macd(bars, bars[40].date, bars.back().date, 10000.0, params);

    // oracle: upward sign changes of (macd - signal) inside the window
    std::vector<double> closes;
    for (const auto& bar : bars) closes.push_back(bar.close);
    auto macd = test_oracle::macd(closes, params.macd_fast, params.macd_slow, params.macd_signal);
    int crossings_up = 0;
    for (std::size_t i = 41; i < bars.size(); ++i) {
        if (macd.line[i] && macd.signal[i] && macd.line[i - 1] && macd.signal[i - 1]) {
            double cur = *macd.line[i] - *macd.signal[i];
            double prev = *macd.line[i - 1] - *macd.signal[i - 1];
            if (prev <= 0 && cur > 0) ++crossings_up;
        }
    }
    REQUIRE(crossings_up == 1);
    int buys = 0;
    for (const auto& fill : result.fills) {
        if (fill.action == agents::Action::buy) ++buys;
    }
    CHECK(buys == 1);
}

TEST_CASE("macd signals on a random series equal the sign changes of the difference") {
    auto bars = test_support::random_walk_bars(Date::parse("2022-01-03"), 250, 17);
    market::IndicatorParams params;
    auto result =
        analytics::baseline_macd(bars, bars[60].date, bars.back().date, 10000.0, params);

    std::vector<double> closes;
    for (const auto& bar : bars) closes.push_back(bar.close);
    auto macd = test_oracle::macd(closes, params.macd_fast, params.macd_slow, params.macd_signal);
    std::vector<std::pair<Date, agents::Action>> expected;
    for (std::size_t i = 61; i < bars.size(); ++i) {
        if (!macd.line[i] || !macd.signal[i] || !macd.line[i - 1] || !macd.signal[i - 1]) continue;
        double cur = *macd.line[i] - *macd.signal[i];
        double prev = *macd.line[i - 1] - *macd.signal[i - 1];
        if (prev <= 0 && cur > 0) expected.emplace_back(bars[i].date, agents::Action::buy);
        if (prev >= 0 && cur < 0) expected.emplace_back(bars[i].date, agents::Action::sell);
    }
    REQUIRE(result.signals.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(result.signals[i].first == expected[i].first);
        CHECK(result.signals[i].second == expected[i].second);
    }
}

TEST_CASE("kdj baseline stays flat on constant prices") {
    std::vector<market::Bar> bars;
    Date d = Date::parse("2023-01-02");
    for (int i = 0; i < 100; ++i) {
        market::Bar bar;
        bar.date = d;
        bar.open = bar.high = bar.low = bar.close = 50.0;
        bar.volume = 1;
        bars.push_back(bar);
        d = d.add_days(1);
    }
    auto result = analytics::baseline_kdj_rsi(bars, bars[30].date, bars.back().date, 10000.0, {});
    CHECK(result.fills.empty());
}

TEST_CASE("every executed kdj trade coincides with a filtered crossing") {
    auto bars = test_support::random_walk_bars(Date::parse("2022-01-03"), 250, 23);
    market::IndicatorParams params;
    auto result =
        analytics::baseline_kdj_rsi(bars, bars[40].date, bars.back().date, 10000.0, params);

    std::vector<double> closes, highs, lows;
    for (const auto& bar : bars) {
        closes.push_back(bar.close);
        highs.push_back(bar.high);
        lows.push_back(bar.low);
    }
    auto kdj = test_oracle::kdj(highs, lows, closes, params.kdj_period, params.kdj_k_smooth,
                                params.kdj_d_smooth);
    auto rsi = test_oracle::wilder_rsi(closes, params.rsi_period);

    REQUIRE(!result.signals.empty());
    for (const auto& [date, action] : result.signals) {
        std::size_t i = 0;
        while (bars[i].date != date) ++i;
        REQUIRE(i >= 1);
        double cur = *kdj.k[i] - *kdj.d[i];
        double prev = *kdj.k[i - 1] - *kdj.d[i - 1];
        if (action == agents::Action::buy) {
            CHECK(prev <= 0);
            CHECK(cur > 0);
            CHECK(*rsi[i] < 70.0);
        } else {
            CHECK(prev >= 0);
            CHECK(cur < 0);
            CHECK(*rsi[i] > 30.0);
        }
    }
}

TEST_CASE("baselines never go cash-negative or short") {
    for (std::uint64_t seed : {31ULL, 32ULL, 33ULL}) {
        auto bars = test_support::random_walk_bars(Date::parse("2022-01-03"), 300, seed);
        for (int strategy : {0, 1}) {
            auto result = strategy == 0
                              ? analytics::baseline_macd(bars, bars[60].date, bars.back().date,
                                                         10000.0, {})
                              : analytics::baseline_kdj_rsi(bars, bars[60].date, bars.back().date,
                                                            10000.0, {});
            double shares = 0;
            for (const auto& fill : result.fills) {
                if (fill.action == agents::Action::buy) {
                    CHECK(shares == 0);  // never doubles down
                    shares = fill.shares;
                } else {
                    CHECK(fill.shares == doctest::Approx(shares));  // sells only what it holds
                    shares = 0;
                }
                CHECK(fill.cash_after >= 0);
                CHECK(fill.shares_after >= 0);
            }
            for (double v : result.curve.values) CHECK(v > 0);
        }
    }
}

TEST_SUITE_END();
