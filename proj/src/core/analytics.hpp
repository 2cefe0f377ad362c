#pragma once

#include "core/indicators.hpp"
#include "core/market_data.hpp"
#include "core/portfolio.hpp"

#include <span>
#include <string>
#include <vector>

namespace finvision::analytics {

struct EquityCurve {
    std::vector<Date> dates;
    std::vector<double> values;  // > 0, one per date

    std::size_t size() const { return values.size(); }
    void push(Date d, double v) { dates.push_back(d); values.push_back(v); }
};

// Annual rate of return: (P_T - P_0)/P_0 * C/T with T = curve length - 1
// (return intervals). Simple scaling, not compounded.
double arr(const EquityCurve& curve, int annual_trading_days);

struct SharpeResult {
    double daily = 0;       // (mean(r) - rf) / stddev(r), sample stddev
    double annualized = 0;  // daily * annualization factor
};

// Daily simple returns r_i = V_i/V_{i-1} - 1. Throws Error::data on curves
// shorter than 3 points or with zero return variance.
SharpeResult sharpe(const EquityCurve& curve, double risk_free_daily, double annualization);

// Largest relative decline from a running peak, in [0, 1].
double mdd(const EquityCurve& curve);

double default_sharpe_annualization(int annual_trading_days);

// --- rule-based baselines ---------------------------------------------------

struct BaselineResult {
    EquityCurve curve;                  // marked at each close inside the window
    std::vector<portfolio::Fill> fills;
    std::vector<std::pair<Date, agents::Action>> signals;  // signal dates (pre-execution)
};

// All-in at the first window open, never trades again.
BaselineResult baseline_buy_hold(std::span<const market::Bar> bars, Date window_start,
                                 Date window_end, double capital);

// All-in when the MACD line crosses above its signal, all-out on the cross
// below; trades at the next open. Indicator history may extend before the
// window for warm-up.
BaselineResult baseline_macd(std::span<const market::Bar> bars, Date window_start,
                             Date window_end, double capital,
                             const market::IndicatorParams& params);

// KDJ cross with an RSI filter: BUY when K crosses above D and RSI < 70,
// SELL when K crosses below D and RSI > 30; trades at the next open.
BaselineResult baseline_kdj_rsi(std::span<const market::Bar> bars, Date window_start,
                                Date window_end, double capital,
                                const market::IndicatorParams& params);

} // namespace finvision::analytics
