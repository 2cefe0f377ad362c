#pragma once

#include "core/market_data.hpp"

#include <optional>
#include <span>
#include <vector>

namespace finvision::market {

struct IndicatorParams {
    int sma_short = 10;
    int sma_long = 50;
    int rsi_period = 14;
    int bb_period = 20;
    double bb_stddev = 2.0;
    int macd_fast = 12;
    int macd_slow = 26;
    int macd_signal = 9;
    int kdj_period = 9;
    int kdj_k_smooth = 3;
    int kdj_d_smooth = 3;

    void validate() const;
};

// One optional value per input bar; nullopt marks insufficient history.
using Series = std::vector<std::optional<double>>;

struct IndicatorFrame {
    std::vector<Date> dates;  // exactly the input bar dates
    Series sma_short, sma_long;
    Series rsi;
    Series bb_upper, bb_mid, bb_lower;
    Series macd_line, macd_signal, macd_hist;
    Series kdj_k, kdj_d, kdj_j;

    std::size_t size() const { return dates.size(); }
};

// Pure function of (bars, params): identical inputs give bit-identical frames.
// Every series is defined from its minimum-history index onward; earlier
// entries carry the insufficient-history marker, never a silent zero.
IndicatorFrame compute_indicators(std::span<const Bar> bars, const IndicatorParams& params);

// EMA with alpha = 2/(n+1), seeded with the simple mean of the first n values.
Series ema(std::span<const double> values, int period);

// Last `count` rows of a frame, for chart windows.
IndicatorFrame tail_frame(const IndicatorFrame& frame, std::size_t count);

} // namespace finvision::market
