#include "core/indicators.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace finvision::market {
namespace {

Series sma(std::span<const double> values, int period) {
    Series out(values.size());
    double sum = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        sum += values[i];
        if (i >= static_cast<std::size_t>(period)) sum -= values[i - period];
        if (i + 1 >= static_cast<std::size_t>(period)) out[i] = sum / period;
    }
    return out;
}

// Wilder RSI: simple mean of the first `period` changes, then
// avg = (avg*(period-1) + change)/period. Flat history maps to 50.
Series rsi_wilder(std::span<const double> values, int period) {
    Series out(values.size());
    if (values.size() <= static_cast<std::size_t>(period)) return out;

    double avg_gain = 0, avg_loss = 0;
    for (int i = 1; i <= period; ++i) {
        double change = values[i] - values[i - 1];
        avg_gain += std::max(change, 0.0);
        avg_loss += std::max(-change, 0.0);
    }
    avg_gain /= period;
    avg_loss /= period;

    auto rsi_value = [](double gain, double loss) {
        if (gain == 0.0 && loss == 0.0) return 50.0;
        if (loss == 0.0) return 100.0;
        if (gain == 0.0) return 0.0;
        return 100.0 - 100.0 / (1.0 + gain / loss);
    };

    out[period] = rsi_value(avg_gain, avg_loss);
    for (std::size_t i = period + 1; i < values.size(); ++i) {
        double change = values[i] - values[i - 1];
        avg_gain = (avg_gain * (period - 1) + std::max(change, 0.0)) / period;
        avg_loss = (avg_loss * (period - 1) + std::max(-change, 0.0)) / period;
        out[i] = rsi_value(avg_gain, avg_loss);
    }
    return out;
}

} // namespace

void IndicatorParams::validate() const {
    const int windows[] = {sma_short,  sma_long,    rsi_period, bb_period,   macd_fast,
                           macd_slow,  macd_signal, kdj_period, kdj_k_smooth, kdj_d_smooth};
    for (int w : windows) {
        if (w < 1) throw Error::invalid("indicator window lengths must be positive");
    }
    if (bb_stddev <= 0) throw Error::invalid("bb_stddev must be positive");
    if (macd_fast >= macd_slow) throw Error::invalid("macd_fast must be shorter than macd_slow");
}

Series ema(std::span<const double> values, int period) {
    Series out(values.size());
    if (values.size() < static_cast<std::size_t>(period)) return out;

    double seed = 0;
    for (int i = 0; i < period; ++i) seed += values[i];
    seed /= period;

    const double alpha = 2.0 / (period + 1);
    double e = seed;
    out[period - 1] = e;
    for (std::size_t i = period; i < values.size(); ++i) {
        e += alpha * (values[i] - e);  // fixed point at constant inputs
        out[i] = e;
    }
    return out;
}

IndicatorFrame compute_indicators(std::span<const Bar> bars, const IndicatorParams& params) {
    params.validate();
    if (bars.empty()) throw Error::invalid("compute_indicators: empty bar series");
    for (std::size_t i = 1; i < bars.size(); ++i) {
        if (!(bars[i - 1].date < bars[i].date)) {
            throw Error::invalid("compute_indicators: bars must be strictly ascending by date");
        }
    }

    const std::size_t n = bars.size();
    std::vector<double> closes(n);
    for (std::size_t i = 0; i < n; ++i) closes[i] = bars[i].close;

    IndicatorFrame frame;
    frame.dates.resize(n);
    for (std::size_t i = 0; i < n; ++i) frame.dates[i] = bars[i].date;

    frame.sma_short = sma(closes, params.sma_short);
    frame.sma_long = sma(closes, params.sma_long);
    frame.rsi = rsi_wilder(closes, params.rsi_period);

    // Bollinger: mid = SMA(bb_period), half-width = bb_stddev * population
    // standard deviation of the window. Sums run on offsets from the first
    // close to keep the variance numerically clean.
    frame.bb_upper.resize(n);
    frame.bb_mid.resize(n);
    frame.bb_lower.resize(n);
    {
        const int w = params.bb_period;
        const double offset = closes[0];
        double sum = 0, sum_sq = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = closes[i] - offset;
            sum += d;
            sum_sq += d * d;
            if (i >= static_cast<std::size_t>(w)) {
                double old = closes[i - w] - offset;
                sum -= old;
                sum_sq -= old * old;
            }
            if (i + 1 >= static_cast<std::size_t>(w)) {
                double mean_d = sum / w;
                double var = std::max(0.0, sum_sq / w - mean_d * mean_d);
                double sd = std::sqrt(var);
                double mid = mean_d + offset;
                frame.bb_mid[i] = mid;
                frame.bb_upper[i] = mid + params.bb_stddev * sd;
                frame.bb_lower[i] = mid - params.bb_stddev * sd;
            }
        }
    }

    // MACD line = EMA(fast) - EMA(slow); signal = EMA(macd_signal) of the line.
    frame.macd_line.resize(n);
    frame.macd_signal.resize(n);
    frame.macd_hist.resize(n);
    {
        Series fast = ema(closes, params.macd_fast);
        Series slow = ema(closes, params.macd_slow);
        std::vector<double> line;
        std::size_t line_start = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (fast[i] && slow[i]) {
                if (line_start == n) line_start = i;
                double v = *fast[i] - *slow[i];
                frame.macd_line[i] = v;
                line.push_back(v);
            }
        }
        if (!line.empty()) {
            Series sig = ema(line, params.macd_signal);
            for (std::size_t j = 0; j < sig.size(); ++j) {
                if (sig[j]) {
                    std::size_t i = line_start + j;
                    frame.macd_signal[i] = *sig[j];
                    frame.macd_hist[i] = *frame.macd_line[i] - *sig[j];
                }
            }
        }
    }

    // KDJ (9,3,3): raw stochastic over kdj_period highs/lows, K and D smoothed
    // with simple 3-period means, J = 3K - 2D. A flat window maps the raw
    // value to 50.
    frame.kdj_k.resize(n);
    frame.kdj_d.resize(n);
    frame.kdj_j.resize(n);
    {
        const int p = params.kdj_period;
        std::vector<double> rsv;
        std::size_t rsv_start = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (i + 1 < static_cast<std::size_t>(p)) continue;
            double hh = bars[i].high, ll = bars[i].low;
            for (std::size_t j = i + 1 - p; j <= i; ++j) {
                hh = std::max(hh, bars[j].high);
                ll = std::min(ll, bars[j].low);
            }
            double v = hh == ll ? 50.0 : (bars[i].close - ll) / (hh - ll) * 100.0;
            if (rsv_start == n) rsv_start = i;
            rsv.push_back(v);
        }
        if (!rsv.empty()) {
            Series k = sma(rsv, params.kdj_k_smooth);
            std::vector<double> k_vals;
            std::size_t k_start = n;
            for (std::size_t j = 0; j < k.size(); ++j) {
                if (k[j]) {
                    std::size_t i = rsv_start + j;
                    if (k_start == n) k_start = i;
                    frame.kdj_k[i] = *k[j];
                    k_vals.push_back(*k[j]);
                }
            }
            if (!k_vals.empty()) {
                Series d = sma(k_vals, params.kdj_d_smooth);
                for (std::size_t j = 0; j < d.size(); ++j) {
                    if (d[j]) {
                        std::size_t i = k_start + j;
                        frame.kdj_d[i] = *d[j];
                        frame.kdj_j[i] = 3.0 * *frame.kdj_k[i] - 2.0 * *d[j];
                    }
                }
            }
        }
    }

    return frame;
}

IndicatorFrame tail_frame(const IndicatorFrame& frame, std::size_t count) {
    count = std::min(count, frame.size());
    auto cut = [&](const auto& v) {
        return std::decay_t<decltype(v)>(v.end() - static_cast<std::ptrdiff_t>(count), v.end());
    };
    IndicatorFrame out;
    out.dates = cut(frame.dates);
    out.sma_short = cut(frame.sma_short);
    out.sma_long = cut(frame.sma_long);
    out.rsi = cut(frame.rsi);
    out.bb_upper = cut(frame.bb_upper);
    out.bb_mid = cut(frame.bb_mid);
    out.bb_lower = cut(frame.bb_lower);
    out.macd_line = cut(frame.macd_line);
    out.macd_signal = cut(frame.macd_signal);
    out.macd_hist = cut(frame.macd_hist);
    out.kdj_k = cut(frame.kdj_k);
    out.kdj_d = cut(frame.kdj_d);
    out.kdj_j = cut(frame.kdj_j);
    return out;
}

} // namespace finvision::market
