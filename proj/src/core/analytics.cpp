#include "core/analytics.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace finvision::analytics {
namespace {

void check_curve(const EquityCurve& curve, std::size_t min_points) {
    if (curve.values.size() != curve.dates.size()) {
        throw Error::invalid("equity curve dates/values length mismatch");
    }
    if (curve.size() < min_points) {
        throw Error::data("equity curve too short: need at least " + std::to_string(min_points) +
                          " points, have " + std::to_string(curve.size()));
    }
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve.values[i] <= 0) throw Error::data("equity curve values must be positive");
        if (i > 0 && !(curve.dates[i - 1] < curve.dates[i])) {
            throw Error::data("equity curve dates must be strictly increasing");
        }
    }
}

} // namespace

double arr(const EquityCurve& curve, int annual_trading_days) {
    check_curve(curve, 2);
    if (annual_trading_days < 1) throw Error::invalid("annual trading days must be positive");
    const double p0 = curve.values.front();
    const double pt = curve.values.back();
    const double intervals = static_cast<double>(curve.size() - 1);
    return (pt - p0) / p0 * (annual_trading_days / intervals);
}

SharpeResult sharpe(const EquityCurve& curve, double risk_free_daily, double annualization) {
    check_curve(curve, 3);

    // Welford's running mean/variance over daily simple returns.
    double mean = 0, m2 = 0;
    std::size_t n = 0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        double r = curve.values[i] / curve.values[i - 1] - 1.0;
        ++n;
        double delta = r - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (r - mean);
    }
    double variance = m2 / static_cast<double>(n - 1);  // sample variance
    if (variance <= 0) {
        throw Error::data("Sharpe ratio undefined: zero return variance");
    }
    SharpeResult out;
    out.daily = (mean - risk_free_daily) / std::sqrt(variance);
    out.annualized = out.daily * annualization;
    return out;
}

double mdd(const EquityCurve& curve) {
    check_curve(curve, 1);
    double peak = curve.values.front();
    double worst = 0;
    for (double v : curve.values) {
        peak = std::max(peak, v);
        worst = std::max(worst, (peak - v) / peak);
    }
    return worst;
}

double default_sharpe_annualization(int annual_trading_days) {
    return std::sqrt(static_cast<double>(annual_trading_days));
}

namespace {

struct WindowSlice {
    std::size_t begin = 0;  // first bar index inside the window
    std::size_t end = 0;    // one past the last bar index inside the window
};

WindowSlice window_slice(std::span<const market::Bar> bars, Date start, Date end) {
    if (start > end) throw Error::invalid("baseline window start after end");
    WindowSlice s;
    s.begin = bars.size();
    for (std::size_t i = 0; i < bars.size(); ++i) {
        if (bars[i].date >= start && bars[i].date <= end) {
            if (s.begin == bars.size()) s.begin = i;
            s.end = i + 1;
        }
    }
    if (s.begin == bars.size()) throw Error::data("no bars inside the baseline window");
    return s;
}

// Shared all-in/all-out simulator. `signal_at(i)` inspects history up to and
// including bar i and is only consulted for bars inside the window; a signal
// fires the trade at the next bar's open.
BaselineResult run_flip_strategy(
    std::span<const market::Bar> bars, Date start, Date end, double capital,
    const std::function<std::optional<agents::Action>(std::size_t)>& signal_at) {
    WindowSlice w = window_slice(bars, start, end);

    BaselineResult out;
    double cash = capital;
    double shares = 0;
    std::optional<agents::Action> pending;

    for (std::size_t i = w.begin; i < w.end; ++i) {
        const market::Bar& bar = bars[i];
        if (pending) {
            if (*pending == agents::Action::buy && shares == 0) {
                shares = cash / bar.open;
                cash = 0;
                portfolio::Fill fill;
                fill.date = bar.date;
                fill.action = agents::Action::buy;
                fill.shares = shares;
                fill.price = bar.open;
                fill.requested_pct = 100;
                fill.executed_pct = 100;
                fill.cash_after = cash;
                fill.shares_after = shares;
                out.fills.push_back(fill);
            } else if (*pending == agents::Action::sell && shares > 0) {
                cash = shares * bar.open;
                portfolio::Fill fill;
                fill.date = bar.date;
                fill.action = agents::Action::sell;
                fill.shares = shares;
                fill.price = bar.open;
                fill.requested_pct = 100;
                fill.executed_pct = 100;
                fill.cash_after = cash;
                fill.shares_after = 0;
                out.fills.push_back(fill);
                shares = 0;
            }
            pending.reset();
        }

        if (auto sig = signal_at(i)) {
            out.signals.emplace_back(bar.date, *sig);
            pending = sig;
        }
        out.curve.push(bar.date, cash + shares * bar.close);
    }
    return out;
}

} // namespace

BaselineResult baseline_buy_hold(std::span<const market::Bar> bars, Date window_start,
                                 Date window_end, double capital) {
    if (capital <= 0) throw Error::invalid("baseline capital must be positive");
    WindowSlice w = window_slice(bars, window_start, window_end);

    BaselineResult out;
    const market::Bar& first = bars[w.begin];
    double shares = capital / first.open;

    portfolio::Fill fill;
    fill.date = first.date;
    fill.action = agents::Action::buy;
    fill.shares = shares;
    fill.price = first.open;
    fill.requested_pct = 100;
    fill.executed_pct = 100;
    fill.cash_after = 0;
    fill.shares_after = shares;
    out.fills.push_back(fill);
    out.signals.emplace_back(first.date, agents::Action::buy);

    for (std::size_t i = w.begin; i < w.end; ++i) {
        out.curve.push(bars[i].date, shares * bars[i].close);
    }
    return out;
}

BaselineResult baseline_macd(std::span<const market::Bar> bars, Date window_start,
                             Date window_end, double capital,
                             const market::IndicatorParams& params) {
    if (capital <= 0) throw Error::invalid("baseline capital must be positive");
    market::IndicatorFrame frame = market::compute_indicators(bars, params);

    auto diff = [&](std::size_t i) -> std::optional<double> {
        if (frame.macd_line[i] && frame.macd_signal[i]) {
            return *frame.macd_line[i] - *frame.macd_signal[i];
        }
        return std::nullopt;
    };

    auto signal_at = [&](std::size_t i) -> std::optional<agents::Action> {
        if (i == 0) return std::nullopt;
        auto cur = diff(i);
        auto prev = diff(i - 1);
        if (!cur || !prev) return std::nullopt;
        if (*prev <= 0 && *cur > 0) return agents::Action::buy;
        if (*prev >= 0 && *cur < 0) return agents::Action::sell;
        return std::nullopt;
    };

    return run_flip_strategy(bars, window_start, window_end, capital, signal_at);
}

BaselineResult baseline_kdj_rsi(std::span<const market::Bar> bars, Date window_start,
                                Date window_end, double capital,
                                const market::IndicatorParams& params) {
    if (capital <= 0) throw Error::invalid("baseline capital must be positive");
    market::IndicatorFrame frame = market::compute_indicators(bars, params);

    auto kd = [&](std::size_t i) -> std::optional<double> {
        if (frame.kdj_k[i] && frame.kdj_d[i]) return *frame.kdj_k[i] - *frame.kdj_d[i];
        return std::nullopt;
    };

    auto signal_at = [&](std::size_t i) -> std::optional<agents::Action> {
        if (i == 0) return std::nullopt;
        auto cur = kd(i);
        auto prev = kd(i - 1);
        if (!cur || !prev || !frame.rsi[i]) return std::nullopt;
        double rsi = *frame.rsi[i];
        if (*prev <= 0 && *cur > 0 && rsi < 70.0) return agents::Action::buy;
        if (*prev >= 0 && *cur < 0 && rsi > 30.0) return agents::Action::sell;
        return std::nullopt;
    };

    return run_flip_strategy(bars, window_start, window_end, capital, signal_at);
}

} // namespace finvision::analytics
