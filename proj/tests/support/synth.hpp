#pragma once

#include "core/date.hpp"
#include "core/market_data.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace test_support {

// Small deterministic linear-congruential stream so synthetic fixtures never
// depend on libstdc++ distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed * 2862933555777941757ULL + 3037000493ULL) {}

    std::uint64_t next_u64() {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return state_ ^ (state_ >> 31);
    }
    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::uint64_t state_;
};

// Consecutive weekday dates starting at `start`.
inline std::vector<finvision::Date> weekdays_from(finvision::Date start, int count) {
    std::vector<finvision::Date> out;
    finvision::Date d = start;
    while (static_cast<int>(out.size()) < count) {
        if (d.weekday() != 0 && d.weekday() != 6) out.push_back(d);
        d = d.add_days(1);
    }
    return out;
}

// Random-walk OHLCV bars over consecutive weekdays. Prices stay positive and
// satisfy the OHLC invariants by construction.
inline std::vector<finvision::market::Bar> random_walk_bars(finvision::Date start, int count,
                                                            std::uint64_t seed,
                                                            double base_price = 100.0) {
    Rng rng(seed);
    std::vector<finvision::market::Bar> bars;
    auto dates = weekdays_from(start, count);
    double close = base_price;
    for (int i = 0; i < count; ++i) {
        finvision::market::Bar bar;
        bar.date = dates[static_cast<std::size_t>(i)];
        double open = close * rng.uniform(0.995, 1.005);
        close = close * rng.uniform(0.97, 1.03);
        bar.open = open;
        bar.close = close;
        bar.high = std::max(open, close) * rng.uniform(1.0, 1.01);
        bar.low = std::min(open, close) * rng.uniform(0.99, 1.0);
        bar.volume = std::floor(rng.uniform(1e5, 5e6));
        bars.push_back(bar);
    }
    return bars;
}

inline std::string bars_to_csv(const std::vector<finvision::market::Bar>& bars) {
    std::string out = "date,open,high,low,close,volume\n";
    char buf[256];
    for (const auto& bar : bars) {
        std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%.0f\n",
                      bar.date.to_string().c_str(), bar.open, bar.high, bar.low, bar.close,
                      bar.volume);
        out += buf;
    }
    return out;
}

} // namespace test_support
