#pragma once

#include "core/decision.hpp"
#include "core/indicators.hpp"
#include "core/market_data.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace finvision::charting {

enum class PanelKind { candlestick, line_set, histogram };

const char* panel_kind_name(PanelKind kind);

enum class MarkerKind { buy, sell };

struct Marker {
    Date date;
    MarkerKind kind = MarkerKind::buy;
    double price = 0;
};

struct SeriesRef {
    std::string name;
    market::Series values;  // aligned to the panel's date axis
};

struct OhlcSeries {
    std::vector<double> open, high, low, close;
};

struct Panel {
    PanelKind kind = PanelKind::line_set;
    std::string name;
    int height_px = 0;
    std::optional<OhlcSeries> ohlc;   // candlestick panels only
    std::vector<SeriesRef> lines;     // overlays / line sets
    std::vector<SeriesRef> bars;      // histogram series
    std::vector<Marker> markers;
    std::vector<double> guides;       // horizontal guide levels
};

// Renderer-independent chart description. Panels share the date axis; their
// heights sum to the chart height.
struct ChartSpec {
    std::string title;
    int width = 0;
    int height = 0;
    bool truncated = false;  // built from less history than requested
    std::vector<Date> dates;
    std::vector<Panel> panels;
};

bool operator==(const ChartSpec& a, const ChartSpec& b);

inline constexpr int kTechnicalChartWidth = 1200;
inline constexpr int kTechnicalChartHeight = 900;
inline constexpr int kSignalChartWidth = 1000;
inline constexpr int kSignalChartHeight = 500;

// Five fixed panels: candlesticks with SMA/Bollinger overlays, volume, RSI
// with 30/70 guides, MACD, KDJ. `bars` and `frame` must be date-aligned;
// passing fewer than `window` bars sets the truncation flag.
ChartSpec build_technical_chart(std::span<const market::Bar> bars,
                                const market::IndicatorFrame& frame, std::string title,
                                int window = 60);

// Closing-price line with BUY/SELL markers at the close of each decision day;
// HOLD days carry no marker. Decision dates must fall on bar dates.
ChartSpec build_signal_chart(std::span<const market::Bar> bars,
                             std::span<const std::pair<Date, agents::Action>> decisions,
                             std::string title, int window = 30);

nlohmann::ordered_json spec_to_json(const ChartSpec& spec);

} // namespace finvision::charting
