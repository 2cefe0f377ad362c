#include "core/chart.hpp"

#include "core/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace finvision::charting {

const char* panel_kind_name(PanelKind kind) {
    switch (kind) {
        case PanelKind::candlestick: return "candlestick";
        case PanelKind::line_set: return "line_set";
        case PanelKind::histogram: return "histogram";
    }
    return "line_set";
}

bool operator==(const ChartSpec& a, const ChartSpec& b) {
    return spec_to_json(a) == spec_to_json(b);
}

namespace {

// Splits the chart height across panels by weight; the first panel absorbs
// the rounding remainder so heights always sum to the chart height.
std::vector<int> split_heights(int total, std::span<const double> weights) {
    std::vector<int> heights(weights.size());
    int assigned = 0;
    for (std::size_t i = 1; i < weights.size(); ++i) {
        heights[i] = static_cast<int>(total * weights[i]);
        assigned += heights[i];
    }
    heights[0] = total - assigned;
    return heights;
}

} // namespace

ChartSpec build_technical_chart(std::span<const market::Bar> bars,
                                const market::IndicatorFrame& frame, std::string title,
                                int window) {
    if (bars.empty()) throw Error::chart("technical chart needs at least one bar");
    if (frame.size() != bars.size()) {
        throw Error::chart("indicator frame is not aligned to the chart bars: " +
                           std::to_string(frame.size()) + " frame rows vs " +
                           std::to_string(bars.size()) + " bars");
    }
    for (std::size_t i = 0; i < bars.size(); ++i) {
        if (frame.dates[i] != bars[i].date) {
            throw Error::chart("indicator frame dates do not match the chart bars");
        }
    }

    const std::size_t n = bars.size();
    ChartSpec spec;
    spec.title = std::move(title);
    spec.width = kTechnicalChartWidth;
    spec.height = kTechnicalChartHeight;
    spec.truncated = n < static_cast<std::size_t>(window);
    spec.dates.reserve(n);
    for (const auto& bar : bars) spec.dates.push_back(bar.date);

    const double weights[] = {0.40, 0.12, 0.16, 0.16, 0.16};
    auto heights = split_heights(spec.height, weights);

    // Panel 1: candlesticks with SMA and Bollinger overlays.
    {
        Panel panel;
        panel.kind = PanelKind::candlestick;
        panel.name = "price";
        panel.height_px = heights[0];
        OhlcSeries ohlc;
        for (const auto& bar : bars) {
            ohlc.open.push_back(bar.open);
            ohlc.high.push_back(bar.high);
            ohlc.low.push_back(bar.low);
            ohlc.close.push_back(bar.close);
        }
        panel.ohlc = std::move(ohlc);
        panel.lines.push_back({"sma10", frame.sma_short});
        panel.lines.push_back({"sma50", frame.sma_long});
        panel.lines.push_back({"bb_upper", frame.bb_upper});
        panel.lines.push_back({"bb_mid", frame.bb_mid});
        panel.lines.push_back({"bb_lower", frame.bb_lower});
        spec.panels.push_back(std::move(panel));
    }
    // Panel 2: volume.
    {
        Panel panel;
        panel.kind = PanelKind::histogram;
        panel.name = "volume";
        panel.height_px = heights[1];
        market::Series volume(n);
        for (std::size_t i = 0; i < n; ++i) volume[i] = bars[i].volume;
        panel.bars.push_back({"volume", std::move(volume)});
        spec.panels.push_back(std::move(panel));
    }
    // Panel 3: RSI with the standard 30/70 guides.
    {
        Panel panel;
        panel.kind = PanelKind::line_set;
        panel.name = "rsi14";
        panel.height_px = heights[2];
        panel.lines.push_back({"rsi14", frame.rsi});
        panel.guides = {30.0, 70.0};
        spec.panels.push_back(std::move(panel));
    }
    // Panel 4: MACD line/signal plus histogram.
    {
        Panel panel;
        panel.kind = PanelKind::line_set;
        panel.name = "macd";
        panel.height_px = heights[3];
        panel.lines.push_back({"macd", frame.macd_line});
        panel.lines.push_back({"signal", frame.macd_signal});
        panel.bars.push_back({"hist", frame.macd_hist});
        panel.guides = {0.0};
        spec.panels.push_back(std::move(panel));
    }
    // Panel 5: KDJ.
    {
        Panel panel;
        panel.kind = PanelKind::line_set;
        panel.name = "kdj";
        panel.height_px = heights[4];
        panel.lines.push_back({"k", frame.kdj_k});
        panel.lines.push_back({"d", frame.kdj_d});
        panel.lines.push_back({"j", frame.kdj_j});
        spec.panels.push_back(std::move(panel));
    }
    return spec;
}

ChartSpec build_signal_chart(std::span<const market::Bar> bars,
                             std::span<const std::pair<Date, agents::Action>> decisions,
                             std::string title, int window) {
    if (bars.empty()) throw Error::chart("signal chart needs at least one bar");

    ChartSpec spec;
    spec.title = std::move(title);
    spec.width = kSignalChartWidth;
    spec.height = kSignalChartHeight;
    spec.truncated = bars.size() < static_cast<std::size_t>(window);
    spec.dates.reserve(bars.size());
    for (const auto& bar : bars) spec.dates.push_back(bar.date);

    Panel panel;
    panel.kind = PanelKind::line_set;
    panel.name = "close";
    panel.height_px = spec.height;
    market::Series closes(bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) closes[i] = bars[i].close;
    panel.lines.push_back({"close", std::move(closes)});

    for (const auto& [date, action] : decisions) {
        auto idx = market::bar_index(bars, date);
        if (!idx) {
            throw Error::chart("decision date " + date.to_string() +
                               " is outside the signal chart bars");
        }
        if (action == agents::Action::hold) continue;
        Marker marker;
        marker.date = date;
        marker.kind = action == agents::Action::buy ? MarkerKind::buy : MarkerKind::sell;
        marker.price = bars[*idx].close;
        panel.markers.push_back(marker);
    }
    spec.panels.push_back(std::move(panel));
    return spec;
}

namespace {

nlohmann::ordered_json series_json(const market::Series& values) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& v : values) {
        if (v) {
            arr.push_back(*v);
        } else {
            arr.push_back(nullptr);
        }
    }
    return arr;
}

} // namespace

nlohmann::ordered_json spec_to_json(const ChartSpec& spec) {
    nlohmann::ordered_json out;
    out["title"] = spec.title;
    out["width"] = spec.width;
    out["height"] = spec.height;
    out["truncated"] = spec.truncated;
    auto dates = nlohmann::ordered_json::array();
    for (const auto& d : spec.dates) dates.push_back(d.to_string());
    out["dates"] = std::move(dates);

    auto panels = nlohmann::ordered_json::array();
    for (const auto& panel : spec.panels) {
        nlohmann::ordered_json p;
        p["kind"] = panel_kind_name(panel.kind);
        p["name"] = panel.name;
        p["height_px"] = panel.height_px;
        if (panel.ohlc) {
            p["ohlc"] = {{"open", panel.ohlc->open},
                         {"high", panel.ohlc->high},
                         {"low", panel.ohlc->low},
                         {"close", panel.ohlc->close}};
        }
        auto lines = nlohmann::ordered_json::array();
        for (const auto& s : panel.lines) {
            lines.push_back({{"name", s.name}, {"values", series_json(s.values)}});
        }
        p["lines"] = std::move(lines);
        auto bars = nlohmann::ordered_json::array();
        for (const auto& s : panel.bars) {
            bars.push_back({{"name", s.name}, {"values", series_json(s.values)}});
        }
        p["bars"] = std::move(bars);
        auto markers = nlohmann::ordered_json::array();
        for (const auto& m : panel.markers) {
            markers.push_back({{"date", m.date.to_string()},
                               {"kind", m.kind == MarkerKind::buy ? "BUY" : "SELL"},
                               {"price", m.price}});
        }
        p["markers"] = std::move(markers);
        p["guides"] = panel.guides;
        panels.push_back(std::move(p));
    }
    out["panels"] = std::move(panels);
    return out;
}

} // namespace finvision::charting
