#include "core/render.hpp"

#include "core/errors.hpp"
#include "core/font5x7.hpp"
#include "core/png_writer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

namespace finvision::charting {
namespace {

struct Rgb {
    std::uint8_t r, g, b;
};

constexpr Rgb kBackground{255, 255, 255};
constexpr Rgb kBorder{180, 180, 180};
constexpr Rgb kText{40, 40, 40};
constexpr Rgb kGuide{150, 150, 150};
constexpr Rgb kUpCandle{0x26, 0xA6, 0x9A};    // #26A69A
constexpr Rgb kDownCandle{0xEF, 0x53, 0x50};  // #EF5350
constexpr Rgb kBuyMarker{0x2E, 0x7D, 0x32};
constexpr Rgb kSellMarker{0xC6, 0x28, 0x28};
constexpr Rgb kVolumeBar{144, 164, 174};

constexpr Rgb kLinePalette[] = {
    {30, 136, 229},   // blue
    {251, 140, 0},    // orange
    {142, 36, 170},   // purple
    {0, 172, 193},    // teal
    {109, 76, 65},    // brown
    {67, 160, 71},    // green
};

class Canvas {
public:
    Canvas(int w, int h) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * h * 3) {
        fill(kBackground);
    }

    int width() const { return w_; }
    int height() const { return h_; }
    const std::vector<std::uint8_t>& pixels() const { return px_; }

    void fill(Rgb c) {
        for (std::size_t i = 0; i + 2 < px_.size(); i += 3) {
            px_[i] = c.r;
            px_[i + 1] = c.g;
            px_[i + 2] = c.b;
        }
    }

    void set(int x, int y, Rgb c) {
        if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
        std::size_t i = (static_cast<std::size_t>(y) * w_ + x) * 3;
        px_[i] = c.r;
        px_[i + 1] = c.g;
        px_[i + 2] = c.b;
    }

    void fill_rect(int x0, int y0, int x1, int y1, Rgb c) {
        if (x0 > x1) std::swap(x0, x1);
        if (y0 > y1) std::swap(y0, y1);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) set(x, y, c);
        }
    }

    void hline(int x0, int x1, int y, Rgb c) { fill_rect(x0, y, x1, y, c); }
    void vline(int x, int y0, int y1, Rgb c) { fill_rect(x, y0, x, y1, c); }

    void dotted_hline(int x0, int x1, int y, Rgb c) {
        if (x0 > x1) std::swap(x0, x1);
        for (int x = x0; x <= x1; ++x) {
            if ((x & 3) < 2) set(x, y, c);
        }
    }

    void line(int x0, int y0, int x1, int y1, Rgb c) {
        int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
        int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        while (true) {
            set(x0, y0, c);
            if (x0 == x1 && y0 == y1) break;
            int e2 = 2 * err;
            if (e2 >= dy) {
                err += dy;
                x0 += sx;
            }
            if (e2 <= dx) {
                err += dx;
                y0 += sy;
            }
        }
    }

    void triangle_up(int cx, int cy, int size, Rgb c) {
        for (int row = 0; row <= size; ++row) {
            int half = row * size / std::max(size, 1);
            hline(cx - half, cx + half, cy - size / 2 + row, c);
        }
    }

    void triangle_down(int cx, int cy, int size, Rgb c) {
        for (int row = 0; row <= size; ++row) {
            int half = (size - row) * size / std::max(size, 1);
            hline(cx - half, cx + half, cy - size / 2 + row, c);
        }
    }

    void text(int x, int y, std::string_view s, Rgb c) {
        int cx = x;
        for (char raw : s) {
            char ch = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
            const std::uint8_t* rows = find_glyph(ch);
            if (rows) {
                for (int r = 0; r < 7; ++r) {
                    for (int col = 0; col < 5; ++col) {
                        if (rows[r] & (1 << (4 - col))) set(cx + col, y + r, c);
                    }
                }
            }
            cx += 6;
        }
    }

private:
    int w_, h_;
    std::vector<std::uint8_t> px_;
};

std::string short_number(double v) {
    char buf[48];
    if (std::abs(v) >= 1e6 || (std::abs(v) < 1e-3 && v != 0)) {
        std::snprintf(buf, sizeof(buf), "%.3e", v);
    } else {
        std::snprintf(buf, sizeof(buf), "%.2f", v);
    }
    return buf;
}

struct PlotArea {
    int left, right, top, bottom;  // inclusive pixel bounds
    double vmin, vmax;

    int x_center(std::size_t i, std::size_t n) const {
        double slot = static_cast<double>(right - left + 1) / static_cast<double>(n);
        return left + static_cast<int>(std::lround(slot * (static_cast<double>(i) + 0.5)));
    }
    int slot_px(std::size_t n) const {
        return std::max(1, (right - left + 1) / static_cast<int>(n));
    }
    int y_of(double v) const {
        double t = (v - vmin) / (vmax - vmin);
        return bottom - static_cast<int>(std::lround(t * (bottom - top)));
    }
};

void widen(double& vmin, double& vmax, const market::Series& values) {
    for (const auto& v : values) {
        if (v) {
            vmin = std::min(vmin, *v);
            vmax = std::max(vmax, *v);
        }
    }
}

void draw_panel(Canvas& canvas, const ChartSpec& spec, const Panel& panel, int top, bool last) {
    const int label_h = 14;
    const int bottom_margin = last ? 16 : 4;
    PlotArea area;
    area.left = 70;
    area.right = spec.width - 12;
    area.top = top + label_h;
    area.bottom = top + panel.height_px - bottom_margin;
    if (area.bottom <= area.top || area.right <= area.left) return;

    // value range over everything the panel shows
    double vmin = std::numeric_limits<double>::infinity();
    double vmax = -std::numeric_limits<double>::infinity();
    if (panel.ohlc) {
        for (double v : panel.ohlc->low) vmin = std::min(vmin, v);
        for (double v : panel.ohlc->high) vmax = std::max(vmax, v);
    }
    for (const auto& s : panel.lines) widen(vmin, vmax, s.values);
    for (const auto& s : panel.bars) {
        widen(vmin, vmax, s.values);
        vmin = std::min(vmin, 0.0);
        vmax = std::max(vmax, 0.0);
    }
    for (double g : panel.guides) {
        vmin = std::min(vmin, g);
        vmax = std::max(vmax, g);
    }
    if (!std::isfinite(vmin) || !std::isfinite(vmax)) {
        vmin = 0;
        vmax = 1;
    }
    if (vmin == vmax) {
        vmin -= 1;
        vmax += 1;
    }
    double pad = (vmax - vmin) * 0.05;
    area.vmin = vmin - pad;
    area.vmax = vmax + pad;

    const std::size_t n = spec.dates.size();

    // frame + labels
    canvas.hline(area.left, area.right, area.top, kBorder);
    canvas.hline(area.left, area.right, area.bottom, kBorder);
    canvas.vline(area.left, area.top, area.bottom, kBorder);
    canvas.vline(area.right, area.top, area.bottom, kBorder);
    canvas.text(area.left, top + 3, panel.name, kText);
    canvas.text(2, area.top - 3, short_number(area.vmax), kText);
    canvas.text(2, area.bottom - 4, short_number(area.vmin), kText);
    if (last && n > 0) {
        canvas.text(area.left, area.bottom + 4, spec.dates.front().to_string(), kText);
        std::string end_date = spec.dates.back().to_string();
        canvas.text(area.right - static_cast<int>(end_date.size()) * 6, area.bottom + 4,
                    end_date, kText);
    }
    for (double g : panel.guides) {
        canvas.dotted_hline(area.left, area.right, area.y_of(g), kGuide);
    }

    if (n == 0) return;

    // histogram bars first so lines stay visible on top
    for (const auto& s : panel.bars) {
        int half = std::max(1, area.slot_px(n) / 3);
        int y0 = area.y_of(std::clamp(0.0, area.vmin, area.vmax));
        bool is_volume = panel.kind == PanelKind::histogram;
        for (std::size_t i = 0; i < n && i < s.values.size(); ++i) {
            if (!s.values[i]) continue;
            int x = area.x_center(i, n);
            int y1 = area.y_of(*s.values[i]);
            Rgb color = is_volume ? kVolumeBar : (*s.values[i] >= 0 ? kUpCandle : kDownCandle);
            canvas.fill_rect(x - half, std::min(y0, y1), x + half, std::max(y0, y1), color);
        }
    }

    if (panel.ohlc) {
        const auto& ohlc = *panel.ohlc;
        int half = std::max(1, area.slot_px(n) * 3 / 10);
        for (std::size_t i = 0; i < n && i < ohlc.close.size(); ++i) {
            int x = area.x_center(i, n);
            bool up = ohlc.close[i] >= ohlc.open[i];
            Rgb color = up ? kUpCandle : kDownCandle;
            canvas.vline(x, area.y_of(ohlc.high[i]), area.y_of(ohlc.low[i]), color);
            int body_top = area.y_of(std::max(ohlc.open[i], ohlc.close[i]));
            int body_bottom = area.y_of(std::min(ohlc.open[i], ohlc.close[i]));
            canvas.fill_rect(x - half, body_top, x + half, body_bottom, color);
        }
    }

    int palette_index = 0;
    for (const auto& s : panel.lines) {
        Rgb color = kLinePalette[palette_index % std::size(kLinePalette)];
        ++palette_index;
        bool have_prev = false;
        int px = 0, py = 0;
        for (std::size_t i = 0; i < n && i < s.values.size(); ++i) {
            if (!s.values[i]) {
                have_prev = false;  // break the polyline across undefined gaps
                continue;
            }
            int x = area.x_center(i, n);
            int y = area.y_of(*s.values[i]);
            if (have_prev) {
                canvas.line(px, py, x, y, color);
            } else {
                canvas.set(x, y, color);
            }
            px = x;
            py = y;
            have_prev = true;
        }
    }

    for (const auto& marker : panel.markers) {
        auto it = std::find(spec.dates.begin(), spec.dates.end(), marker.date);
        if (it == spec.dates.end()) continue;
        std::size_t i = static_cast<std::size_t>(it - spec.dates.begin());
        int x = area.x_center(i, n);
        int y = area.y_of(marker.price);
        if (marker.kind == MarkerKind::buy) {
            canvas.triangle_up(x, y + 8, 7, kBuyMarker);
        } else {
            canvas.triangle_down(x, y - 8, 7, kSellMarker);
        }
    }
}

} // namespace

std::vector<std::uint8_t> render_png(const ChartSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0) {
        throw Error::chart("chart spec has zero dimensions");
    }
    if (spec.panels.empty()) throw Error::chart("chart spec has no panels");
    int total = 0;
    for (const auto& panel : spec.panels) total += panel.height_px;
    if (total != spec.height) {
        throw Error::chart("panel heights must sum to the chart height");
    }

    Canvas canvas(spec.width, spec.height);
    canvas.text(2, 2, spec.title, kText);
    if (spec.truncated) {
        canvas.text(spec.width - 6 * 11, 2, "(truncated)", kSellMarker);
    }

    int top = 0;
    for (std::size_t i = 0; i < spec.panels.size(); ++i) {
        draw_panel(canvas, spec, spec.panels[i], top, i + 1 == spec.panels.size());
        top += spec.panels[i].height_px;
    }
    return encode_png(spec.width, spec.height, canvas.pixels());
}

} // namespace finvision::charting
