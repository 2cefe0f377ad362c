#pragma once

#include "core/chart.hpp"

#include <cstdint>
#include <vector>

namespace finvision::charting {

// Rasterizes a ChartSpec to PNG bytes. Pure function of the spec: fixed
// palette, embedded font, no clock/locale/RNG input, so the same spec always
// renders to the same bytes on a given build.
std::vector<std::uint8_t> render_png(const ChartSpec& spec);

} // namespace finvision::charting
