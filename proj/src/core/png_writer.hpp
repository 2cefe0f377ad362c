#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace finvision::charting {

// Encodes 8-bit RGB pixels as a PNG. Fixed filter (none) and zlib level keep
// the output a pure function of the pixel buffer.
std::vector<std::uint8_t> encode_png(int width, int height,
                                     std::span<const std::uint8_t> rgb);

} // namespace finvision::charting
