#include "core/png_writer.hpp"

#include "core/errors.hpp"

#include <zlib.h>

#include <cstring>

namespace finvision::charting {
namespace {

void push_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void push_chunk(std::vector<std::uint8_t>& out, const char type[4],
                std::span<const std::uint8_t> data) {
    push_u32_be(out, static_cast<std::uint32_t>(data.size()));
    std::size_t type_at = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, out.data() + type_at, static_cast<uInt>(4 + data.size()));
    push_u32_be(out, static_cast<std::uint32_t>(crc));
}

} // namespace

std::vector<std::uint8_t> encode_png(int width, int height,
                                     std::span<const std::uint8_t> rgb) {
    if (width <= 0 || height <= 0) throw Error::chart("PNG dimensions must be positive");
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3) {
        throw Error::chart("PNG pixel buffer size mismatch");
    }

    // One filter byte (none) per scanline.
    const std::size_t stride = static_cast<std::size_t>(width) * 3;
    std::vector<std::uint8_t> raw;
    raw.reserve((stride + 1) * height);
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);
        raw.insert(raw.end(), rgb.begin() + y * stride, rgb.begin() + (y + 1) * stride);
    }

    uLongf compressed_size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(compressed_size);
    if (compress2(compressed.data(), &compressed_size, raw.data(),
                  static_cast<uLong>(raw.size()), 6) != Z_OK) {
        throw Error::internal("zlib compression failed");
    }
    compressed.resize(compressed_size);

    std::vector<std::uint8_t> out;
    static const std::uint8_t signature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    out.insert(out.end(), signature, signature + 8);

    std::vector<std::uint8_t> ihdr;
    push_u32_be(ihdr, static_cast<std::uint32_t>(width));
    push_u32_be(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type: truecolor RGB
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter
    ihdr.push_back(0);  // interlace
    push_chunk(out, "IHDR", ihdr);
    push_chunk(out, "IDAT", compressed);
    push_chunk(out, "IEND", {});
    return out;
}

} // namespace finvision::charting
