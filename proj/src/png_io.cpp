/**
 * @file png_io.cpp
 */
#include "cephforge/png_io.hpp"

#include <cstring>
#include <fstream>

#include <zlib.h>

#include "cephforge/errors.hpp"

namespace cephforge {

namespace {

constexpr std::uint8_t kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
constexpr int kCompressionLevel = 6;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
               const std::vector<std::uint8_t>& payload) {
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    const uLong crc =
        crc32(0, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
    put_u32(out, static_cast<std::uint32_t>(crc));
}

std::vector<std::uint8_t> encode_png(int width, int height, const std::uint8_t* pixels,
                                     int channels, std::uint8_t color_type) {
    if (width <= 0 || height <= 0) throw ConfigError("png: dimensions must be positive");

    // filter byte 0 per scanline, then one deflate stream
    const std::size_t row = static_cast<std::size_t>(width) * channels;
    std::vector<std::uint8_t> raw((row + 1) * static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) {
        std::uint8_t* dst = raw.data() + static_cast<std::size_t>(y) * (row + 1);
        *dst = 0;
        std::memcpy(dst + 1, pixels + static_cast<std::size_t>(y) * row, row);
    }

    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()),
                  kCompressionLevel) != Z_OK)
        throw IoError("png: deflate failed");
    compressed.resize(bound);

    std::vector<std::uint8_t> ihdr;
    put_u32(ihdr, static_cast<std::uint32_t>(width));
    put_u32(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);           // bit depth
    ihdr.push_back(color_type);  // 0 gray, 2 rgb
    ihdr.push_back(0);           // deflate
    ihdr.push_back(0);           // adaptive filtering
    ihdr.push_back(0);           // no interlace

    std::vector<std::uint8_t> out;
    out.insert(out.end(), kSignature, kSignature + 8);
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", compressed);
    put_chunk(out, "IEND", {});
    return out;
}

}  // namespace

std::vector<std::uint8_t> encode_png_rgb(int width, int height,
                                         const std::uint8_t* rgb_interleaved) {
    return encode_png(width, height, rgb_interleaved, 3, 2);
}

std::vector<std::uint8_t> encode_png_gray(int width, int height, const std::uint8_t* gray) {
    return encode_png(width, height, gray, 1, 0);
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

PngInfo read_png_header(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open png: " + path.string());
    std::uint8_t head[8 + 8 + 13] = {};  // signature + IHDR length/type + IHDR payload
    in.read(reinterpret_cast<char*>(head), sizeof(head));
    if (!in) throw ParseError("png: truncated header: " + path.string());
    if (std::memcmp(head, kSignature, 8) != 0)
        throw ParseError("png: bad signature: " + path.string());
    if (std::memcmp(head + 12, "IHDR", 4) != 0)
        throw ParseError("png: IHDR not first chunk: " + path.string());

    auto u32 = [&](int offset) {
        return (static_cast<std::uint32_t>(head[offset]) << 24) |
               (static_cast<std::uint32_t>(head[offset + 1]) << 16) |
               (static_cast<std::uint32_t>(head[offset + 2]) << 8) |
               static_cast<std::uint32_t>(head[offset + 3]);
    };
    PngInfo info;
    info.width = static_cast<int>(u32(16));
    info.height = static_cast<int>(u32(20));
    info.bit_depth = head[24];
    info.color_type = head[25];
    return info;
}

}  // namespace cephforge
