/**
 * @file png_io.hpp
 * @brief Minimal deterministic PNG encode/inspect (zlib-backed).
 *
 * The encoder always emits the same chunk layout (IHDR, one IDAT, IEND)
 * with filter 0 scanlines and a fixed compression level, so identical
 * pixels produce identical bytes.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace cephforge {

/// 8-bit RGB, pixels row-major, 3 bytes each.
std::vector<std::uint8_t> encode_png_rgb(int width, int height,
                                         const std::uint8_t* rgb_interleaved);

/// 8-bit grayscale.
std::vector<std::uint8_t> encode_png_gray(int width, int height, const std::uint8_t* gray);

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

struct PngInfo {
    int width = 0;
    int height = 0;
    int bit_depth = 0;
    int color_type = 0;  // 0 = gray, 2 = rgb
};

/// Parses the IHDR only; enough to verify dimensions and pixel format.
PngInfo read_png_header(const std::filesystem::path& path);

}  // namespace cephforge
