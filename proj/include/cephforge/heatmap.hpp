/**
 * @file heatmap.hpp
 * @brief Gaussian heatmap encoder / decoder and the MSE training target.
 *
 * Grid convention: cell (cx, cy) of a h x w plane covers the input-pixel
 * span [cx*stride, (cx+1)*stride), i.e. continuous cell coordinates are
 * u = (x + 0.5) / stride - 0.5. This keeps the nearest cell of any
 * in-bounds landmark inside the plane, with per-axis quantization error
 * at most stride / 2.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cephforge/geometry.hpp"
#include "cephforge/schema.hpp"

namespace cephforge {

struct CodecConfig {
    int height = 128;
    int width = 128;
    double sigma = 2.0;          // heatmap cells
    bool refine_subpixel = true; // quarter-cell shift toward the larger neighbor
};

void check_codec_config(const CodecConfig& cfg);

struct HeatmapStack {
    int planes = 0;
    int height = 0;
    int width = 0;
    double stride = 1.0;       // input pixels per heatmap cell
    std::vector<double> data;  // plane-major, then row-major

    std::span<double> plane(int k) {
        const std::size_t sz = static_cast<std::size_t>(height) * width;
        return {data.data() + static_cast<std::size_t>(k) * sz, sz};
    }
    std::span<const double> plane(int k) const {
        const std::size_t sz = static_cast<std::size_t>(height) * width;
        return {data.data() + static_cast<std::size_t>(k) * sz, sz};
    }
    double at(int k, int y, int x) const {
        return data[(static_cast<std::size_t>(k) * height + static_cast<std::size_t>(y)) * width +
                    static_cast<std::size_t>(x)];
    }
};

/// One plane per landmark: a Gaussian of std sigma centered at the
/// landmark's continuous cell position, rescaled so the nearest cell holds
/// exactly 1. Requires the set extent to map onto the plane with one
/// uniform stride (width / cfg.width == height / cfg.height).
HeatmapStack encode(const LandmarkSet& set, const CodecConfig& cfg);

struct DecodedLandmarks {
    std::vector<Point2> points;      // input-pixel coordinates
    std::vector<bool> flat_planes;   // true where the plane carried no signal
    bool any_flat() const;
};

/// Per plane: argmax cell (ties toward smallest (y, x)), optional
/// quarter-cell refinement toward the larger neighbor per axis, then scale
/// to (out_width, out_height) pixels.
DecodedLandmarks decode(const HeatmapStack& stack, const CodecConfig& cfg, int out_width,
                        int out_height);

/// Mean squared difference over all planes and cells.
double mse_loss(const HeatmapStack& pred, const HeatmapStack& gt);

// Debug dump: header (u32 n_planes, u32 h, u32 w, f32 stride), then
// float32 plane data, everything little-endian. Values are quantized to
// float32 at the dump boundary; the in-memory stack stays double.
void write_heatmap_dump(const HeatmapStack& stack, const std::filesystem::path& path);
HeatmapStack read_heatmap_dump(const std::filesystem::path& path);

}  // namespace cephforge
