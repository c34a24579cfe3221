/**
 * @file heatmap.cpp
 */
#include "cephforge/heatmap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "cephforge/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cephforge {

static_assert(std::endian::native == std::endian::little,
              "heatmap dump writer assumes a little-endian host");

void check_codec_config(const CodecConfig& cfg) {
    if (cfg.height < 8 || cfg.width < 8)
        throw ConfigError("heatmap size must be at least 8x8");
    if (!(cfg.sigma > 0.0)) throw ConfigError("sigma must be > 0");
}

bool DecodedLandmarks::any_flat() const {
    return std::find(flat_planes.begin(), flat_planes.end(), true) != flat_planes.end();
}

HeatmapStack encode(const LandmarkSet& set, const CodecConfig& cfg) {
    check_codec_config(cfg);
    if (set.width <= 0 || set.height <= 0)
        throw ValidationError("encode: landmark set has no image dimensions");

    const double stride_x = static_cast<double>(set.width) / cfg.width;
    const double stride_y = static_cast<double>(set.height) / cfg.height;
    if (std::abs(stride_x - stride_y) > 1e-9 * std::max(stride_x, stride_y))
        throw ConfigError("encode: heatmap size must preserve the image aspect (stride_x " +
                          std::to_string(stride_x) + " != stride_y " + std::to_string(stride_y) +
                          ")");
    if (stride_x < 1.0)
        throw ConfigError("encode: heatmap larger than the input (stride must be >= 1)");

    HeatmapStack stack;
    stack.planes = static_cast<int>(set.points.size());
    stack.height = cfg.height;
    stack.width = cfg.width;
    stack.stride = stride_x;
    stack.data.assign(
        static_cast<std::size_t>(stack.planes) * cfg.height * cfg.width, 0.0);

    const double inv_two_sigma2 = 1.0 / (2.0 * cfg.sigma * cfg.sigma);

#pragma omp parallel for schedule(static)
    for (int k = 0; k < stack.planes; ++k) {
        const Point2 p = set.points[static_cast<std::size_t>(k)];
        // cell c spans input pixels [c*stride, (c+1)*stride); its center is
        // (c + 0.5)*stride, so any in-bounds coordinate sits within half a
        // cell of some lattice point
        const double ux = p.x / stride_x - 0.5;
        const double uy = p.y / stride_y - 0.5;

        // peak normalization: the nearest cell gets exactly 1
        const double cx = std::clamp(std::nearbyint(ux), 0.0, static_cast<double>(cfg.width - 1));
        const double cy = std::clamp(std::nearbyint(uy), 0.0, static_cast<double>(cfg.height - 1));
        const double peak_d2 = (cx - ux) * (cx - ux) + (cy - uy) * (cy - uy);
        const double scale = std::exp(peak_d2 * inv_two_sigma2);

        auto plane = stack.plane(k);
        for (int y = 0; y < cfg.height; ++y) {
            const double dy2 = (y - uy) * (y - uy);
            for (int x = 0; x < cfg.width; ++x) {
                const double d2 = (x - ux) * (x - ux) + dy2;
                plane[static_cast<std::size_t>(y) * cfg.width + x] =
                    scale * std::exp(-d2 * inv_two_sigma2);
            }
        }
    }
    return stack;
}

DecodedLandmarks decode(const HeatmapStack& stack, const CodecConfig& cfg, int out_width,
                        int out_height) {
    if (stack.planes <= 0 || stack.height <= 0 || stack.width <= 0)
        throw ValidationError("decode: empty heatmap stack");
    if (out_width <= 0 || out_height <= 0) throw ConfigError("decode: output size must be positive");
    for (const double v : stack.data)
        if (!std::isfinite(v)) throw ValidationError("decode: non-finite heatmap value");

    const double sx = static_cast<double>(out_width) / stack.width;
    const double sy = static_cast<double>(out_height) / stack.height;

    DecodedLandmarks out;
    out.points.resize(static_cast<std::size_t>(stack.planes));
    out.flat_planes.assign(static_cast<std::size_t>(stack.planes), false);

    // At a border cell one neighbor is missing, so "which neighbor is
    // larger" degenerates. A peak at cell center would put the inner
    // neighbor at exactly exp(-1/(2 sigma^2)) times the peak; comparing
    // against that threshold recovers which side of the center the true
    // position lies on.
    const double border_ratio = std::exp(-1.0 / (2.0 * cfg.sigma * cfg.sigma));

#pragma omp parallel for schedule(static)
    for (int k = 0; k < stack.planes; ++k) {
        const auto plane = stack.plane(k);
        const int w = stack.width;
        const int h = stack.height;

        // row-major scan with strict greater keeps ties at smallest (y, x)
        int best_x = 0, best_y = 0;
        double best = plane[0];
        bool flat = true;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double v = plane[static_cast<std::size_t>(y) * w + x];
                if (v != best) flat = false;
                if (v > best) {
                    best = v;
                    best_x = x;
                    best_y = y;
                }
            }
        }

        double ux, uy;
        if (flat) {
            ux = (w - 1) / 2.0;
            uy = (h - 1) / 2.0;
            out.flat_planes[static_cast<std::size_t>(k)] = true;
        } else {
            ux = best_x;
            uy = best_y;
            if (cfg.refine_subpixel) {
                auto value = [&](int x, int y) -> double {
                    return plane[static_cast<std::size_t>(y) * w + x];
                };
                auto axis_shift = [&](int c, int limit, double lo_val, double hi_val,
                                      double peak) -> double {
                    if (c > 0 && c < limit - 1) {
                        if (hi_val > lo_val) return 0.25;
                        if (hi_val < lo_val) return -0.25;
                        return 0.0;
                    }
                    // border: compare the existing neighbor with the
                    // centered-peak expectation
                    const double inner = (c == 0) ? hi_val : lo_val;
                    const double expected = peak * border_ratio;
                    const double tol = 1e-9 * std::max(std::abs(inner), std::abs(expected));
                    if (std::abs(inner - expected) <= tol) return 0.0;
                    const double inward = (c == 0) ? 0.25 : -0.25;
                    return (inner > expected) ? inward : -inward;
                };
                const double peak = best;
                ux += axis_shift(best_x, w,
                                 best_x > 0 ? value(best_x - 1, best_y) : 0.0,
                                 best_x < w - 1 ? value(best_x + 1, best_y) : 0.0, peak);
                uy += axis_shift(best_y, h,
                                 best_y > 0 ? value(best_x, best_y - 1) : 0.0,
                                 best_y < h - 1 ? value(best_x, best_y + 1) : 0.0, peak);
            }
        }
        out.points[static_cast<std::size_t>(k)] = {(ux + 0.5) * sx, (uy + 0.5) * sy};
    }
    return out;
}

double mse_loss(const HeatmapStack& pred, const HeatmapStack& gt) {
    if (pred.planes != gt.planes || pred.height != gt.height || pred.width != gt.width)
        throw ValidationError("mse_loss: shape mismatch");
    if (pred.data.empty()) throw ValidationError("mse_loss: empty stacks");

    // per-plane partial sums, reduced serially in plane order: bit-identical
    // for any thread count
    std::vector<double> partial(static_cast<std::size_t>(pred.planes), 0.0);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < pred.planes; ++k) {
        const auto a = pred.plane(k);
        const auto b = gt.plane(k);
        double sum = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            sum += d * d;
        }
        partial[static_cast<std::size_t>(k)] = sum;
    }
    double total = 0.0;
    for (double s : partial) total += s;
    return total / static_cast<double>(pred.data.size());
}

void write_heatmap_dump(const HeatmapStack& stack, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write heatmap dump: " + path.string());
    const std::uint32_t header[3] = {static_cast<std::uint32_t>(stack.planes),
                                     static_cast<std::uint32_t>(stack.height),
                                     static_cast<std::uint32_t>(stack.width)};
    const float stride = static_cast<float>(stack.stride);
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    out.write(reinterpret_cast<const char*>(&stride), sizeof(stride));
    std::vector<float> quantized(stack.data.begin(), stack.data.end());
    out.write(reinterpret_cast<const char*>(quantized.data()),
              static_cast<std::streamsize>(quantized.size() * sizeof(float)));
    if (!out) throw IoError("write failed: " + path.string());
}

HeatmapStack read_heatmap_dump(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open heatmap dump: " + path.string());
    std::uint32_t header[3] = {};
    float stride = 0.0f;
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    in.read(reinterpret_cast<char*>(&stride), sizeof(stride));
    if (!in) throw ParseError("heatmap dump: truncated header: " + path.string());

    HeatmapStack stack;
    stack.planes = static_cast<int>(header[0]);
    stack.height = static_cast<int>(header[1]);
    stack.width = static_cast<int>(header[2]);
    stack.stride = stride;
    if (stack.planes <= 0 || stack.height <= 0 || stack.width <= 0)
        throw ParseError("heatmap dump: bad header: " + path.string());
    const std::size_t count =
        static_cast<std::size_t>(stack.planes) * stack.height * stack.width;
    std::vector<float> quantized(count);
    in.read(reinterpret_cast<char*>(quantized.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (!in) throw ParseError("heatmap dump: truncated data: " + path.string());
    stack.data.assign(quantized.begin(), quantized.end());
    return stack;
}

}  // namespace cephforge
