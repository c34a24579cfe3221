/**
 * @file ait.cpp
 */
#include "cephforge/ait.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <exception>

#include "cephforge/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cephforge {

GraphDistances graph_distances(const AnatomySchema& schema) {
    const int n = schema.landmark_count();
    const auto adj = schema.adjacency();

    GraphDistances out;
    out.node_count = n;
    for (const auto& c : schema.critical_centers) out.critical_ids.push_back(c.index);
    const std::size_t k = out.critical_ids.size();
    out.hops.assign(static_cast<std::size_t>(n) * k, -1);

    for (std::size_t ci = 0; ci < k; ++ci) {
        const int start = out.critical_ids[ci] - 1;
        std::vector<int> dist(static_cast<std::size_t>(n), -1);
        std::deque<int> queue{start};
        dist[static_cast<std::size_t>(start)] = 0;
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            for (int v : adj[static_cast<std::size_t>(u)]) {
                if (dist[static_cast<std::size_t>(v)] < 0) {
                    dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
                    queue.push_back(v);
                }
            }
        }
        for (int v = 0; v < n; ++v) {
            if (dist[static_cast<std::size_t>(v)] < 0)
                throw ValidationError("graph_distances: node " + std::to_string(v + 1) +
                                      " unreachable from critical center " +
                                      std::to_string(out.critical_ids[ci]));
            out.hops[static_cast<std::size_t>(v) * k + ci] = dist[static_cast<std::size_t>(v)];
        }
    }
    return out;
}

NodeColoring color_nodes(const AnatomySchema& schema) {
    const GraphDistances dist = graph_distances(schema);
    const std::size_t k = dist.critical_ids.size();
    const int n = schema.landmark_count();

    std::vector<Rgb> critical_colors(k);
    for (std::size_t ci = 0; ci < k; ++ci)
        critical_colors[ci] = to_real(schema.critical_centers[ci].color);

    NodeColoring out;
    out.critical_ids = dist.critical_ids;
    out.colors.resize(static_cast<std::size_t>(n));
    out.weights.assign(static_cast<std::size_t>(n), std::vector<double>(k, 0.0));

    for (int id = 1; id <= n; ++id) {
        auto& w = out.weights[static_cast<std::size_t>(id - 1)];

        // critical nodes keep their own color exactly
        bool critical = false;
        for (std::size_t ci = 0; ci < k; ++ci) {
            if (dist.critical_ids[ci] == id) {
                w[ci] = 1.0;
                out.colors[static_cast<std::size_t>(id - 1)] = critical_colors[ci];
                critical = true;
                break;
            }
        }
        if (critical) continue;

        double total = 0.0;
        for (std::size_t ci = 0; ci < k; ++ci) {
            w[ci] = 1.0 / static_cast<double>(dist.at(id, static_cast<int>(ci)));
            total += w[ci];
        }
        Rgb mixed;
        for (std::size_t ci = 0; ci < k; ++ci) {
            w[ci] /= total;
            mixed = mixed + w[ci] * critical_colors[ci];
        }
        out.colors[static_cast<std::size_t>(id - 1)] = mixed;
    }
    return out;
}

std::vector<Rgb> gradient_edge(const Rgb& c1, const Rgb& c2, int d) {
    if (d < 1) throw ConfigError("gradient_edge: sample count must be >= 1");
    std::vector<Rgb> ramp(static_cast<std::size_t>(d));
    if (d == 1) {
        ramp[0] = c1;
        return ramp;
    }
    const Rgb step = c2 - c1;
    for (int t = 0; t < d; ++t)
        ramp[static_cast<std::size_t>(t)] =
            c1 + (static_cast<double>(t) / static_cast<double>(d - 1)) * step;
    ramp[0] = c1;
    ramp[static_cast<std::size_t>(d - 1)] = c2;
    return ramp;
}

namespace {

struct PixelPos {
    int x = 0;
    int y = 0;
};

/// Bresenham midpoint walk, endpoints included.
std::vector<PixelPos> line_pixels(PixelPos a, PixelPos b) {
    std::vector<PixelPos> px;
    int dx = std::abs(b.x - a.x);
    int dy = -std::abs(b.y - a.y);
    int sx = a.x < b.x ? 1 : -1;
    int sy = a.y < b.y ? 1 : -1;
    int err = dx + dy;
    int x = a.x, y = a.y;
    while (true) {
        px.push_back({x, y});
        if (x == b.x && y == b.y) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y += sy;
        }
    }
    return px;
}

void stamp_square(TopologyImage& img, int x, int y, int thickness, Rgb8 color) {
    const int lo = -(thickness - 1) / 2;
    const int hi = thickness / 2;
    for (int oy = lo; oy <= hi; ++oy) {
        const int py = y + oy;
        if (py < 0 || py >= img.height) continue;
        for (int ox = lo; ox <= hi; ++ox) {
            const int px = x + ox;
            if (px < 0 || px >= img.width) continue;
            img.at(px, py) = color;
        }
    }
}

void fill_disc(TopologyImage& img, int cx, int cy, int radius, Rgb8 color) {
    const int r2 = radius * radius;
    for (int oy = -radius; oy <= radius; ++oy) {
        const int py = cy + oy;
        if (py < 0 || py >= img.height) continue;
        for (int ox = -radius; ox <= radius; ++ox) {
            if (ox * ox + oy * oy > r2) continue;
            const int px = cx + ox;
            if (px < 0 || px >= img.width) continue;
            img.at(px, py) = color;
        }
    }
}

}  // namespace

TopologyImage rasterize(const LandmarkSet& set, const AnatomySchema& schema, int size,
                        const RasterStyle& style) {
    if (size < 32) throw ConfigError("rasterize: size must be >= 32, got " + std::to_string(size));
    if (style.node_radius_px < 0 || style.edge_thickness_px < 1)
        throw ConfigError("rasterize: need node_radius_px >= 0 and edge_thickness_px >= 1");
    if (set.width <= 0 || set.height <= 0)
        throw ValidationError("rasterize: landmark set has no image dimensions");
    if (static_cast<int>(set.points.size()) != schema.landmark_count())
        throw ValidationError("rasterize: landmark count does not match schema");

    const NodeColoring coloring = color_nodes(schema);

    TopologyImage img;
    img.width = size;
    img.height = size;
    img.pixels.assign(static_cast<std::size_t>(size) * size, style.background);

    // landmark positions scaled into the output raster
    const double fx = static_cast<double>(size) / set.width;
    const double fy = static_cast<double>(size) / set.height;
    std::vector<PixelPos> pos(set.points.size());
    for (std::size_t i = 0; i < set.points.size(); ++i) {
        pos[i] = {static_cast<int>(std::nearbyint(set.points[i].x * fx)),
                  static_cast<int>(std::nearbyint(set.points[i].y * fy))};
    }

    // edges first: ramp length is the rounded Euclidean pixel distance,
    // advanced proportionally per Bresenham step
    for (auto [a, b] : schema.edges) {
        const PixelPos pa = pos[static_cast<std::size_t>(a - 1)];
        const PixelPos pb = pos[static_cast<std::size_t>(b - 1)];
        const Rgb ca = coloring.colors[static_cast<std::size_t>(a - 1)];
        const Rgb cb = coloring.colors[static_cast<std::size_t>(b - 1)];

        const double len = std::hypot(static_cast<double>(pb.x - pa.x),
                                      static_cast<double>(pb.y - pa.y));
        const int d = std::max(1, static_cast<int>(std::nearbyint(len)));
        const std::vector<Rgb> ramp = gradient_edge(ca, cb, d);
        const std::vector<PixelPos> steps = line_pixels(pa, pb);

        const std::size_t n_steps = steps.size();
        for (std::size_t i = 0; i < n_steps; ++i) {
            std::size_t t = 0;
            if (n_steps > 1)
                t = static_cast<std::size_t>(std::nearbyint(
                    static_cast<double>(i) * static_cast<double>(d - 1) /
                    static_cast<double>(n_steps - 1)));
            stamp_square(img, steps[i].x, steps[i].y, style.edge_thickness_px, quantize(ramp[t]));
        }
    }

    // nodes overdraw edge ends
    for (std::size_t i = 0; i < pos.size(); ++i)
        fill_disc(img, pos[i].x, pos[i].y, style.node_radius_px, quantize(coloring.colors[i]));

    return img;
}

std::vector<TopologyImage> rasterize_batch(std::span<const LandmarkSet> sets,
                                           const AnatomySchema& schema, int size,
                                           const RasterStyle& style) {
    std::vector<TopologyImage> out(sets.size());
    const std::int64_t n = static_cast<std::int64_t>(sets.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] =
                rasterize(sets[static_cast<std::size_t>(i)], schema, size, style);
        } catch (...) {
#pragma omp critical(cephforge_raster_batch)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace cephforge
