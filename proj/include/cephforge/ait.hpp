/**
 * @file ait.hpp
 * @brief Anatomy-informed topology rendering: hop distances to the critical
 *        centers, reciprocal-distance color mixing, gradient edges, and the
 *        deterministic raster.
 *
 * Node colors depend only on graph topology; coordinates enter at
 * rasterization time only.
 */
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cephforge/geometry.hpp"
#include "cephforge/schema.hpp"

namespace cephforge {

/// Hop counts from every node to every critical center.
struct GraphDistances {
    int node_count = 0;
    std::vector<int> critical_ids;  // schema order
    std::vector<int> hops;          // node-major: hops[node * k + c]

    int at(int landmark_id, int critical_pos) const {
        return hops[static_cast<std::size_t>(landmark_id - 1) * critical_ids.size() +
                    static_cast<std::size_t>(critical_pos)];
    }
};

/// Breadth-first hop counts; requires a connected schema graph.
GraphDistances graph_distances(const AnatomySchema& schema);

struct NodeColoring {
    std::vector<Rgb> colors;                  // per landmark, real-valued
    std::vector<std::vector<double>> weights; // per landmark, normalized over centers
    std::vector<int> critical_ids;
};

/// Critical nodes keep their assigned colors (one-hot weights). Every other
/// node v mixes the critical colors with normalized reciprocal hop-distance
/// weights.
NodeColoring color_nodes(const AnatomySchema& schema);

/// Linear color ramp with d samples: first is exactly c1, last exactly c2;
/// d == 1 yields just c1.
std::vector<Rgb> gradient_edge(const Rgb& c1, const Rgb& c2, int d);

struct RasterStyle {
    int node_radius_px = 4;
    int edge_thickness_px = 2;
    Rgb8 background{0, 0, 0};
};

struct TopologyImage {
    int width = 0;
    int height = 0;
    std::vector<Rgb8> pixels;  // row-major

    Rgb8& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    const Rgb8& at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
};

/// Renders the landmark set to a size x size RGB raster: gradient edges
/// first (Bresenham stepping, ramp length = rounded Euclidean pixel length),
/// then node discs on top. No anti-aliasing; byte-deterministic.
/// Throws ConfigError for size < 32.
TopologyImage rasterize(const LandmarkSet& set, const AnatomySchema& schema, int size = 512,
                        const RasterStyle& style = {});

/// Batch version; parallel over images, each image rendered serially, so
/// results are byte-identical for any thread count.
std::vector<TopologyImage> rasterize_batch(std::span<const LandmarkSet> sets,
                                           const AnatomySchema& schema, int size = 512,
                                           const RasterStyle& style = {});

}  // namespace cephforge
