/**
 * @file reference.hpp
 * @brief Serial brute-force reference implementations.
 *
 * These deliberately take a different route than the library (atan2 vs
 * acos, Floyd-Warshall vs BFS, explicit 3x3 matrices, single-loop metric
 * pooling, exhaustive subset enumeration) and stay unoptimized. Tests
 * compare the OpenMP kernels against them; the benchmark uses them as the
 * serial baseline. Never linked into the shipping library or CLI.
 */
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cephforge/geometry.hpp"
#include "cephforge/heatmap.hpp"
#include "cephforge/mira.hpp"
#include "cephforge/pdg.hpp"
#include "cephforge/schema.hpp"

namespace cephforge::ref {

/// Unsigned angle at v between rays to a and b, via atan2 of each ray.
double angle_deg(Point2 a, Point2 v, Point2 b);

/// Affine through an explicit homogeneous 3x3 matrix product.
Point2 affine_apply(Point2 p, const GlobalAffine& affine);

/// All-pairs hop counts by Floyd-Warshall; [i][j] for 0-based nodes.
std::vector<std::vector<int>> all_pairs_hops(const AnatomySchema& schema);

/// Node colors recomputed from Floyd-Warshall distances with long double
/// accumulation; critical nodes get their assigned colors.
std::vector<Rgb> node_colors(const AnatomySchema& schema);

/// Single-loop mean squared difference.
double mse(const HeatmapStack& a, const HeatmapStack& b);

struct EvalSummary {
    double mre_mm = 0.0;
    double sd_mm = 0.0;
    std::vector<double> sdr;  // aligned with thresholds
};

/// Single-loop pooled metrics (population SD, inclusive thresholds).
EvalSummary evaluate(const std::vector<std::pair<LandmarkSet, LandmarkSet>>& pairs,
                     const std::vector<double>& thresholds_mm);

/// Exhaustive prompt count over every attribute bitmask; needs at most
/// 20 attribute phrases.
std::uint64_t enumerate_prompts(const PromptLexicon& lex);

/// Serial one-plane-at-a-time Gaussian encoding (same grid convention as
/// the library, naive loops, no OpenMP).
HeatmapStack encode(const LandmarkSet& set, const CodecConfig& cfg);

}  // namespace cephforge::ref
