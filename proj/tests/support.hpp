/**
 * @file support.hpp
 * @brief Shared test helpers: temp dirs, synthetic schemas, random graphs.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <unistd.h>

#include "cephforge/rng.hpp"
#include "cephforge/schema.hpp"

namespace cephforge::test {

class TempDir {
public:
    explicit TempDir(const std::string& label) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("cephforge_" + label + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Small hand-built schema: a path graph 1-2-...-n with the given critical
/// centers, no constraints.
inline AnatomySchema path_schema(int n, const std::vector<CriticalCenter>& centers) {
    AnatomySchema s;
    for (int i = 1; i <= n; ++i) s.landmarks.push_back({i, "P" + std::to_string(i)});
    for (int i = 1; i < n; ++i) s.edges.emplace_back(i, i + 1);
    s.critical_centers = centers;
    check_schema(s);
    return s;
}

/// Random connected schema of n nodes (spanning tree plus extra edges) with
/// k critical centers carrying distinct colors.
inline AnatomySchema random_connected_schema(Rng& rng, int n, int k) {
    AnatomySchema s;
    for (int i = 1; i <= n; ++i) s.landmarks.push_back({i, "N" + std::to_string(i)});
    for (int i = 2; i <= n; ++i) {
        const int parent = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i - 1)));
        s.edges.emplace_back(std::min(parent, i), std::max(parent, i));
    }
    const int extra = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    for (int e = 0; e < extra; ++e) {
        int a = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        int b = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (std::find(s.edges.begin(), s.edges.end(), std::make_pair(a, b)) == s.edges.end())
            s.edges.emplace_back(a, b);
    }
    std::sort(s.edges.begin(), s.edges.end());

    // k distinct centers with distinct colors
    std::vector<int> ids(static_cast<std::size_t>(n));
    std::iota(ids.begin(), ids.end(), 1);
    for (int j = 0; j < k; ++j) {
        const int pick =
            j + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - j)));
        std::swap(ids[static_cast<std::size_t>(j)], ids[static_cast<std::size_t>(pick)]);
    }
    for (int j = 0; j < k; ++j) {
        const auto v = static_cast<std::uint8_t>(40 * (j + 1));
        const Rgb8 color{static_cast<std::uint8_t>(255 - v), v,
                         static_cast<std::uint8_t>(37 * (j + 1))};
        s.critical_centers.push_back({ids[static_cast<std::size_t>(j)], color});
    }
    check_schema(s);
    return s;
}

/// LandmarkSet with the given points and square bounds.
inline LandmarkSet make_set(std::vector<Point2> points, int width, int height,
                            double spacing = 0.1) {
    LandmarkSet s;
    s.points = std::move(points);
    s.width = width;
    s.height = height;
    s.spacing_mm_per_px = spacing;
    return s;
}

}  // namespace cephforge::test
