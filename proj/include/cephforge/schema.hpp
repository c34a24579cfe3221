/**
 * @file schema.hpp
 * @brief Landmark schema: identities, anatomical graph, critical centers,
 *        angle constraints, plus landmark-set validation and angle
 *        measurement.
 *
 * The shipped default schema has 38 landmarks; the machinery accepts any
 * connected graph over contiguous ids 1..N so that small synthetic schemas
 * can be built in tests.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cephforge/geometry.hpp"

#include <nlohmann/json_fwd.hpp>

namespace cephforge {

struct LandmarkId {
    int index = 0;       // 1-based, contiguous
    std::string name;
};

/// Unsigned angle constraint at `vertex` between the rays toward `ray_a`
/// and `ray_b`. `coupled` are the landmark ids that move rigidly with
/// `ray_b` when the angle is resampled; it never contains vertex or ray_a.
struct AngleConstraint {
    std::string name;
    int vertex = 0;
    int ray_a = 0;
    int ray_b = 0;
    double min_deg = 0.0;
    double max_deg = 0.0;
    std::vector<int> coupled;
};

struct CriticalCenter {
    int index = 0;
    Rgb8 color;
};

struct AnatomySchema {
    std::vector<LandmarkId> landmarks;            // landmarks[i].index == i + 1
    std::vector<std::pair<int, int>> edges;       // normalized first < second
    std::vector<CriticalCenter> critical_centers; // ordered, distinct colors
    std::vector<AngleConstraint> constraints;
    std::map<int, std::vector<int>> neighbor_groups;

    int landmark_count() const { return static_cast<int>(landmarks.size()); }
    bool has_landmark(int id) const { return id >= 1 && id <= landmark_count(); }
    const std::string& name_of(int id) const;
    bool is_critical(int id) const;

    /// 0-based adjacency lists (node i is landmark id i + 1).
    std::vector<std::vector<int>> adjacency() const;
};

/// One annotated landmark set in pixel coordinates.
struct LandmarkSet {
    std::vector<Point2> points;   // points[i] is landmark id i + 1
    int width = 0;
    int height = 0;
    double spacing_mm_per_px = 0.0;
    std::vector<std::string> tags;  // kept sorted and unique

    const Point2& at(int id) const { return points[static_cast<std::size_t>(id - 1)]; }
    Point2& at(int id) { return points[static_cast<std::size_t>(id - 1)]; }
};

// ---- schema I/O -----------------------------------------------------------

/// Parses and fully validates a schema. Throws ParseError on malformed
/// input and ValidationError naming the violated rule (e.g. a disconnected
/// graph reports the unreachable component).
AnatomySchema parse_schema(const nlohmann::json& doc);
AnatomySchema parse_schema_text(const std::string& text);
AnatomySchema load_schema(const std::filesystem::path& path);

/// Re-checks every AnatomySchema invariant; throws ValidationError.
void check_schema(const AnatomySchema& schema);

nlohmann::json schema_to_json(const AnatomySchema& schema);

// ---- annotation I/O -------------------------------------------------------

LandmarkSet annotation_from_json(const nlohmann::json& doc);
LandmarkSet annotation_from_text(const std::string& text);
LandmarkSet load_annotation(const std::filesystem::path& path);
nlohmann::json annotation_to_json(const LandmarkSet& set);
void save_annotation(const LandmarkSet& set, const std::filesystem::path& path);

// ---- measurement & validation ---------------------------------------------

/// Unsigned angle in degrees, range [0, 180], at the constraint vertex.
/// Throws DegenerateInputError if either ray endpoint coincides with the
/// vertex.
double measure_angle(const LandmarkSet& set, const AngleConstraint& c);

struct Violation {
    std::string rule;    // short machine-readable tag, e.g. "constraint-range"
    std::string detail;  // human-readable description
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string summary() const;
};

/// Reports every violated LandmarkSet invariant and every constraint whose
/// measured angle falls outside its declared range. Never throws.
ValidationReport validate_landmark_set(const LandmarkSet& set, const AnatomySchema& schema);

}  // namespace cephforge
