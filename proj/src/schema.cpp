/**
 * @file schema.cpp
 */
#include "cephforge/schema.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "cephforge/errors.hpp"

#include <nlohmann/json.hpp>

namespace cephforge {

using nlohmann::json;

const std::string& AnatomySchema::name_of(int id) const {
    if (!has_landmark(id)) throw ValidationError("unknown landmark id " + std::to_string(id));
    return landmarks[static_cast<std::size_t>(id - 1)].name;
}

bool AnatomySchema::is_critical(int id) const {
    for (const auto& c : critical_centers)
        if (c.index == id) return true;
    return false;
}

std::vector<std::vector<int>> AnatomySchema::adjacency() const {
    std::vector<std::vector<int>> adj(landmarks.size());
    for (auto [a, b] : edges) {
        adj[static_cast<std::size_t>(a - 1)].push_back(b - 1);
        adj[static_cast<std::size_t>(b - 1)].push_back(a - 1);
    }
    for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
    return adj;
}

namespace {

json parse_json_or_throw(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);  // exception message carries line/column
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
}

const json& require_field(const json& doc, const char* key, const std::string& origin) {
    auto it = doc.find(key);
    if (it == doc.end())
        throw ParseError(origin + ": missing field '" + key + "'");
    return *it;
}

int to_index(const json& v, const std::string& origin) {
    if (!v.is_number_integer())
        throw ParseError(origin + ": landmark index must be an integer");
    return v.get<int>();
}

}  // namespace

void check_schema(const AnatomySchema& schema) {
    const int n = schema.landmark_count();
    if (n < 2)
        throw ValidationError("schema must declare at least 2 landmarks");

    // ids contiguous 1..n and names unique
    std::set<std::string> names;
    for (int i = 0; i < n; ++i) {
        const auto& lm = schema.landmarks[static_cast<std::size_t>(i)];
        if (lm.index != i + 1)
            throw ValidationError("landmark indices must be contiguous 1..n; got " +
                                  std::to_string(lm.index) + " at position " + std::to_string(i));
        if (lm.name.empty())
            throw ValidationError("landmark " + std::to_string(lm.index) + " has an empty name");
        if (!names.insert(lm.name).second)
            throw ValidationError("duplicate landmark name '" + lm.name + "'");
    }

    std::set<std::pair<int, int>> seen_edges;
    for (auto [a, b] : schema.edges) {
        if (a < 1 || a > n || b < 1 || b > n)
            throw ValidationError("edge [" + std::to_string(a) + "," + std::to_string(b) +
                                  "] references an unknown landmark");
        if (a == b)
            throw ValidationError("self-loop edge at landmark " + std::to_string(a));
        if (a > b) std::swap(a, b);
        if (!seen_edges.insert({a, b}).second)
            throw ValidationError("duplicate edge [" + std::to_string(a) + "," +
                                  std::to_string(b) + "]");
    }

    // connectivity: BFS from node 0 must reach every node
    auto adj = schema.adjacency();
    std::vector<char> reached(static_cast<std::size_t>(n), 0);
    std::deque<int> queue{0};
    reached[0] = 1;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v : adj[static_cast<std::size_t>(u)]) {
            if (!reached[static_cast<std::size_t>(v)]) {
                reached[static_cast<std::size_t>(v)] = 1;
                queue.push_back(v);
            }
        }
    }
    std::vector<int> missing;
    for (int i = 0; i < n; ++i)
        if (!reached[static_cast<std::size_t>(i)]) missing.push_back(i + 1);
    if (!missing.empty()) {
        std::ostringstream os;
        os << "graph disconnected: component {";
        for (std::size_t i = 0; i < missing.size(); ++i)
            os << (i ? "," : "") << missing[i];
        os << "} unreachable from landmark 1";
        throw ValidationError(os.str());
    }

    if (schema.critical_centers.empty())
        throw ValidationError("schema declares no critical centers");
    std::set<int> crit_ids;
    std::set<std::tuple<int, int, int>> crit_colors;
    for (const auto& c : schema.critical_centers) {
        if (c.index < 1 || c.index > n)
            throw ValidationError("critical center " + std::to_string(c.index) +
                                  " is not a schema landmark");
        if (!crit_ids.insert(c.index).second)
            throw ValidationError("duplicate critical center " + std::to_string(c.index));
        if (!crit_colors.insert({c.color.r, c.color.g, c.color.b}).second)
            throw ValidationError("critical center colors must be pairwise distinct");
    }

    std::set<std::string> cnames;
    for (const auto& c : schema.constraints) {
        const std::string where = "constraint '" + c.name + "'";
        if (c.name.empty()) throw ValidationError("constraint with empty name");
        if (!cnames.insert(c.name).second)
            throw ValidationError("duplicate " + where);
        for (int id : {c.vertex, c.ray_a, c.ray_b})
            if (id < 1 || id > n)
                throw ValidationError(where + " references unknown landmark " + std::to_string(id));
        if (c.vertex == c.ray_a || c.vertex == c.ray_b || c.ray_a == c.ray_b)
            throw ValidationError(where + ": vertex, ray_a, ray_b must be distinct");
        if (!(c.min_deg < c.max_deg))
            throw ValidationError(where + ": min_deg must be < max_deg");
        for (int id : c.coupled) {
            if (id < 1 || id > n)
                throw ValidationError(where + " couples unknown landmark " + std::to_string(id));
            if (id == c.vertex || id == c.ray_a)
                throw ValidationError(where + ": coupled set must exclude vertex and ray_a");
        }
    }

    for (const auto& [id, group] : schema.neighbor_groups) {
        if (id < 1 || id > n)
            throw ValidationError("neighbor_groups references unknown landmark " +
                                  std::to_string(id));
        for (int g : group)
            if (g < 1 || g > n)
                throw ValidationError("neighbor group of " + std::to_string(id) +
                                      " references unknown landmark " + std::to_string(g));
    }
}

AnatomySchema parse_schema(const json& doc) {
    const std::string origin = "schema";
    if (!doc.is_object()) throw ParseError(origin + ": top level must be an object");

    AnatomySchema schema;

    for (const auto& lm : require_field(doc, "landmarks", origin)) {
        LandmarkId id;
        id.index = to_index(require_field(lm, "index", origin + ".landmarks"), origin);
        id.name = require_field(lm, "name", origin + ".landmarks").get<std::string>();
        schema.landmarks.push_back(std::move(id));
    }
    std::sort(schema.landmarks.begin(), schema.landmarks.end(),
              [](const LandmarkId& a, const LandmarkId& b) { return a.index < b.index; });

    for (const auto& e : require_field(doc, "edges", origin)) {
        if (!e.is_array() || e.size() != 2)
            throw ParseError(origin + ".edges: each edge must be a pair [i,j]");
        int a = to_index(e[0], origin + ".edges");
        int b = to_index(e[1], origin + ".edges");
        if (a > b) std::swap(a, b);
        schema.edges.emplace_back(a, b);
    }
    std::sort(schema.edges.begin(), schema.edges.end());

    for (const auto& c : require_field(doc, "critical_centers", origin)) {
        CriticalCenter cc;
        cc.index = to_index(require_field(c, "index", origin + ".critical_centers"), origin);
        const auto& rgb = require_field(c, "rgb", origin + ".critical_centers");
        if (!rgb.is_array() || rgb.size() != 3)
            throw ParseError(origin + ".critical_centers: rgb must be [r,g,b]");
        for (int k = 0; k < 3; ++k) {
            int v = to_index(rgb[static_cast<std::size_t>(k)], origin + ".critical_centers.rgb");
            if (v < 0 || v > 255)
                throw ParseError(origin + ".critical_centers: channel out of [0,255]");
        }
        cc.color = {static_cast<std::uint8_t>(rgb[0].get<int>()),
                    static_cast<std::uint8_t>(rgb[1].get<int>()),
                    static_cast<std::uint8_t>(rgb[2].get<int>())};
        schema.critical_centers.push_back(cc);
    }

    if (doc.contains("constraints")) {
        for (const auto& c : doc.at("constraints")) {
            const std::string where = origin + ".constraints";
            AngleConstraint ac;
            ac.name = require_field(c, "name", where).get<std::string>();
            ac.vertex = to_index(require_field(c, "vertex", where), where);
            ac.ray_a = to_index(require_field(c, "ray_a", where), where);
            ac.ray_b = to_index(require_field(c, "ray_b", where), where);
            ac.min_deg = require_field(c, "min_deg", where).get<double>();
            ac.max_deg = require_field(c, "max_deg", where).get<double>();
            if (c.contains("coupled"))
                for (const auto& id : c.at("coupled")) ac.coupled.push_back(to_index(id, where));
            std::sort(ac.coupled.begin(), ac.coupled.end());
            ac.coupled.erase(std::unique(ac.coupled.begin(), ac.coupled.end()), ac.coupled.end());
            // ray_b moves by definition; keep it out of the coupled list
            ac.coupled.erase(std::remove(ac.coupled.begin(), ac.coupled.end(), ac.ray_b),
                             ac.coupled.end());
            schema.constraints.push_back(std::move(ac));
        }
    }

    if (doc.contains("neighbor_groups")) {
        for (const auto& [key, group] : doc.at("neighbor_groups").items()) {
            int id = 0;
            try {
                id = std::stoi(key);
            } catch (const std::exception&) {
                throw ParseError(origin + ".neighbor_groups: key '" + key + "' is not an index");
            }
            std::vector<int> members;
            for (const auto& g : group) members.push_back(to_index(g, origin + ".neighbor_groups"));
            std::sort(members.begin(), members.end());
            schema.neighbor_groups[id] = std::move(members);
        }
    }

    check_schema(schema);
    return schema;
}

AnatomySchema parse_schema_text(const std::string& text) {
    return parse_schema(parse_json_or_throw(text, "schema"));
}

AnatomySchema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open schema file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_schema_text(buf.str());
    } catch (ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

json schema_to_json(const AnatomySchema& schema) {
    json doc;
    doc["landmarks"] = json::array();
    for (const auto& lm : schema.landmarks)
        doc["landmarks"].push_back({{"index", lm.index}, {"name", lm.name}});
    doc["edges"] = json::array();
    for (auto [a, b] : schema.edges) doc["edges"].push_back({a, b});
    doc["critical_centers"] = json::array();
    for (const auto& c : schema.critical_centers)
        doc["critical_centers"].push_back(
            {{"index", c.index}, {"rgb", {c.color.r, c.color.g, c.color.b}}});
    doc["constraints"] = json::array();
    for (const auto& c : schema.constraints)
        doc["constraints"].push_back({{"name", c.name},
                                      {"vertex", c.vertex},
                                      {"ray_a", c.ray_a},
                                      {"ray_b", c.ray_b},
                                      {"min_deg", c.min_deg},
                                      {"max_deg", c.max_deg},
                                      {"coupled", c.coupled}});
    json groups = json::object();
    for (const auto& [id, group] : schema.neighbor_groups) groups[std::to_string(id)] = group;
    doc["neighbor_groups"] = groups;
    return doc;
}

// ---- annotation I/O -------------------------------------------------------

LandmarkSet annotation_from_json(const json& doc) {
    const std::string origin = "annotation";
    if (!doc.is_object()) throw ParseError(origin + ": top level must be an object");

    LandmarkSet set;
    set.width = require_field(doc, "width", origin).get<int>();
    set.height = require_field(doc, "height", origin).get<int>();
    set.spacing_mm_per_px = require_field(doc, "spacing_mm_per_px", origin).get<double>();
    if (doc.contains("tags"))
        for (const auto& t : doc.at("tags")) set.tags.push_back(t.get<std::string>());
    std::sort(set.tags.begin(), set.tags.end());
    set.tags.erase(std::unique(set.tags.begin(), set.tags.end()), set.tags.end());

    const auto& pts = require_field(doc, "points", origin);
    if (!pts.is_object()) throw ParseError(origin + ".points: must be an object");

    std::map<int, Point2> by_id;
    for (const auto& [key, xy] : pts.items()) {
        int id = 0;
        try {
            id = std::stoi(key);
        } catch (const std::exception&) {
            throw ParseError(origin + ".points: key '" + key + "' is not a landmark index");
        }
        if (!xy.is_array() || xy.size() != 2)
            throw ParseError(origin + ".points." + key + ": must be [x,y]");
        if (!by_id.emplace(id, Point2{xy[0].get<double>(), xy[1].get<double>()}).second)
            throw ParseError(origin + ".points: duplicate landmark " + key);
    }
    if (by_id.empty()) throw ParseError(origin + ".points: empty");

    const int n = by_id.rbegin()->first;
    set.points.resize(static_cast<std::size_t>(n), Point2{-1.0, -1.0});
    std::vector<char> present(static_cast<std::size_t>(n), 0);
    for (const auto& [id, p] : by_id) {
        if (id < 1) throw ParseError(origin + ".points: index " + std::to_string(id) + " < 1");
        set.points[static_cast<std::size_t>(id - 1)] = p;
        present[static_cast<std::size_t>(id - 1)] = 1;
    }
    for (int i = 0; i < n; ++i)
        if (!present[static_cast<std::size_t>(i)])
            throw ParseError(origin + ".points: missing landmark " + std::to_string(i + 1));
    return set;
}

LandmarkSet annotation_from_text(const std::string& text) {
    return annotation_from_json(parse_json_or_throw(text, "annotation"));
}

LandmarkSet load_annotation(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open annotation file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return annotation_from_json(parse_json_or_throw(buf.str(), "annotation"));
    } catch (ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

json annotation_to_json(const LandmarkSet& set) {
    json doc;
    doc["width"] = set.width;
    doc["height"] = set.height;
    doc["spacing_mm_per_px"] = set.spacing_mm_per_px;
    doc["tags"] = set.tags;
    json pts = json::object();
    for (std::size_t i = 0; i < set.points.size(); ++i)
        pts[std::to_string(i + 1)] = {set.points[i].x, set.points[i].y};
    doc["points"] = pts;
    return doc;
}

void save_annotation(const LandmarkSet& set, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write annotation file: " + path.string());
    out << annotation_to_json(set).dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

// ---- measurement & validation ---------------------------------------------

double measure_angle(const LandmarkSet& set, const AngleConstraint& c) {
    for (int id : {c.vertex, c.ray_a, c.ray_b})
        if (id < 1 || id > static_cast<int>(set.points.size()))
            throw ValidationError("measure_angle: landmark " + std::to_string(id) +
                                  " not present in set");
    const Point2 v = set.at(c.vertex);
    const Point2 a = set.at(c.ray_a) - v;
    const Point2 b = set.at(c.ray_b) - v;
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0)
        throw DegenerateInputError("measure_angle('" + c.name +
                                   "'): ray endpoint coincides with vertex");
    double cosine = dot(a, b) / (na * nb);
    cosine = std::clamp(cosine, -1.0, 1.0);
    return rad_to_deg(std::acos(cosine));
}

std::string ValidationReport::summary() const {
    if (violations.empty()) return "valid";
    std::ostringstream os;
    os << violations.size() << " violation(s):";
    for (const auto& v : violations) os << "\n  [" << v.rule << "] " << v.detail;
    return os.str();
}

ValidationReport validate_landmark_set(const LandmarkSet& set, const AnatomySchema& schema) {
    ValidationReport report;
    auto add = [&](std::string rule, std::string detail) {
        report.violations.push_back({std::move(rule), std::move(detail)});
    };

    if (set.width <= 0 || set.height <= 0)
        add("image-size", "width and height must be positive");
    if (!(set.spacing_mm_per_px > 0.0))
        add("spacing", "spacing_mm_per_px must be > 0");

    const int n = schema.landmark_count();
    if (static_cast<int>(set.points.size()) != n) {
        add("landmark-count", "set has " + std::to_string(set.points.size()) +
                                  " landmarks, schema expects " + std::to_string(n));
        return report;  // point-wise checks below would misattribute ids
    }

    for (int id = 1; id <= n; ++id) {
        const Point2 p = set.at(id);
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            add("point-finite", schema.name_of(id) + " (L" + std::to_string(id) +
                                    ") has a non-finite coordinate");
            continue;
        }
        if (p.x < 0.0 || p.x >= set.width || p.y < 0.0 || p.y >= set.height) {
            std::ostringstream os;
            os << schema.name_of(id) << " (L" << id << ") at (" << p.x << "," << p.y
               << ") outside [0," << set.width << ")x[0," << set.height << ")";
            add("point-bounds", os.str());
        }
    }

    for (const auto& c : schema.constraints) {
        double deg = 0.0;
        try {
            deg = measure_angle(set, c);
        } catch (const Error& e) {
            add("constraint-degenerate", std::string(e.what()));
            continue;
        }
        if (deg < c.min_deg || deg > c.max_deg) {
            std::ostringstream os;
            os << c.name << " measures " << deg << " deg, outside [" << c.min_deg << ","
               << c.max_deg << "]";
            add("constraint-range", os.str());
        }
    }
    return report;
}

}  // namespace cephforge
