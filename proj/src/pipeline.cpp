/**
 * @file pipeline.cpp
 */
#include "cephforge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cephforge/errors.hpp"
#include "cephforge/png_io.hpp"
#include "cephforge/rng.hpp"

#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cephforge {

namespace fs = std::filesystem;
using nlohmann::json;

IngestResult ingest(const fs::path& dir, const AnatomySchema& schema) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        throw IoError("ingest: not a readable directory: " + dir.string());

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    }
    if (ec) throw IoError("ingest: cannot list directory: " + dir.string());
    std::sort(files.begin(), files.end());

    IngestResult result;
    for (const auto& file : files) {
        try {
            LandmarkSet set = load_annotation(file);
            auto report = validate_landmark_set(set, schema);
            if (!report.ok()) {
                result.rejected.push_back({file.filename().string(), report.summary()});
                continue;
            }
            result.sets.push_back(std::move(set));
            result.ids.push_back(file.stem().string());
        } catch (const Error& e) {
            result.rejected.push_back({file.filename().string(), e.what()});
        }
    }
    if (result.sets.empty())
        throw ValidationError("ingest: no valid annotation files in " + dir.string());
    return result;
}

// ---- provenance / record serialization --------------------------------------

json provenance_to_json(const Provenance& p) {
    json doc;
    doc["source_id"] = p.source_id;
    doc["affine"] = {{"s_x", p.affine.s_x},       {"s_y", p.affine.s_y},
                     {"theta", p.affine.theta},   {"t_x", p.affine.t_x},
                     {"t_y", p.affine.t_y},       {"center", {p.affine.center.x, p.affine.center.y}}};
    json applied = json::array();
    for (const auto& ac : p.applied_constraints) applied.push_back({ac.name, ac.target_deg});
    doc["applied_constraints"] = applied;
    doc["seed_stream"] = p.seed_stream;
    return doc;
}

Provenance provenance_from_json(const json& doc) {
    Provenance p;
    p.source_id = doc.at("source_id").get<std::string>();
    const auto& a = doc.at("affine");
    p.affine.s_x = a.at("s_x").get<double>();
    p.affine.s_y = a.at("s_y").get<double>();
    p.affine.theta = a.at("theta").get<double>();
    p.affine.t_x = a.at("t_x").get<double>();
    p.affine.t_y = a.at("t_y").get<double>();
    p.affine.center = {a.at("center")[0].get<double>(), a.at("center")[1].get<double>()};
    for (const auto& ac : doc.at("applied_constraints"))
        p.applied_constraints.push_back({ac[0].get<std::string>(), ac[1].get<double>()});
    p.seed_stream = doc.at("seed_stream").get<std::uint64_t>();
    return p;
}

json record_to_json(const BundleRecord& r) {
    json doc;
    doc["id"] = r.id;
    doc["topology_image"] = r.topology_image;
    doc["prompt"] = r.prompt;
    doc["landmarks"] = r.landmarks;
    doc["spacing_mm_per_px"] = r.spacing_mm_per_px;
    doc["width"] = r.width;
    doc["height"] = r.height;
    doc["provenance"] = provenance_to_json(r.provenance);
    doc["seed"] = r.seed;
    return doc;
}

BundleRecord record_from_json(const json& doc) {
    BundleRecord r;
    r.id = doc.at("id").get<std::string>();
    r.topology_image = doc.at("topology_image").get<std::string>();
    r.prompt = doc.at("prompt").get<std::string>();
    r.landmarks = doc.at("landmarks").get<std::string>();
    r.spacing_mm_per_px = doc.at("spacing_mm_per_px").get<double>();
    r.width = doc.at("width").get<int>();
    r.height = doc.at("height").get<int>();
    r.provenance = provenance_from_json(doc.at("provenance"));
    r.seed = doc.at("seed").get<std::uint64_t>();
    return r;
}

// ---- bundle building ---------------------------------------------------------

namespace {

std::string zero_pad(std::size_t value, int digits) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < digits) s.insert(s.begin(), '0');
    return s;
}

// sub-stream labels so augmentation and prompt sampling stay independent
constexpr std::uint64_t kMiraStream = 0x6d697261;    // "mira"
constexpr std::uint64_t kPromptStream = 0x70646721;  // "pdg!"

}  // namespace

BundleResult build_bundles(const std::vector<LandmarkSet>& pool,
                           const std::vector<std::string>& pool_ids, const AnatomySchema& schema,
                           const AugmentConfig& mira_cfg, const PromptLexicon& lexicon,
                           const RasterStyle& style, int image_size, const fs::path& out) {
    if (fs::exists(out) && !fs::is_empty(out))
        throw ConfigError("build_bundles: output directory is not empty: " + out.string());

    fs::create_directories(out / "images");
    fs::create_directories(out / "annotations");

    try {
        AugmentConfig cfg = mira_cfg;
        cfg.seed = derive_stream(mira_cfg.seed, kMiraStream);
        std::vector<MiraOutput> generated = mira_generate(pool, cfg, schema, pool_ids);

        std::vector<Prompt> prompts = generate_prompts(
            lexicon, cfg.n_l, derive_stream(mira_cfg.seed, kPromptStream));

        // rasterize + png-encode in parallel, write serially
        const std::int64_t n = static_cast<std::int64_t>(generated.size());
        std::vector<std::vector<std::uint8_t>> png_bytes(generated.size());
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
        for (std::int64_t i = 0; i < n; ++i) {
            try {
                const TopologyImage img =
                    rasterize(generated[static_cast<std::size_t>(i)].set, schema, image_size, style);
                png_bytes[static_cast<std::size_t>(i)] = encode_png_rgb(
                    img.width, img.height, reinterpret_cast<const std::uint8_t*>(img.pixels.data()));
            } catch (...) {
#pragma omp critical(cephforge_bundle)
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);

        BundleResult result;
        result.manifest_path = out / "manifest.jsonl";
        std::ofstream manifest(result.manifest_path, std::ios::binary);  // LF endings
        std::ofstream prompt_file(out / "prompts.txt", std::ios::binary);
        if (!manifest || !prompt_file)
            throw IoError("build_bundles: cannot create outputs in " + out.string());

        for (std::size_t i = 0; i < generated.size(); ++i) {
            const std::string stem = zero_pad(i, 6);
            BundleRecord record;
            record.id = "syn_" + stem;
            record.topology_image = "images/topo_" + stem + ".png";
            record.prompt = prompts[i].text();
            record.landmarks = "annotations/ann_" + stem + ".json";
            record.spacing_mm_per_px = generated[i].set.spacing_mm_per_px;
            record.width = generated[i].set.width;
            record.height = generated[i].set.height;
            record.provenance = generated[i].provenance;
            record.seed = mira_cfg.seed;

            write_file_bytes(out / record.topology_image, png_bytes[i]);
            save_annotation(generated[i].set, out / record.landmarks);
            manifest << record_to_json(record).dump() << "\n";
            prompt_file << record.prompt << "\n";
            result.records.push_back(std::move(record));
        }
        manifest.close();
        prompt_file.close();
        if (manifest.fail() || prompt_file.fail())
            throw IoError("build_bundles: manifest write failed");
        return result;
    } catch (...) {
        std::error_code ec;
        fs::remove_all(out, ec);  // all-or-nothing output directory
        throw;
    }
}

DatasetSplit split_dataset(const std::vector<std::string>& ids,
                           const std::array<std::size_t, 3>& sizes, std::uint64_t seed) {
    const std::size_t total = sizes[0] + sizes[1] + sizes[2];
    if (total != ids.size())
        throw ConfigError("split_dataset: sizes sum to " + std::to_string(total) + " but " +
                          std::to_string(ids.size()) + " records given");

    std::vector<std::string> shuffled = ids;
    Rng rng(derive_stream(seed, 0x73706c69));  // "spli"
    for (std::size_t i = shuffled.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(shuffled[i - 1], shuffled[j]);
    }

    DatasetSplit split;
    split.train.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(sizes[0]));
    split.val.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(sizes[0]),
                     shuffled.begin() + static_cast<std::ptrdiff_t>(sizes[0] + sizes[1]));
    split.test.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(sizes[0] + sizes[1]),
                      shuffled.end());
    return split;
}

GrayImage render_stub_xray(const LandmarkSet& set, const AnatomySchema& schema, int size) {
    if (size < 32) throw ConfigError("render_stub_xray: size must be >= 32");
    if (static_cast<int>(set.points.size()) != schema.landmark_count())
        throw ValidationError("render_stub_xray: landmark count does not match schema");

    const double fx = static_cast<double>(size) / set.width;
    const double fy = static_cast<double>(size) / set.height;
    std::vector<Point2> pos(set.points.size());
    for (std::size_t i = 0; i < set.points.size(); ++i)
        pos[i] = {set.points[i].x * fx, set.points[i].y * fy};

    struct Segment {
        Point2 a, b;
    };
    std::vector<Segment> segments;
    for (auto [a, b] : schema.edges)
        segments.push_back({pos[static_cast<std::size_t>(a - 1)],
                            pos[static_cast<std::size_t>(b - 1)]});

    auto segment_distance = [](Point2 p, const Segment& s) {
        const Point2 d = s.b - s.a;
        const double len2 = dot(d, d);
        if (len2 == 0.0) return distance(p, s.a);
        const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
        return distance(p, Point2{s.a.x + t * d.x, s.a.y + t * d.y});
    };

    GrayImage img;
    img.width = size;
    img.height = size;
    img.pixels.assign(static_cast<std::size_t>(size) * size, 0);

    // smooth ridges along the anatomical edges plus a per-landmark bump
    // whose amplitude varies with the landmark index
#pragma omp parallel for schedule(static)
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const Point2 p{static_cast<double>(x), static_cast<double>(y)};

            double edge_d = 1e30;
            for (const auto& s : segments) edge_d = std::min(edge_d, segment_distance(p, s));

            double node_d = 1e30;
            std::size_t nearest = 0;
            for (std::size_t i = 0; i < pos.size(); ++i) {
                const double d = distance(p, pos[i]);
                if (d < node_d) {
                    node_d = d;
                    nearest = i;
                }
            }

            const double ridge = 120.0 * std::exp(-edge_d * edge_d / (2.0 * 36.0));
            const double bump_amp = 60.0 + 5.0 * static_cast<double>(nearest % 8);
            const double bump = bump_amp * std::exp(-node_d * node_d / (2.0 * 9.0));
            const double v = 20.0 + ridge + bump;
            img.pixels[static_cast<std::size_t>(y) * size + x] =
                static_cast<std::uint8_t>(std::clamp(std::nearbyint(v), 0.0, 255.0));
        }
    }
    return img;
}

std::vector<ManifestDefect> verify_manifest(const fs::path& manifest_path,
                                            const AnatomySchema& schema,
                                            const PromptLexicon& lexicon) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open manifest: " + manifest_path.string());
    const fs::path root = manifest_path.parent_path();

    std::vector<ManifestDefect> defects;
    std::vector<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        BundleRecord record;
        try {
            record = record_from_json(json::parse(line));
        } catch (const std::exception& e) {
            defects.push_back({"", "line " + std::to_string(line_no) + ": " + e.what()});
            continue;
        }

        if (std::find(seen_ids.begin(), seen_ids.end(), record.id) != seen_ids.end())
            defects.push_back({record.id, "duplicate record id"});
        seen_ids.push_back(record.id);

        const fs::path png = root / record.topology_image;
        if (!fs::exists(png)) {
            defects.push_back({record.id, "missing topology image " + record.topology_image});
        } else {
            try {
                const PngInfo info = read_png_header(png);
                if (info.color_type != 2 || info.bit_depth != 8)
                    defects.push_back({record.id, "topology image is not 8-bit RGB"});
                if (info.width != info.height || info.width < 32)
                    defects.push_back({record.id, "unexpected topology image size " +
                                                      std::to_string(info.width) + "x" +
                                                      std::to_string(info.height)});
            } catch (const Error& e) {
                defects.push_back({record.id, e.what()});
            }
        }

        const fs::path ann = root / record.landmarks;
        if (!fs::exists(ann)) {
            defects.push_back({record.id, "missing annotation " + record.landmarks});
        } else {
            try {
                const LandmarkSet set = load_annotation(ann);
                auto report = validate_landmark_set(set, schema);
                if (!report.ok())
                    defects.push_back({record.id, "invalid landmark set: " + report.summary()});
                if (set.width != record.width || set.height != record.height ||
                    set.spacing_mm_per_px != record.spacing_mm_per_px)
                    defects.push_back({record.id, "record metadata disagrees with annotation"});
            } catch (const Error& e) {
                defects.push_back({record.id, e.what()});
            }
        }

        try {
            const Prompt prompt = Prompt::parse(record.prompt);
            for (const auto& [a, b] : validate_prompt(prompt, lexicon))
                defects.push_back({record.id, "prompt pairs '" + a + "' with '" + b + "'"});
        } catch (const Error& e) {
            defects.push_back({record.id, e.what()});
        }
    }
    if (line_no == 0) defects.push_back({"", "manifest is empty"});
    return defects;
}

}  // namespace cephforge
