/**
 * @file pipeline.hpp
 * @brief Dataset ingestion, bundle assembly, splitting, the stub X-ray
 *        renderer, and manifest verification.
 *
 * A bundle is the hand-off to a downstream conditional generator: one
 * topology PNG + one prompt + the ground-truth annotation per record, all
 * indexed by a JSON-lines manifest.
 */
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cephforge/ait.hpp"
#include "cephforge/mira.hpp"
#include "cephforge/pdg.hpp"
#include "cephforge/schema.hpp"

#include <nlohmann/json_fwd.hpp>

namespace cephforge {

struct IngestResult {
    std::vector<LandmarkSet> sets;
    std::vector<std::string> ids;  // file stems, aligned with sets

    struct Rejection {
        std::string file;
        std::string reason;
    };
    std::vector<Rejection> rejected;
};

/// Loads every *.json annotation in the directory (sorted by filename),
/// validating each against the schema. Files that fail to parse or
/// validate are listed in `rejected`, not loaded. Throws IoError for an
/// unreadable directory and ValidationError when nothing valid remains.
IngestResult ingest(const std::filesystem::path& dir, const AnatomySchema& schema);

struct BundleRecord {
    std::string id;
    std::string topology_image;  // path relative to the manifest
    std::string prompt;
    std::string landmarks;       // annotation path relative to the manifest
    double spacing_mm_per_px = 0.0;
    int width = 0;
    int height = 0;
    Provenance provenance;
    std::uint64_t seed = 0;
};

nlohmann::json provenance_to_json(const Provenance& p);
Provenance provenance_from_json(const nlohmann::json& doc);
nlohmann::json record_to_json(const BundleRecord& r);
BundleRecord record_from_json(const nlohmann::json& doc);

struct BundleResult {
    std::filesystem::path manifest_path;
    std::vector<BundleRecord> records;
};

/// Runs augmentation, rasterization, and prompt generation, pairing prompt
/// i with landmark set i, and writes PNGs, annotation JSONs, prompts.txt,
/// and manifest.jsonl under `out`. The output directory must not already
/// contain files; on any failure it is removed entirely.
BundleResult build_bundles(const std::vector<LandmarkSet>& pool,
                           const std::vector<std::string>& pool_ids, const AnatomySchema& schema,
                           const AugmentConfig& mira_cfg, const PromptLexicon& lexicon,
                           const RasterStyle& style, int image_size,
                           const std::filesystem::path& out);

struct DatasetSplit {
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
};

/// Deterministic shuffled partition; sizes must sum to ids.size().
DatasetSplit split_dataset(const std::vector<std::string>& ids,
                           const std::array<std::size_t, 3>& sizes, std::uint64_t seed);

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

/// Procedural grayscale test fixture: a smooth intensity field built from
/// distances to the schema's edges and nodes, so landmark neighborhoods
/// are locally distinctive. Stands in for real X-ray pixels in end-to-end
/// tests only.
GrayImage render_stub_xray(const LandmarkSet& set, const AnatomySchema& schema, int size);

struct ManifestDefect {
    std::string record_id;  // empty for file-level defects
    std::string what;
};

/// Integrity sweep over a manifest: files exist, ids unique, every
/// annotation validates against the schema, every prompt is rule-clean,
/// every PNG has the expected dimensions.
std::vector<ManifestDefect> verify_manifest(const std::filesystem::path& manifest_path,
                                            const AnatomySchema& schema,
                                            const PromptLexicon& lexicon);

}  // namespace cephforge
