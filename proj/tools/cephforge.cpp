/**
 * @file cephforge.cpp
 * @brief Command line front end.
 *
 * Exit codes: 0 success, 1 validation failure, 2 I/O error, 3 config error.
 */
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cephforge/ait.hpp"
#include "cephforge/defaults.hpp"
#include "cephforge/errors.hpp"
#include "cephforge/eval.hpp"
#include "cephforge/mira.hpp"
#include "cephforge/pdg.hpp"
#include "cephforge/pipeline.hpp"
#include "cephforge/png_io.hpp"
#include "cephforge/rng.hpp"
#include "cephforge/schema.hpp"

#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOptions {
    std::string schema_path;
    std::uint64_t seed = 0;
    int jobs = 0;
};

cephforge::AnatomySchema resolve_schema(const GlobalOptions& opts) {
    if (!opts.schema_path.empty()) return cephforge::load_schema(opts.schema_path);
    if (const char* env = std::getenv("CEPHFORGE_SCHEMA"); env && *env)
        return cephforge::load_schema(env);
    return cephforge::default_schema();
}

cephforge::PromptLexicon resolve_lexicon(const std::string& path) {
    if (!path.empty()) return cephforge::load_lexicon(path);
    return cephforge::default_lexicon();
}

std::vector<double> parse_thresholds(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw cephforge::ConfigError("bad threshold value: '" + item + "'");
        }
    }
    if (out.empty()) throw cephforge::ConfigError("no thresholds given");
    return out;
}

std::string zero_pad(std::size_t value, int digits) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < digits) s.insert(s.begin(), '0');
    return s;
}

std::vector<fs::path> annotation_files(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        throw cephforge::IoError("not a readable directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    return files;
}

// ---- subcommand bodies ------------------------------------------------------

int run_augment(const GlobalOptions& g, const std::string& pool_dir, std::int64_t count,
                const std::string& out_dir, int anat_min, int anat_max) {
    const auto schema = resolve_schema(g);
    const auto pool = cephforge::ingest(pool_dir, schema);
    for (const auto& r : pool.rejected)
        std::cerr << "skipping " << r.file << ": " << r.reason << "\n";

    cephforge::AugmentConfig cfg;
    cfg.n_l = count;
    cfg.seed = g.seed;
    cfg.anatomical_min = anat_min;
    cfg.anatomical_max = anat_max;

    const auto outputs = cephforge::mira_generate(pool.sets, cfg, schema, pool.ids);

    fs::create_directories(out_dir);
    std::ofstream provenance(fs::path(out_dir) / "provenance.jsonl", std::ios::binary);
    if (!provenance) throw cephforge::IoError("cannot write provenance.jsonl in " + out_dir);
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const std::string stem = "ann_" + zero_pad(i, 6);
        cephforge::save_annotation(outputs[i].set, fs::path(out_dir) / (stem + ".json"));
        json row = cephforge::provenance_to_json(outputs[i].provenance);
        row["id"] = stem;
        provenance << row.dump() << "\n";
    }
    std::cout << "wrote " << outputs.size() << " annotation(s) to " << out_dir << "\n";
    return 0;
}

int run_rasterize(const GlobalOptions& g, const std::string& in_dir, int size,
                  const std::string& out_dir, const cephforge::RasterStyle& style) {
    const auto schema = resolve_schema(g);
    const auto files = annotation_files(in_dir);
    if (files.empty()) throw cephforge::ValidationError("no annotation files in " + in_dir);

    std::vector<cephforge::LandmarkSet> sets;
    for (const auto& f : files) {
        auto set = cephforge::load_annotation(f);
        auto report = cephforge::validate_landmark_set(set, schema);
        if (!report.ok())
            throw cephforge::ValidationError(f.string() + ": " + report.summary());
        sets.push_back(std::move(set));
    }

    const auto images = cephforge::rasterize_batch(sets, schema, size, style);
    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto& img = images[i];
        const auto bytes = cephforge::encode_png_rgb(
            img.width, img.height, reinterpret_cast<const std::uint8_t*>(img.pixels.data()));
        cephforge::write_file_bytes(fs::path(out_dir) / (files[i].stem().string() + ".png"),
                                    bytes);
    }
    std::cout << "rasterized " << images.size() << " image(s) to " << out_dir << "\n";
    return 0;
}

int run_prompts(const GlobalOptions& g, const std::string& lexicon_path, std::int64_t count,
                const std::string& out_file, bool distinct) {
    const auto lexicon = resolve_lexicon(lexicon_path);
    const auto prompts = cephforge::generate_prompts(lexicon, count, g.seed, distinct);
    std::ofstream out(out_file, std::ios::binary);
    if (!out) throw cephforge::IoError("cannot write " + out_file);
    for (const auto& p : prompts) out << p.text() << "\n";
    std::cout << "wrote " << prompts.size() << " prompt(s) to " << out_file << "\n";
    return 0;
}

int run_bundle(const GlobalOptions& g, const std::string& pool_dir,
               const std::string& lexicon_path, std::int64_t count, int size,
               const std::string& out_dir) {
    const auto schema = resolve_schema(g);
    const auto lexicon = resolve_lexicon(lexicon_path);
    const auto pool = cephforge::ingest(pool_dir, schema);
    for (const auto& r : pool.rejected)
        std::cerr << "skipping " << r.file << ": " << r.reason << "\n";

    cephforge::AugmentConfig cfg;
    cfg.n_l = count;
    cfg.seed = g.seed;

    const auto result = cephforge::build_bundles(pool.sets, pool.ids, schema, cfg, lexicon, {},
                                                 size, out_dir);
    std::cout << "bundle manifest: " << result.manifest_path.string() << " ("
              << result.records.size() << " records)\n";
    return 0;
}

int run_split(const GlobalOptions& g, const std::string& manifest_path, const std::string& dir,
              const std::string& sizes_text, const std::string& out_file) {
    std::vector<std::string> ids;
    if (!manifest_path.empty()) {
        std::ifstream in(manifest_path);
        if (!in) throw cephforge::IoError("cannot open manifest: " + manifest_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            ids.push_back(cephforge::record_from_json(json::parse(line)).id);
        }
    } else if (!dir.empty()) {
        for (const auto& f : annotation_files(dir)) ids.push_back(f.stem().string());
    } else {
        throw cephforge::ConfigError("split needs --manifest or --dir");
    }

    const auto sizes_raw = parse_thresholds(sizes_text);
    if (sizes_raw.size() != 3) throw cephforge::ConfigError("--sizes must be train,val,test");
    std::array<std::size_t, 3> sizes{};
    for (int i = 0; i < 3; ++i) {
        if (sizes_raw[static_cast<std::size_t>(i)] < 0 ||
            sizes_raw[static_cast<std::size_t>(i)] !=
                std::floor(sizes_raw[static_cast<std::size_t>(i)]))
            throw cephforge::ConfigError("--sizes must be non-negative integers");
        sizes[static_cast<std::size_t>(i)] =
            static_cast<std::size_t>(sizes_raw[static_cast<std::size_t>(i)]);
    }

    const auto split = cephforge::split_dataset(ids, sizes, g.seed);
    json doc = {{"train", split.train}, {"val", split.val}, {"test", split.test}};
    std::ofstream out(out_file, std::ios::binary);
    if (!out) throw cephforge::IoError("cannot write " + out_file);
    out << doc.dump(2) << "\n";
    std::cout << "split " << ids.size() << " record(s): " << split.train.size() << "/"
              << split.val.size() << "/" << split.test.size() << " -> " << out_file << "\n";
    return 0;
}

int run_evaluate(const GlobalOptions& g, const std::string& pred_dir, const std::string& gt_dir,
                 const std::string& thresholds_text, bool by_tag, const std::string& out_file) {
    const auto schema = resolve_schema(g);
    const auto thresholds = parse_thresholds(thresholds_text);

    const auto gt_files = annotation_files(gt_dir);
    if (gt_files.empty()) throw cephforge::ValidationError("no ground-truth annotations in " + gt_dir);

    std::vector<std::pair<cephforge::LandmarkSet, cephforge::LandmarkSet>> pairs;
    for (const auto& gt_file : gt_files) {
        const fs::path pred_file = fs::path(pred_dir) / gt_file.filename();
        if (!fs::exists(pred_file))
            throw cephforge::ValidationError("missing prediction for " +
                                             gt_file.filename().string());
        auto gt = cephforge::load_annotation(gt_file);
        auto report = cephforge::validate_landmark_set(gt, schema);
        if (!report.ok())
            throw cephforge::ValidationError(gt_file.string() + ": " + report.summary());
        pairs.emplace_back(cephforge::load_annotation(pred_file), std::move(gt));
    }

    const auto report = cephforge::evaluate(pairs, thresholds, {}, by_tag);
    std::cout << cephforge::report_table(report);
    if (!out_file.empty()) {
        std::ofstream out(out_file, std::ios::binary);
        if (!out) throw cephforge::IoError("cannot write " + out_file);
        out << cephforge::report_to_json(report).dump(2) << "\n";
    }
    return 0;
}

int run_verify_manifest(const GlobalOptions& g, const std::string& manifest_path,
                        const std::string& lexicon_path) {
    const auto schema = resolve_schema(g);
    const auto lexicon = resolve_lexicon(lexicon_path);
    const auto defects = cephforge::verify_manifest(manifest_path, schema, lexicon);
    if (defects.empty()) {
        std::cout << "manifest ok: zero defects\n";
        return 0;
    }
    for (const auto& d : defects)
        std::cout << "defect" << (d.record_id.empty() ? "" : " [" + d.record_id + "]") << ": "
                  << d.what << "\n";
    std::cout << defects.size() << " defect(s)\n";
    return 1;
}

int run_stub_render(const GlobalOptions& g, const std::string& in_path, int size,
                    const std::string& out_path) {
    const auto schema = resolve_schema(g);

    auto render_one = [&](const fs::path& in_file, const fs::path& out_file) {
        const auto set = cephforge::load_annotation(in_file);
        const auto img = cephforge::render_stub_xray(set, schema, size);
        cephforge::write_file_bytes(
            out_file, cephforge::encode_png_gray(img.width, img.height, img.pixels.data()));
    };

    if (fs::is_directory(in_path)) {
        const auto files = annotation_files(in_path);
        if (files.empty()) throw cephforge::ValidationError("no annotation files in " + in_path);
        fs::create_directories(out_path);
        for (const auto& f : files)
            render_one(f, fs::path(out_path) / (f.stem().string() + ".png"));
        std::cout << "rendered " << files.size() << " stub image(s) to " << out_path << "\n";
    } else {
        render_one(in_path, out_path);
        std::cout << "rendered " << out_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cephforge: anatomy-consistent landmark synthesis, topology rendering, "
                 "prompt generation, and detection metrics"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--schema", g.schema_path,
                   "schema JSON (default: $CEPHFORGE_SCHEMA, else built-in)");
    app.add_option("--seed", g.seed, "random seed")->default_val(0);
    app.add_option("--jobs", g.jobs, "worker threads (0 = library default)")->default_val(0);

    // augment
    auto* augment = app.add_subcommand("augment", "expand a pool of annotations");
    std::string pool_dir, out_dir;
    std::int64_t count = 1;
    int anat_min = 1, anat_max = 3;
    augment->add_option("--pool", pool_dir, "directory of annotation JSON files")->required();
    augment->add_option("--count", count, "number of sets to generate")->required();
    augment->add_option("--out", out_dir, "output directory")->required();
    augment->add_option("--anatomical-min", anat_min, "min constraint augmentations per sample");
    augment->add_option("--anatomical-max", anat_max, "max constraint augmentations per sample");

    // rasterize
    auto* rasterize = app.add_subcommand("rasterize", "render topology conditioning images");
    std::string raster_in, raster_out;
    int raster_size = 512;
    cephforge::RasterStyle style;
    rasterize->add_option("--in", raster_in, "directory of annotation JSON files")->required();
    rasterize->add_option("--size", raster_size, "output raster size in pixels");
    rasterize->add_option("--out", raster_out, "output directory")->required();
    rasterize->add_option("--node-radius", style.node_radius_px, "node disc radius in pixels");
    rasterize->add_option("--edge-thickness", style.edge_thickness_px, "edge thickness in pixels");

    // prompts
    auto* prompts = app.add_subcommand("prompts", "generate text prompts");
    std::string lexicon_path, prompts_out = "prompts.txt";
    std::int64_t prompt_count = 1;
    bool distinct = false;
    prompts->add_option("--lexicon", lexicon_path, "lexicon JSON (default: built-in)");
    prompts->add_option("--count", prompt_count, "number of prompts")->required();
    prompts->add_option("--out", prompts_out, "output text file");
    prompts->add_flag("--distinct", distinct, "sample without replacement");

    // bundle
    auto* bundle = app.add_subcommand("bundle", "build a conditioning bundle with manifest");
    std::string bundle_pool, bundle_lexicon, bundle_out;
    std::int64_t bundle_count = 1;
    int bundle_size = 512;
    bundle->add_option("--pool", bundle_pool, "directory of annotation JSON files")->required();
    bundle->add_option("--lexicon", bundle_lexicon, "lexicon JSON (default: built-in)");
    bundle->add_option("--count", bundle_count, "number of records")->required();
    bundle->add_option("--size", bundle_size, "topology image size");
    bundle->add_option("--out", bundle_out, "output directory")->required();

    // split
    auto* split = app.add_subcommand("split", "deterministic train/val/test partition");
    std::string split_manifest, split_dir, split_sizes, split_out = "split.json";
    split->add_option("--manifest", split_manifest, "manifest.jsonl to take record ids from");
    split->add_option("--dir", split_dir, "annotation directory to take ids from");
    split->add_option("--sizes", split_sizes, "train,val,test sizes")->required();
    split->add_option("--out", split_out, "output JSON file");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "MRE/SD/SDR metrics");
    std::string pred_dir, gt_dir, thresholds_text = "2,2.5,3,4", eval_out;
    bool by_tag = false;
    evaluate->add_option("--pred", pred_dir, "predicted annotation directory")->required();
    evaluate->add_option("--gt", gt_dir, "ground-truth annotation directory")->required();
    evaluate->add_option("--thresholds", thresholds_text, "SDR thresholds in mm");
    evaluate->add_flag("--by-tag", by_tag, "add per-feature-tag subset rows");
    evaluate->add_option("--out", eval_out, "also write the report as JSON");

    // verify-manifest
    auto* verify = app.add_subcommand("verify-manifest", "integrity sweep over a bundle");
    std::string verify_path, verify_lexicon;
    verify->add_option("--manifest", verify_path, "manifest.jsonl")->required();
    verify->add_option("--lexicon", verify_lexicon, "lexicon JSON (default: built-in)");

    // stub-render
    auto* stub = app.add_subcommand("stub-render", "procedural grayscale test fixture");
    std::string stub_in, stub_out;
    int stub_size = 512;
    stub->add_option("--in", stub_in, "annotation file or directory")->required();
    stub->add_option("--size", stub_size, "output size in pixels");
    stub->add_option("--out", stub_out, "output file or directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }

#ifdef _OPENMP
    if (g.jobs > 0) omp_set_num_threads(g.jobs);
#endif

    try {
        if (*augment) return run_augment(g, pool_dir, count, out_dir, anat_min, anat_max);
        if (*rasterize) return run_rasterize(g, raster_in, raster_size, raster_out, style);
        if (*prompts) return run_prompts(g, lexicon_path, prompt_count, prompts_out, distinct);
        if (*bundle)
            return run_bundle(g, bundle_pool, bundle_lexicon, bundle_count, bundle_size, bundle_out);
        if (*split) return run_split(g, split_manifest, split_dir, split_sizes, split_out);
        if (*evaluate) return run_evaluate(g, pred_dir, gt_dir, thresholds_text, by_tag, eval_out);
        if (*verify) return run_verify_manifest(g, verify_path, verify_lexicon);
        if (*stub) return run_stub_render(g, stub_in, stub_size, stub_out);
    } catch (const cephforge::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const cephforge::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const cephforge::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 3;
    } catch (const cephforge::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
