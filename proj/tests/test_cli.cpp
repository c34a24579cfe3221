#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <set>
#include <string>

#include <sys/wait.h>

#include "cephforge/defaults.hpp"
#include "cephforge/pipeline.hpp"
#include "cephforge/png_io.hpp"
#include "cephforge/schema.hpp"

#include "support.hpp"

using namespace cephforge;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* env = std::getenv("CEPHFORGE_CLI");
    REQUIRE_MESSAGE(env != nullptr, "CEPHFORGE_CLI must point at the built binary");
    return env;
}

int run(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::vector<std::uint8_t> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("cli end-to-end: augment, rasterize, bundle, verify, evaluate") {
    test::TempDir tmp("cli");
    const fs::path base = tmp.path();
    save_annotation(example_annotation(), base / "seed.json");
    fs::create_directories(base / "seedpool");
    save_annotation(example_annotation(), base / "seedpool" / "real_000.json");

    SUBCASE("help exits 0, bad flags exit 3") {
        CHECK(run("--help") == 0);
        CHECK(run("augment --help") == 0);
        CHECK(run("definitely-not-a-command") == 3);
        CHECK(run("augment --pool nowhere") == 3);  // missing required flags
    }

    SUBCASE("augment then rasterize then stub-render") {
        CHECK(run("augment --pool " + (base / "seedpool").string() + " --count 5 --seed 7 --out " +
                  (base / "aug").string()) == 0);
        CHECK(fs::exists(base / "aug" / "ann_000004.json"));
        CHECK(fs::exists(base / "aug" / "provenance.jsonl"));

        CHECK(run("rasterize --in " + (base / "aug").string() + " --size 128 --out " +
                  (base / "raster").string()) == 0);
        const PngInfo info = read_png_header(base / "raster" / "ann_000000.png");
        CHECK(info.width == 128);
        CHECK(info.color_type == 2);

        CHECK(run("stub-render --in " + (base / "seed.json").string() + " --size 64 --out " +
                  (base / "stub.png").string()) == 0);
        CHECK(read_png_header(base / "stub.png").color_type == 0);

        // identical seeds give identical raster bytes at different --jobs
        CHECK(run("--jobs 1 rasterize --in " + (base / "aug").string() + " --size 128 --out " +
                  (base / "raster_j1").string()) == 0);
        CHECK(run("--jobs 4 rasterize --in " + (base / "aug").string() + " --size 128 --out " +
                  (base / "raster_j4").string()) == 0);
        CHECK(slurp(base / "raster_j1" / "ann_000002.png") ==
              slurp(base / "raster_j4" / "ann_000002.png"));
    }

    SUBCASE("prompts respects count and determinism") {
        CHECK(run("prompts --count 20 --seed 3 --out " + (base / "p1.txt").string()) == 0);
        CHECK(run("prompts --count 20 --seed 3 --out " + (base / "p2.txt").string()) == 0);
        CHECK(slurp(base / "p1.txt") == slurp(base / "p2.txt"));
        std::ifstream in(base / "p1.txt");
        int lines = 0;
        std::string line;
        while (std::getline(in, line)) ++lines;
        CHECK(lines == 20);

        CHECK(run("prompts --count 200 --seed 3 --distinct --out " +
                  (base / "pd.txt").string()) == 0);
        std::ifstream din(base / "pd.txt");
        std::set<std::string> unique;
        while (std::getline(din, line)) unique.insert(line);
        CHECK(unique.size() == 200);
    }

    SUBCASE("bundle then verify-manifest then split") {
        CHECK(run("bundle --pool " + (base / "seedpool").string() +
                  " --count 4 --seed 11 --size 128 --out " + (base / "bundle").string()) == 0);
        CHECK(run("verify-manifest --manifest " + (base / "bundle" / "manifest.jsonl").string()) ==
              0);

        // byte-identical tree regardless of --jobs
        CHECK(run("--jobs 3 bundle --pool " + (base / "seedpool").string() +
                  " --count 4 --seed 11 --size 128 --out " + (base / "bundle_j3").string()) == 0);
        CHECK(slurp(base / "bundle" / "manifest.jsonl") ==
              slurp(base / "bundle_j3" / "manifest.jsonl"));
        CHECK(slurp(base / "bundle" / "images" / "topo_000003.png") ==
              slurp(base / "bundle_j3" / "images" / "topo_000003.png"));

        // break the bundle: verify must exit 1
        fs::remove(base / "bundle" / "images" / "topo_000001.png");
        CHECK(run("verify-manifest --manifest " + (base / "bundle" / "manifest.jsonl").string()) ==
              1);

        CHECK(run("split --manifest " + (base / "bundle" / "manifest.jsonl").string() +
                  " --sizes 2,1,1 --seed 4 --out " + (base / "split.json").string()) == 0);
        CHECK(fs::exists(base / "split.json"));
    }

    SUBCASE("evaluate produces a table and a JSON report") {
        fs::create_directories(base / "gt");
        fs::create_directories(base / "pred");
        LandmarkSet gt = example_annotation();
        save_annotation(gt, base / "gt" / "img.json");
        LandmarkSet pred = gt;
        pred.at(1).x += 8.0;  // 8 px * 0.125 mm = 1 mm error on Sella
        save_annotation(pred, base / "pred" / "img.json");

        CHECK(run("evaluate --pred " + (base / "pred").string() + " --gt " + (base / "gt").string() +
                  " --thresholds 2,2.5,3,4 --by-tag --out " + (base / "report.json").string()) ==
              0);
        CHECK(fs::exists(base / "report.json"));

        // missing prediction directory contents -> validation failure
        fs::create_directories(base / "pred_empty");
        CHECK(run("evaluate --pred " + (base / "pred_empty").string() + " --gt " +
                  (base / "gt").string()) == 1);
    }

    SUBCASE("io errors exit 2") {
        CHECK(run("augment --pool " + (base / "missing_dir").string() + " --count 1 --out " +
                  (base / "x").string()) == 2);
        CHECK(run("verify-manifest --manifest " + (base / "no_such.jsonl").string()) == 2);
    }

    SUBCASE("bad schema file exits 3") {
        std::ofstream(base / "bad_schema.json") << "{ \"landmarks\": 5 }";
        CHECK(run("--schema " + (base / "bad_schema.json").string() + " stub-render --in " +
                  (base / "seed.json").string() + " --size 64 --out " +
                  (base / "x.png").string()) == 3);
    }

    SUBCASE("CEPHFORGE_SCHEMA env var supplies the default schema") {
        std::ofstream(base / "env_schema.json") << "{ \"broken\": true }";
        const std::string cmd = "CEPHFORGE_SCHEMA=" + (base / "env_schema.json").string() + " " +
                                cli_path() + " stub-render --in " + (base / "seed.json").string() +
                                " --size 64 --out " + (base / "y.png").string() +
                                " >/dev/null 2>&1";
        CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 3);  // proves the env path is read
    }
}
