#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cephforge/defaults.hpp"
#include "cephforge/errors.hpp"
#include "cephforge/eval.hpp"
#include "cephforge/rng.hpp"

#include "reference.hpp"
#include "support.hpp"

#include <nlohmann/json.hpp>

using namespace cephforge;

namespace {

// two-landmark gt at fixed positions; pred offset per landmark in pixels
std::pair<LandmarkSet, LandmarkSet> offset_pair(const std::vector<Point2>& offsets,
                                                double spacing) {
    std::vector<Point2> gt_pts, pred_pts;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        const Point2 base{100.0 + 50.0 * static_cast<double>(i), 200.0};
        gt_pts.push_back(base);
        pred_pts.push_back(base + offsets[i]);
    }
    auto gt = test::make_set(gt_pts, 1000, 1000, spacing);
    auto pred = test::make_set(pred_pts, 1000, 1000, spacing);
    return {pred, gt};
}

}  // namespace

TEST_CASE("radial_errors hand cases") {
    SUBCASE("identical sets give all zeros") {
        auto [pred, gt] = offset_pair({{0, 0}, {0, 0}}, 0.1);
        for (const auto& e : radial_errors(pred, gt)) CHECK(e.error_mm == 0.0);
    }

    SUBCASE("3-4-5 pixel offset at 0.1 mm/px is half a millimetre") {
        auto [pred, gt] = offset_pair({{3, 4}}, 0.1);
        const auto errs = radial_errors(pred, gt);
        REQUIRE(errs.size() == 1);
        CHECK(errs[0].error_mm == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(errs[0].landmark == 1);
    }

    SUBCASE("same offset at the 0.125 mm/px scanner spacing") {
        auto [pred, gt] = offset_pair({{3, 4}}, 0.125);
        CHECK(radial_errors(pred, gt)[0].error_mm == doctest::Approx(0.625).epsilon(1e-12));
    }

    SUBCASE("landmark count mismatch raises") {
        auto [pred, gt] = offset_pair({{0, 0}, {0, 0}}, 0.1);
        pred.points.pop_back();
        CHECK_THROWS_AS(radial_errors(pred, gt), ValidationError);
    }
}

TEST_CASE("evaluate hand cases") {
    const std::vector<double> thresholds{2.0, 2.5, 3.0, 4.0};

    SUBCASE("identical pred/gt: MRE 0, SD 0, SDR 100% everywhere") {
        std::vector<std::pair<LandmarkSet, LandmarkSet>> pairs;
        for (int i = 0; i < 3; ++i) pairs.push_back(offset_pair({{0, 0}, {0, 0}}, 0.1));
        const EvalReport r = evaluate(pairs, thresholds);
        CHECK(r.mre_mm == 0.0);
        CHECK(r.sd_mm == 0.0);
        for (const auto& [t, frac] : r.sdr) CHECK(frac == 1.0);
        CHECK(r.n_landmarks == 6);
    }

    SUBCASE("errors {0.5, 2.5} mm: MRE 1.5, SDR {0.5, 1, 1, 1} with inclusive boundary") {
        // 0.5 mm = (3,4)px at 0.1; 2.5 mm = (15,20)px at 0.1
        auto pair = offset_pair({{3, 4}, {15, 20}}, 0.1);
        const EvalReport r = evaluate({pair}, thresholds);
        CHECK(r.mre_mm == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(r.sdr[0].second == doctest::Approx(0.5));   // 2.0 mm
        CHECK(r.sdr[1].second == doctest::Approx(1.0));   // 2.5 mm inclusive
        CHECK(r.sdr[2].second == doctest::Approx(1.0));
        CHECK(r.sdr[3].second == doctest::Approx(1.0));
        CHECK(r.sd_mm == doctest::Approx(1.0).epsilon(1e-12));  // population SD of {0.5, 2.5}
    }

    SUBCASE("exclusive boundary drops the equality case") {
        auto pair = offset_pair({{3, 4}, {15, 20}}, 0.1);
        EvalConfig cfg;
        cfg.inclusive_sdr = false;
        const EvalReport r = evaluate({pair}, thresholds, cfg);
        CHECK(r.sdr[1].second == doctest::Approx(0.5));  // 2.5 mm no longer counts
    }

    SUBCASE("per-tag subset rows mirror the overall shape") {
        auto tagged = offset_pair({{3, 4}, {15, 20}}, 0.1);
        tagged.second.tags = {"Deciduous teeth"};
        auto plain = offset_pair({{0, 0}, {0, 0}}, 0.1);
        const EvalReport r = evaluate({tagged, plain}, thresholds);
        REQUIRE(r.subsets.count("Deciduous teeth") == 1);
        const EvalReport& sub = r.subsets.at("Deciduous teeth");
        CHECK(sub.n_landmarks == 2);
        CHECK(sub.mre_mm == doctest::Approx(1.5));
        CHECK(sub.sdr.size() == thresholds.size());
        const std::string table = report_table(r);
        CHECK(table.find("Deciduous teeth") != std::string::npos);
        CHECK(table.find("Overall") != std::string::npos);
    }

    SUBCASE("empty pool and bad thresholds raise") {
        CHECK_THROWS_AS(evaluate({}, thresholds), ValidationError);
        auto pair = offset_pair({{0, 0}}, 0.1);
        CHECK_THROWS_AS(evaluate({pair}, {3.0, 2.0}), ConfigError);
        CHECK_THROWS_AS(evaluate({pair}, {-1.0}), ConfigError);
    }
}

TEST_CASE("metric oracle equivalence on 1000 random pools") {
    Rng rng(555);
    const std::vector<double> thresholds{2.0, 2.5, 3.0, 4.0};
    for (int trial = 0; trial < 1000; ++trial) {
        const int n_pairs = 1 + static_cast<int>(rng.next_below(4));
        const int n_points = 1 + static_cast<int>(rng.next_below(6));
        std::vector<std::pair<LandmarkSet, LandmarkSet>> pairs;
        const double spacing = rng.uniform(0.05, 0.2);
        for (int p = 0; p < n_pairs; ++p) {
            std::vector<Point2> offsets;
            for (int i = 0; i < n_points; ++i)
                offsets.push_back({rng.uniform(-30, 30), rng.uniform(-30, 30)});
            pairs.push_back(offset_pair(offsets, spacing));
        }
        const EvalReport got = evaluate(pairs, thresholds, {}, false);
        const ref::EvalSummary want = ref::evaluate(pairs, thresholds);
        CHECK(std::abs(got.mre_mm - want.mre_mm) <= 1e-9 * std::max(1.0, want.mre_mm));
        CHECK(std::abs(got.sd_mm - want.sd_mm) <= 1e-9 * std::max(1.0, want.sd_mm));
        for (std::size_t i = 0; i < thresholds.size(); ++i)
            CHECK(got.sdr[i].second == doctest::Approx(want.sdr[i]).epsilon(1e-12));

        // SDR monotone in threshold
        for (std::size_t i = 0; i + 1 < got.sdr.size(); ++i)
            CHECK(got.sdr[i].second <= got.sdr[i + 1].second);

        // SDR at the maximum observed error is exactly 1 (inclusive boundary)
        double max_err = 0.0;
        for (const auto& [pred, gt] : pairs)
            for (const auto& e : radial_errors(pred, gt)) max_err = std::max(max_err, e.error_mm);
        if (max_err > 0.0) {
            const EvalReport at_max = evaluate(pairs, {max_err}, {}, false);
            CHECK(at_max.sdr[0].second == 1.0);
        }
    }
}

TEST_CASE("pooling invariance and scale consistency") {
    Rng rng(77);
    std::vector<std::pair<LandmarkSet, LandmarkSet>> pairs;
    for (int p = 0; p < 5; ++p) {
        std::vector<Point2> offsets;
        for (int i = 0; i < 7; ++i) offsets.push_back({rng.uniform(-20, 20), rng.uniform(-20, 20)});
        pairs.push_back(offset_pair(offsets, 0.1));
    }
    const std::vector<double> thresholds{1.0, 2.0};

    // order of pairs must not matter
    auto shuffled = pairs;
    std::swap(shuffled[0], shuffled[4]);
    std::swap(shuffled[1], shuffled[3]);
    const EvalReport a = evaluate(pairs, thresholds, {}, false);
    const EvalReport b = evaluate(shuffled, thresholds, {}, false);
    CHECK(a.mre_mm == doctest::Approx(b.mre_mm).epsilon(1e-12));
    CHECK(a.sd_mm == doctest::Approx(b.sd_mm).epsilon(1e-12));

    // doubling pixel errors with halved spacing leaves mm metrics unchanged
    std::vector<std::pair<LandmarkSet, LandmarkSet>> scaled;
    for (const auto& [pred, gt] : pairs) {
        LandmarkSet pred2 = pred, gt2 = gt;
        for (std::size_t i = 0; i < pred.points.size(); ++i) {
            const Point2 d = pred.points[i] - gt.points[i];
            pred2.points[i] = gt.points[i] + Point2{2.0 * d.x, 2.0 * d.y};
        }
        pred2.spacing_mm_per_px = gt2.spacing_mm_per_px = gt.spacing_mm_per_px / 2.0;
        scaled.emplace_back(pred2, gt2);
    }
    const EvalReport c = evaluate(scaled, thresholds, {}, false);
    CHECK(c.mre_mm == doctest::Approx(a.mre_mm).epsilon(1e-12));
    CHECK(c.sd_mm == doctest::Approx(a.sd_mm).epsilon(1e-12));
    for (std::size_t i = 0; i < thresholds.size(); ++i)
        CHECK(c.sdr[i].second == a.sdr[i].second);
}

TEST_CASE("compare_reports and delta formatting") {
    SUBCASE("formatting matches the published convention") {
        CHECK(format_with_delta(82.206, 6.454) == "82.206(+6.454)");
        CHECK(format_with_delta(1.365, -0.185) == "1.365(-0.185)");
        CHECK(format_with_delta(5.0, 0.0) == "5.000(+0.000)");
    }

    SUBCASE("SDR 75.752 to 82.206 reports +6.454") {
        auto mk = [](double sdr_frac, double mre) {
            EvalReport r;
            r.mre_mm = mre;
            r.sd_mm = 0.0;
            r.sdr = {{2.0, sdr_frac}};
            r.n_landmarks = 1000;
            return r;
        };
        const EvalReport a = mk(0.75752, 1.550);
        const EvalReport b = mk(0.82206, 1.365);
        const auto deltas = compare_reports(a, b);
        REQUIRE(deltas.size() == 3);  // MRE, SD, SDR@2mm
        CHECK(deltas[0].metric == "MRE");
        CHECK(deltas[0].delta == doctest::Approx(-0.185).epsilon(1e-9));
        CHECK(deltas[0].formatted == "1.365(-0.185)");
        CHECK(deltas[2].metric == "SDR@2mm");
        CHECK(deltas[2].delta == doctest::Approx(6.454).epsilon(1e-9));
        CHECK(deltas[2].formatted == "82.206(+6.454)");
    }

    SUBCASE("identical reports give all-zero deltas") {
        EvalReport r;
        r.sdr = {{2.0, 0.5}};
        for (const auto& d : compare_reports(r, r)) CHECK(d.delta == 0.0);
    }

    SUBCASE("threshold mismatch raises") {
        EvalReport a, b;
        a.sdr = {{2.0, 0.5}};
        b.sdr = {{2.5, 0.5}};
        CHECK_THROWS_AS(compare_reports(a, b), ValidationError);
    }
}

TEST_CASE("report JSON records the config header") {
    auto pair = offset_pair({{3, 4}}, 0.1);
    const EvalReport r = evaluate({pair}, {2.0});
    const auto doc = report_to_json(r);
    CHECK(doc.at("config").at("sd") == "population");
    CHECK(doc.at("config").at("sdr_boundary") == "inclusive");
    CHECK(doc.at("n_landmarks") == 1);
    CHECK(doc.at("sdr").contains("2"));
}
