#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <sstream>

#include "cephforge/defaults.hpp"
#include "cephforge/errors.hpp"
#include "cephforge/mira.hpp"
#include "cephforge/rng.hpp"

#include "reference.hpp"
#include "support.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace cephforge;

namespace {

const AngleConstraint& constraint_named(const AnatomySchema& schema, const std::string& name) {
    for (const auto& c : schema.constraints)
        if (c.name == name) return c;
    throw std::runtime_error("no constraint " + name);
}

std::string points_digest(const LandmarkSet& set) {
    std::ostringstream os;
    os.precision(17);
    for (const auto& p : set.points) os << p.x << "," << p.y << ";";
    return os.str();
}

AnatomySchema sna_only_schema() {
    AnatomySchema schema = default_schema();
    const AngleConstraint sna = constraint_named(schema, "SNA");
    schema.constraints = {sna};
    return schema;
}

}  // namespace

TEST_CASE("apply_affine: identity, rotation, scale-translate") {
    const LandmarkSet set = example_annotation();

    SUBCASE("identity returns the input exactly") {
        const LandmarkSet out = apply_affine(set, GlobalAffine{});
        for (std::size_t i = 0; i < set.points.size(); ++i) {
            CHECK(out.points[i].x == set.points[i].x);
            CHECK(out.points[i].y == set.points[i].y);
        }
        CHECK(out.width == set.width);
        CHECK(out.spacing_mm_per_px == set.spacing_mm_per_px);
    }

    SUBCASE("90 degree rotation about the origin maps (1,0) to (0,1)") {
        GlobalAffine a;
        a.theta = deg_to_rad(90.0);
        const Point2 out = apply_affine(Point2{1.0, 0.0}, a);
        CHECK(out.x == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(out.y == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("s_x=2, t=(3,0): (5,7) lands on (13,7)") {
        GlobalAffine a;
        a.s_x = 2.0;
        a.t_x = 3.0;
        const Point2 out = apply_affine(Point2{5.0, 7.0}, a);
        CHECK(out.x == doctest::Approx(13.0).epsilon(1e-12));
        CHECK(out.y == doctest::Approx(7.0).epsilon(1e-12));
    }

    SUBCASE("matches the homogeneous-matrix reference on random affines") {
        Rng rng(7);
        for (int i = 0; i < 300; ++i) {
            GlobalAffine a;
            a.s_x = rng.uniform(0.5, 2.0);
            a.s_y = rng.uniform(0.5, 2.0);
            a.theta = rng.uniform(-kPi, kPi);
            a.t_x = rng.uniform(-50, 50);
            a.t_y = rng.uniform(-50, 50);
            a.center = {rng.uniform(-100, 100), rng.uniform(-100, 100)};
            const Point2 p{rng.uniform(-200, 200), rng.uniform(-200, 200)};
            const Point2 got = apply_affine(p, a);
            const Point2 want = ref::affine_apply(p, a);
            CHECK(got.x == doctest::Approx(want.x).epsilon(1e-12));
            CHECK(got.y == doctest::Approx(want.y).epsilon(1e-12));
        }
    }
}

TEST_CASE("apply_angle_augmentation semantics") {
    const AnatomySchema schema = default_schema();
    const LandmarkSet set = example_annotation();
    const AngleConstraint& sna = constraint_named(schema, "SNA");

    SUBCASE("target equal to the current angle is a no-op") {
        const double current = measure_angle(set, sna);
        const LandmarkSet out = apply_angle_augmentation(set, sna, current, schema);
        for (std::size_t i = 0; i < set.points.size(); ++i) {
            CHECK(std::abs(out.points[i].x - set.points[i].x) < 1e-9);
            CHECK(std::abs(out.points[i].y - set.points[i].y) < 1e-9);
        }
    }

    SUBCASE("SNA driven to 83 measures 83 within 1e-6") {
        const LandmarkSet out = apply_angle_augmentation(set, sna, 83.0, schema);
        CHECK(std::abs(measure_angle(out, sna) - 83.0) < 1e-6);
        // untouched landmarks stay put: Sella, Nasion, Menton
        for (int id : {1, 2, 8}) {
            CHECK(out.at(id).x == set.at(id).x);
            CHECK(out.at(id).y == set.at(id).y);
        }
    }

    SUBCASE("coupled landmarks keep their distance to the vertex") {
        Rng rng(11);
        for (int trial = 0; trial < 100; ++trial) {
            // random valid-ish variant via a mild affine
            GlobalAffine a;
            a.s_x = rng.uniform(0.95, 1.05);
            a.s_y = rng.uniform(0.95, 1.05);
            a.theta = deg_to_rad(rng.uniform(-3, 3));
            a.center = {set.width / 2.0, set.height / 2.0};
            const LandmarkSet variant = apply_affine(set, a);
            const double target = rng.uniform(sna.min_deg, sna.max_deg);
            const LandmarkSet out = apply_angle_augmentation(variant, sna, target, schema);

            const Point2 vertex = variant.at(sna.vertex);
            for (int id : sna.coupled) {
                const double before = distance(variant.at(id), vertex);
                const double after = distance(out.at(id), vertex);
                CHECK(std::abs(before - after) < 1e-9);
            }
            CHECK(std::abs(measure_angle(out, sna) - target) < 1e-6);
        }
    }

    SUBCASE("degenerate vertex/ray geometry raises") {
        LandmarkSet bad = set;
        bad.at(sna.ray_a) = bad.at(sna.vertex);
        CHECK_THROWS_AS(apply_angle_augmentation(bad, sna, 80.0, schema), DegenerateInputError);
    }
}

TEST_CASE("mira_generate produces the requested count, valid and deterministic") {
    const AnatomySchema schema = default_schema();
    const std::vector<LandmarkSet> pool{example_annotation()};

    AugmentConfig cfg;
    cfg.n_l = 64;
    cfg.seed = 20240801;

    const auto first = mira_generate(pool, cfg, schema);
    REQUIRE(first.size() == 64);
    for (const auto& out : first) {
        CHECK(validate_landmark_set(out.set, schema).ok());
        CHECK(out.set.width == pool[0].width);
        CHECK(out.set.spacing_mm_per_px == pool[0].spacing_mm_per_px);
        CHECK(!out.provenance.applied_constraints.empty());
    }

    SUBCASE("second run is byte-identical") {
        const auto second = mira_generate(pool, cfg, schema);
        for (std::size_t i = 0; i < first.size(); ++i) {
            CHECK(points_digest(first[i].set) == points_digest(second[i].set));
            CHECK(first[i].provenance.seed_stream == second[i].provenance.seed_stream);
            CHECK(first[i].provenance.source_id == second[i].provenance.source_id);
        }
    }

#ifdef _OPENMP
    SUBCASE("output is independent of thread count") {
        const int saved = omp_get_max_threads();
        omp_set_num_threads(1);
        const auto serial = mira_generate(pool, cfg, schema);
        omp_set_num_threads(saved > 1 ? saved : 4);
        const auto parallel = mira_generate(pool, cfg, schema);
        REQUIRE(serial.size() == parallel.size());
        for (std::size_t i = 0; i < serial.size(); ++i)
            CHECK(points_digest(serial[i].set) == points_digest(parallel[i].set));
        omp_set_num_threads(saved);
    }
#endif

    SUBCASE("every applied constraint lands inside its declared range") {
        for (const auto& out : first) {
            for (const auto& applied : out.provenance.applied_constraints) {
                const AngleConstraint& c = constraint_named(schema, applied.name);
                CHECK(applied.target_deg >= c.min_deg);
                CHECK(applied.target_deg <= c.max_deg);
                CHECK(std::abs(measure_angle(out.set, c) - applied.target_deg) < 1e-6);
            }
        }
    }
}

TEST_CASE("global-only augmentation preserves collinearity and, when isotropic, angles") {
    const AnatomySchema schema = default_schema();
    const LandmarkSet base = example_annotation();

    // three synthetic collinear points appended onto a small path schema
    AnatomySchema tiny = test::path_schema(3, {{1, Rgb8{1, 2, 3}}});
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const Point2 a{rng.uniform(100, 900), rng.uniform(100, 900)};
        const Point2 d{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const double t1 = rng.uniform(0.1, 3.0), t2 = rng.uniform(3.0, 6.0);
        const LandmarkSet tri = test::make_set(
            {a, {a.x + t1 * d.x, a.y + t1 * d.y}, {a.x + t2 * d.x, a.y + t2 * d.y}}, 1000, 1000);

        GlobalAffine aff;
        aff.s_x = rng.uniform(0.9, 1.1);
        aff.s_y = rng.uniform(0.9, 1.1);
        aff.theta = deg_to_rad(rng.uniform(-5, 5));
        aff.t_x = rng.uniform(-30, 30);
        aff.t_y = rng.uniform(-30, 30);
        const LandmarkSet out = apply_affine(tri, aff);
        const Point2 u = out.points[1] - out.points[0];
        const Point2 v = out.points[2] - out.points[0];
        CHECK(std::abs(cross(u, v)) < 1e-6);
    }
    (void)tiny;

    // isotropic scaling preserves every constraint angle
    Rng rng2(6);
    for (int trial = 0; trial < 50; ++trial) {
        GlobalAffine aff;
        aff.s_x = aff.s_y = rng2.uniform(0.9, 1.1);
        aff.theta = deg_to_rad(rng2.uniform(-5, 5));
        aff.t_x = rng2.uniform(-30, 30);
        aff.t_y = rng2.uniform(-30, 30);
        aff.center = {base.width / 2.0, base.height / 2.0};
        const LandmarkSet out = apply_affine(base, aff);
        for (const auto& c : schema.constraints)
            CHECK(std::abs(measure_angle(out, c) - measure_angle(base, c)) < 1e-6);
    }
}

TEST_CASE("SNA-only config keeps every output inside [79, 83]") {
    const AnatomySchema schema = sna_only_schema();
    const std::vector<LandmarkSet> pool{example_annotation()};

    AugmentConfig cfg;
    cfg.n_l = 200;
    cfg.seed = 99;
    cfg.anatomical_min = 1;
    cfg.anatomical_max = 1;

    const auto outputs = mira_generate(pool, cfg, schema);
    for (const auto& out : outputs) {
        const double deg = measure_angle(out.set, schema.constraints[0]);
        CHECK(deg >= 79.0 - 1e-6);
        CHECK(deg <= 83.0 + 1e-6);
    }
}

TEST_CASE("impossible bounds exhaust the resample budget") {
    const AnatomySchema schema = default_schema();
    std::vector<LandmarkSet> pool{example_annotation()};

    AugmentConfig cfg;
    cfg.n_l = 1;
    cfg.seed = 1;
    cfg.translation_range_frac = {0.9, 0.95};  // guaranteed out of frame
    CHECK_THROWS_WITH_AS(mira_generate(pool, cfg, schema),
                         doctest::Contains("resample budget exhausted"), ValidationError);

    // same config with rejection off: samples come back as-is, out of frame
    cfg.reject_out_of_bounds = false;
    cfg.n_l = 3;
    const auto outputs = mira_generate(pool, cfg, schema);
    REQUIRE(outputs.size() == 3);
    for (const auto& out : outputs)
        CHECK_FALSE(validate_landmark_set(out.set, schema).ok());
}

TEST_CASE("config validation") {
    const AnatomySchema schema = default_schema();
    AugmentConfig cfg;
    cfg.n_l = 0;
    CHECK_THROWS_AS(check_config(cfg, schema), ConfigError);
    cfg.n_l = 1;
    cfg.anatomical_max = 100;
    CHECK_THROWS_AS(check_config(cfg, schema), ConfigError);
    cfg.anatomical_max = 3;
    cfg.scale_range = {1.1, 0.9};
    CHECK_THROWS_AS(check_config(cfg, schema), ConfigError);

    CHECK_THROWS_AS(mira_generate({}, AugmentConfig{}, schema), ValidationError);
}
