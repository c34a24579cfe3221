/**
 * @file mira.hpp
 * @brief Anatomy-informed random augmentation of landmark sets.
 *
 * Expands a small pool of annotated sets into many new ones: a global
 * affine (scale / rotate / translate about a center) followed by one or
 * more constraint augmentations that resample a named anatomical angle
 * inside its declared range, moving the constraint's coupled landmarks
 * rigidly along.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cephforge/geometry.hpp"
#include "cephforge/schema.hpp"

namespace cephforge {

/// Scale-then-rotate about `center`, then translate. With center (0,0)
/// this is the plain matrix
///   [ s_x cos t   -s_y sin t   t_x ]
///   [ s_x sin t    s_y cos t   t_y ]
struct GlobalAffine {
    double s_x = 1.0;
    double s_y = 1.0;
    double theta = 0.0;  // radians
    double t_x = 0.0;
    double t_y = 0.0;
    Point2 center{0.0, 0.0};
};

Point2 apply_affine(Point2 p, const GlobalAffine& a);

/// Maps every landmark through the affine; image metadata is untouched.
LandmarkSet apply_affine(const LandmarkSet& set, const GlobalAffine& a);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool empty() const { return !(lo <= hi); }
};

struct AugmentConfig {
    std::int64_t n_l = 1;           // number of output sets
    std::uint64_t seed = 0;
    Interval scale_range{0.92, 1.08};             // per axis, independent
    Interval rotation_range_deg{-5.0, 5.0};
    Interval translation_range_frac{-0.04, 0.04}; // fraction of image dimension
    int anatomical_min = 1;         // constraint augmentations per sample
    int anatomical_max = 3;
    bool reject_out_of_bounds = true;
};

void check_config(const AugmentConfig& cfg, const AnatomySchema& schema);

struct AppliedConstraint {
    std::string name;
    double target_deg = 0.0;
};

/// Reproducibility record for one generated set.
struct Provenance {
    std::string source_id;
    GlobalAffine affine;
    std::vector<AppliedConstraint> applied_constraints;
    std::uint64_t seed_stream = 0;
};

/// Rotates ray_b and the constraint's coupled landmarks rigidly about the
/// vertex so the measured angle becomes exactly target_deg, staying on the
/// same side of the vertex-ray_a axis. All other landmarks are unchanged.
LandmarkSet apply_angle_augmentation(const LandmarkSet& set, const AngleConstraint& c,
                                     double target_deg, const AnatomySchema& schema);

struct MiraOutput {
    LandmarkSet set;
    Provenance provenance;
};

/// Generates exactly cfg.n_l valid sets. Slot i draws from an independent
/// random stream derived from (cfg.seed, i), so output is identical for any
/// thread count. Each slot: pick a source, sample a global affine, sample
/// k in [anatomical_min, anatomical_max] distinct constraints with uniform
/// targets, then enforce all sampled targets simultaneously with up to 10
/// re-projection rounds. Invalid results are rejected and the slot
/// resampled; 1000 consecutive rejections raise ValidationError.
///
/// With reject_out_of_bounds off, samples are accepted as-is (points may
/// leave the frame; unapplied constraints may drift out of range) -- for
/// callers that crop or re-validate downstream. Clamping is never done.
///
/// `source_ids` labels provenance (defaults to "pool_<index>").
std::vector<MiraOutput> mira_generate(const std::vector<LandmarkSet>& pool,
                                      const AugmentConfig& cfg, const AnatomySchema& schema,
                                      const std::vector<std::string>& source_ids = {});

}  // namespace cephforge
