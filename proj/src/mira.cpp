/**
 * @file mira.cpp
 */
#include "cephforge/mira.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cephforge/errors.hpp"
#include "cephforge/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cephforge {

namespace {

constexpr int kMaxAttemptsPerSlot = 1000;
constexpr int kReprojectionRounds = 10;
constexpr double kAngleTolDeg = 1e-9;

Point2 centroid(const LandmarkSet& set) {
    Point2 c{0.0, 0.0};
    for (const Point2& p : set.points) {
        c.x += p.x;
        c.y += p.y;
    }
    const double n = static_cast<double>(set.points.size());
    return {c.x / n, c.y / n};
}

/// Signed angle (radians) from the vertex->ray_a direction to the
/// vertex->ray_b direction, in (-pi, pi].
double signed_ray_angle(const LandmarkSet& set, const AngleConstraint& c) {
    const Point2 v = set.at(c.vertex);
    const Point2 a = set.at(c.ray_a) - v;
    const Point2 b = set.at(c.ray_b) - v;
    if (norm(a) == 0.0 || norm(b) == 0.0)
        throw DegenerateInputError("angle augmentation('" + c.name +
                                   "'): ray endpoint coincides with vertex");
    return std::atan2(cross(a, b), dot(a, b));
}

void rotate_about(LandmarkSet& set, Point2 pivot, double delta, const std::vector<int>& ids) {
    const double cs = std::cos(delta);
    const double sn = std::sin(delta);
    for (int id : ids) {
        Point2 r = set.at(id) - pivot;
        set.at(id) = {pivot.x + cs * r.x - sn * r.y, pivot.y + sn * r.x + cs * r.y};
    }
}

std::vector<int> moved_ids(const AngleConstraint& c) {
    std::vector<int> ids = c.coupled;
    ids.push_back(c.ray_b);
    return ids;
}

/// Re-applies the sampled targets in schema order until all hold at once.
/// Coupled sets may overlap across constraints, so a later application can
/// disturb an earlier angle; for acyclic dependency patterns this settles
/// in two or three rounds. Returns false when the budget is exhausted.
bool enforce_targets(LandmarkSet& set, const AnatomySchema& schema,
                     const std::vector<std::pair<const AngleConstraint*, double>>& targets) {
    for (int round = 0; round < kReprojectionRounds; ++round) {
        bool all_ok = true;
        for (const auto& [constraint, target] : targets) {
            if (std::abs(measure_angle(set, *constraint) - target) <= kAngleTolDeg) continue;
            all_ok = false;
            set = apply_angle_augmentation(set, *constraint, target, schema);
        }
        if (all_ok) return true;
    }
    for (const auto& [constraint, target] : targets)
        if (std::abs(measure_angle(set, *constraint) - target) > kAngleTolDeg) return false;
    return true;
}

}  // namespace

Point2 apply_affine(Point2 p, const GlobalAffine& a) {
    const double cs = std::cos(a.theta);
    const double sn = std::sin(a.theta);
    const double dx = p.x - a.center.x;
    const double dy = p.y - a.center.y;
    // scale first, then rotate: A = R(theta) * S(s_x, s_y)
    const double rx = a.s_x * cs * dx - a.s_y * sn * dy;
    const double ry = a.s_x * sn * dx + a.s_y * cs * dy;
    return {rx + a.center.x + a.t_x, ry + a.center.y + a.t_y};
}

LandmarkSet apply_affine(const LandmarkSet& set, const GlobalAffine& a) {
    if (!(a.s_x > 0.0) || !(a.s_y > 0.0))
        throw ConfigError("affine scale factors must be positive");
    LandmarkSet out = set;
    for (Point2& p : out.points) p = apply_affine(p, a);
    return out;
}

void check_config(const AugmentConfig& cfg, const AnatomySchema& schema) {
    if (cfg.n_l < 1) throw ConfigError("n_l must be >= 1");
    if (cfg.scale_range.empty() || cfg.rotation_range_deg.empty() ||
        cfg.translation_range_frac.empty())
        throw ConfigError("augmentation ranges must be non-empty intervals");
    if (!(cfg.scale_range.lo > 0.0)) throw ConfigError("scale range must be positive");
    const int n_constraints = static_cast<int>(schema.constraints.size());
    if (cfg.anatomical_min < 0 || cfg.anatomical_min > cfg.anatomical_max ||
        cfg.anatomical_max > n_constraints)
        throw ConfigError("need 0 <= anatomical_min <= anatomical_max <= " +
                          std::to_string(n_constraints));
}

LandmarkSet apply_angle_augmentation(const LandmarkSet& set, const AngleConstraint& c,
                                     double target_deg, const AnatomySchema& schema) {
    if (target_deg < c.min_deg - kAngleTolDeg || target_deg > c.max_deg + kAngleTolDeg)
        throw ConfigError("target " + std::to_string(target_deg) + " deg outside [" +
                          std::to_string(c.min_deg) + "," + std::to_string(c.max_deg) +
                          "] of constraint '" + c.name + "'");
    (void)schema;

    LandmarkSet out = set;
    const double phi = signed_ray_angle(out, c);
    // keep ray_b on its current side of the vertex-ray_a axis
    const double side = (phi < 0.0) ? -1.0 : 1.0;
    const double delta = side * deg_to_rad(target_deg) - phi;
    rotate_about(out, out.at(c.vertex), delta, moved_ids(c));
    return out;
}

std::vector<MiraOutput> mira_generate(const std::vector<LandmarkSet>& pool,
                                      const AugmentConfig& cfg, const AnatomySchema& schema,
                                      const std::vector<std::string>& source_ids) {
    if (pool.empty()) throw ValidationError("mira_generate: pool is empty");
    if (!source_ids.empty() && source_ids.size() != pool.size())
        throw ConfigError("source_ids size must match pool size");
    check_config(cfg, schema);
    for (std::size_t i = 0; i < pool.size(); ++i) {
        auto report = validate_landmark_set(pool[i], schema);
        if (!report.ok())
            throw ValidationError("pool entry " + std::to_string(i) +
                                  " invalid: " + report.summary());
    }

    const auto n_out = static_cast<std::size_t>(cfg.n_l);
    std::vector<MiraOutput> outputs(n_out);
    std::vector<std::string> slot_errors(n_out);

#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t slot = 0; slot < cfg.n_l; ++slot) {
        const std::uint64_t stream = derive_stream(cfg.seed, static_cast<std::uint64_t>(slot));
        Rng rng(stream);
        bool produced = false;

        for (int attempt = 0; attempt < kMaxAttemptsPerSlot && !produced; ++attempt) {
            const std::size_t src = static_cast<std::size_t>(rng.next_below(pool.size()));
            const LandmarkSet& source = pool[src];

            GlobalAffine affine;
            affine.s_x = rng.uniform(cfg.scale_range.lo, cfg.scale_range.hi);
            affine.s_y = rng.uniform(cfg.scale_range.lo, cfg.scale_range.hi);
            affine.theta =
                deg_to_rad(rng.uniform(cfg.rotation_range_deg.lo, cfg.rotation_range_deg.hi));
            affine.t_x = rng.uniform(cfg.translation_range_frac.lo, cfg.translation_range_frac.hi) *
                         source.width;
            affine.t_y = rng.uniform(cfg.translation_range_frac.lo, cfg.translation_range_frac.hi) *
                         source.height;
            affine.center = centroid(source);

            LandmarkSet candidate = apply_affine(source, affine);

            // sample k distinct constraints (partial Fisher-Yates on indices)
            const int n_constraints = static_cast<int>(schema.constraints.size());
            const int k = rng.uniform_int(cfg.anatomical_min, cfg.anatomical_max);
            std::vector<int> order(static_cast<std::size_t>(n_constraints));
            std::iota(order.begin(), order.end(), 0);
            for (int j = 0; j < k; ++j) {
                const int pick =
                    j + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_constraints - j)));
                std::swap(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(pick)]);
            }
            std::vector<int> chosen(order.begin(), order.begin() + k);
            std::sort(chosen.begin(), chosen.end());  // schema order

            std::vector<std::pair<const AngleConstraint*, double>> targets;
            targets.reserve(static_cast<std::size_t>(k));
            for (int ci : chosen) {
                const AngleConstraint& c = schema.constraints[static_cast<std::size_t>(ci)];
                targets.emplace_back(&c, rng.uniform(c.min_deg, c.max_deg));
            }

            bool ok = true;
            try {
                for (const auto& [constraint, target] : targets)
                    candidate = apply_angle_augmentation(candidate, *constraint, target, schema);
                ok = enforce_targets(candidate, schema, targets);
            } catch (const DegenerateInputError&) {
                ok = false;
            }

            if (ok && cfg.reject_out_of_bounds)
                ok = validate_landmark_set(candidate, schema).ok();

            if (!ok) continue;

            Provenance prov;
            prov.source_id = source_ids.empty() ? "pool_" + std::to_string(src) : source_ids[src];
            prov.affine = affine;
            for (const auto& [constraint, target] : targets)
                prov.applied_constraints.push_back({constraint->name, target});
            prov.seed_stream = stream;

            outputs[static_cast<std::size_t>(slot)] = {std::move(candidate), std::move(prov)};
            produced = true;
        }

        if (!produced)
            slot_errors[static_cast<std::size_t>(slot)] =
                "slot " + std::to_string(slot) + ": resample budget exhausted (" +
                std::to_string(kMaxAttemptsPerSlot) + " consecutive rejections)";
    }

    for (const auto& err : slot_errors)
        if (!err.empty()) throw ValidationError("mira_generate: " + err);
    return outputs;
}

}  // namespace cephforge
