/**
 * @file eval.hpp
 * @brief Landmark detection metrics: mean radial error, its standard
 *        deviation, and success detection rates at mm thresholds, overall
 *        and per feature tag.
 */
#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cephforge/schema.hpp"

#include <nlohmann/json_fwd.hpp>

namespace cephforge {

struct RadialError {
    int landmark = 0;      // 1-based id
    double error_mm = 0.0;
};

/// Per-landmark Euclidean pixel distance times the ground-truth spacing.
/// Pred and gt must carry the same number of landmarks.
std::vector<RadialError> radial_errors(const LandmarkSet& pred, const LandmarkSet& gt);

struct EvalConfig {
    bool population_sd = true;   // divide by N (not N-1)
    bool inclusive_sdr = true;   // error <= threshold counts as success
};

struct EvalReport {
    double mre_mm = 0.0;
    double sd_mm = 0.0;
    std::vector<std::pair<double, double>> sdr;  // (threshold mm, fraction)
    std::size_t n_landmarks = 0;                 // pooled error count
    std::map<std::string, EvalReport> subsets;   // per feature tag
    EvalConfig config;
};

/// Pools all per-landmark errors across pairs. Subset reports cover the
/// pairs whose ground truth carries each tag. Thresholds must be positive
/// and sorted ascending.
EvalReport evaluate(const std::vector<std::pair<LandmarkSet, LandmarkSet>>& pairs,
                    const std::vector<double>& thresholds_mm, const EvalConfig& config = {},
                    bool by_tag = true);

nlohmann::json report_to_json(const EvalReport& report);

/// Fixed-width text table, one row overall plus one per tag.
std::string report_table(const EvalReport& report);

struct MetricDelta {
    std::string metric;   // "MRE", "SD", "SDR@2mm", ...
    double a = 0.0;       // baseline value (mm, or percent for SDR)
    double b = 0.0;       // comparison value
    double delta = 0.0;   // b - a
    std::string formatted;  // e.g. "82.206(+6.454)"
};

/// Signed per-metric differences b - a. Reports must share thresholds.
std::vector<MetricDelta> compare_reports(const EvalReport& a, const EvalReport& b);

/// "82.206(+6.454)" formatting, three decimals, explicit sign on the delta.
std::string format_with_delta(double value, double delta);

}  // namespace cephforge
