/**
 * @file eval.cpp
 */
#include "cephforge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "cephforge/errors.hpp"

#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cephforge {

std::vector<RadialError> radial_errors(const LandmarkSet& pred, const LandmarkSet& gt) {
    if (pred.points.size() != gt.points.size())
        throw ValidationError("radial_errors: landmark id mismatch (pred has " +
                              std::to_string(pred.points.size()) + ", gt has " +
                              std::to_string(gt.points.size()) + ")");
    if (!(gt.spacing_mm_per_px > 0.0))
        throw ValidationError("radial_errors: ground truth spacing must be > 0");

    std::vector<RadialError> errors(gt.points.size());
    for (std::size_t i = 0; i < gt.points.size(); ++i) {
        errors[i].landmark = static_cast<int>(i + 1);
        errors[i].error_mm = distance(pred.points[i], gt.points[i]) * gt.spacing_mm_per_px;
    }
    return errors;
}

namespace {

EvalReport pooled_report(const std::vector<double>& errors, const std::vector<double>& thresholds,
                         const EvalConfig& config) {
    EvalReport report;
    report.config = config;
    report.n_landmarks = errors.size();
    if (errors.empty()) throw ValidationError("evaluate: empty error pool");

    double sum = 0.0;
    for (double e : errors) sum += e;
    report.mre_mm = sum / static_cast<double>(errors.size());

    double sq = 0.0;
    for (double e : errors) {
        const double d = e - report.mre_mm;
        sq += d * d;
    }
    const double denom = config.population_sd
                             ? static_cast<double>(errors.size())
                             : static_cast<double>(std::max<std::size_t>(errors.size() - 1, 1));
    report.sd_mm = std::sqrt(sq / denom);

    for (double t : thresholds) {
        std::size_t hit = 0;
        for (double e : errors)
            if (config.inclusive_sdr ? (e <= t) : (e < t)) ++hit;
        report.sdr.emplace_back(t, static_cast<double>(hit) / static_cast<double>(errors.size()));
    }
    return report;
}

}  // namespace

EvalReport evaluate(const std::vector<std::pair<LandmarkSet, LandmarkSet>>& pairs,
                    const std::vector<double>& thresholds_mm, const EvalConfig& config,
                    bool by_tag) {
    if (pairs.empty()) throw ValidationError("evaluate: no prediction/ground-truth pairs");
    for (std::size_t i = 0; i + 1 < thresholds_mm.size(); ++i)
        if (!(thresholds_mm[i] < thresholds_mm[i + 1]))
            throw ConfigError("evaluate: thresholds must be sorted ascending");
    for (double t : thresholds_mm)
        if (!(t > 0.0)) throw ConfigError("evaluate: thresholds must be positive");

    // per-pair errors computed in parallel, pooled serially in pair order
    std::vector<std::vector<RadialError>> per_pair(pairs.size());
    std::exception_ptr failure;
    const std::int64_t n = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            per_pair[static_cast<std::size_t>(i)] =
                radial_errors(pairs[static_cast<std::size_t>(i)].first,
                              pairs[static_cast<std::size_t>(i)].second);
        } catch (...) {
#pragma omp critical(cephforge_eval)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<double> pool;
    for (const auto& errs : per_pair)
        for (const auto& e : errs) pool.push_back(e.error_mm);

    EvalReport report = pooled_report(pool, thresholds_mm, config);

    if (by_tag) {
        std::set<std::string> tags;
        for (const auto& [pred, gt] : pairs)
            for (const auto& t : gt.tags) tags.insert(t);
        for (const auto& tag : tags) {
            std::vector<double> subset;
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                const auto& gt_tags = pairs[i].second.tags;
                if (std::find(gt_tags.begin(), gt_tags.end(), tag) == gt_tags.end()) continue;
                for (const auto& e : per_pair[i]) subset.push_back(e.error_mm);
            }
            report.subsets[tag] = pooled_report(subset, thresholds_mm, config);
        }
    }
    return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json doc;
    doc["config"] = {{"sd", report.config.population_sd ? "population" : "sample"},
                     {"sdr_boundary", report.config.inclusive_sdr ? "inclusive" : "exclusive"}};
    doc["mre_mm"] = report.mre_mm;
    doc["sd_mm"] = report.sd_mm;
    doc["n_landmarks"] = report.n_landmarks;
    nlohmann::json sdr = nlohmann::json::object();
    for (const auto& [t, frac] : report.sdr) {
        std::ostringstream key;
        key << t;
        sdr[key.str()] = frac;
    }
    doc["sdr"] = sdr;
    if (!report.subsets.empty()) {
        nlohmann::json subsets = nlohmann::json::object();
        for (const auto& [tag, sub] : report.subsets) subsets[tag] = report_to_json(sub);
        doc["subsets"] = subsets;
    }
    return doc;
}

namespace {

std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

void table_row(std::ostringstream& os, const std::string& label, const EvalReport& r) {
    os << label;
    for (std::size_t i = label.size(); i < 26; ++i) os << ' ';
    std::string mre = fixed3(r.mre_mm) + " ± " + fixed3(r.sd_mm);
    os << mre;
    for (std::size_t i = mre.size(); i < 18; ++i) os << ' ';
    for (const auto& [t, frac] : r.sdr) {
        std::string cell = fixed3(frac * 100.0);
        os << "  ";
        for (std::size_t i = cell.size(); i < 10; ++i) os << ' ';
        os << cell;
    }
    os << "\n";
}

}  // namespace

std::string report_table(const EvalReport& report) {
    std::ostringstream os;
    os << "Feature                   MRE ± SD (mm)   ";
    for (const auto& [t, frac] : report.sdr) {
        std::ostringstream h;
        h << "SDR " << t << "mm";
        os << "  ";
        for (std::size_t i = h.str().size(); i < 10; ++i) os << ' ';
        os << h.str();
    }
    os << "\n";
    table_row(os, "Overall", report);
    for (const auto& [tag, sub] : report.subsets) table_row(os, tag, sub);
    return os.str();
}

std::string format_with_delta(double value, double delta) {
    std::string sign = delta < 0 ? "" : "+";  // negative sign comes from the number
    return fixed3(value) + "(" + sign + fixed3(delta) + ")";
}

std::vector<MetricDelta> compare_reports(const EvalReport& a, const EvalReport& b) {
    if (a.sdr.size() != b.sdr.size())
        throw ValidationError("compare_reports: threshold mismatch");
    for (std::size_t i = 0; i < a.sdr.size(); ++i)
        if (a.sdr[i].first != b.sdr[i].first)
            throw ValidationError("compare_reports: threshold mismatch at position " +
                                  std::to_string(i));

    std::vector<MetricDelta> deltas;
    auto push = [&](std::string metric, double va, double vb) {
        MetricDelta d;
        d.metric = std::move(metric);
        d.a = va;
        d.b = vb;
        d.delta = vb - va;
        d.formatted = format_with_delta(vb, d.delta);
        deltas.push_back(std::move(d));
    };
    push("MRE", a.mre_mm, b.mre_mm);
    push("SD", a.sd_mm, b.sd_mm);
    for (std::size_t i = 0; i < a.sdr.size(); ++i) {
        std::ostringstream name;
        name << "SDR@" << a.sdr[i].first << "mm";
        push(name.str(), a.sdr[i].second * 100.0, b.sdr[i].second * 100.0);
    }
    return deltas;
}

}  // namespace cephforge
