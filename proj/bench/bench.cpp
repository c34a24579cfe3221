/**
 * @file bench.cpp
 * @brief Timing comparison: naive serial reference vs the OpenMP kernels
 *        at 1 and N threads.
 *
 * Usage: cephforge_bench [repetitions]
 */
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "cephforge/ait.hpp"
#include "cephforge/defaults.hpp"
#include "cephforge/eval.hpp"
#include "cephforge/heatmap.hpp"
#include "cephforge/mira.hpp"
#include "cephforge/rng.hpp"
#include "cephforge/schema.hpp"

#include "reference.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace cephforge;
using Clock = std::chrono::steady_clock;

namespace {

volatile double g_sink = 0.0;  // keeps results observable

template <typename F>
double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto start = Clock::now();
        fn();
        const double s = std::chrono::duration<double>(Clock::now() - start).count();
        if (s < best) best = s;
    }
    return best;
}

void report(const char* kernel, double ref_s, double omp1_s, double ompN_s) {
    std::printf("%-28s %10.4f s %12.4f s %12.4f s %9.2fx\n", kernel, ref_s, omp1_s, ompN_s,
                ompN_s > 0.0 ? omp1_s / ompN_s : 0.0);
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
    omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace

int main(int argc, char** argv) {
    const int reps = argc > 1 ? std::atoi(argv[1]) : 3;
    const int threads = max_threads();
    std::printf("cephforge kernel benchmark (best of %d, %d threads)\n\n", reps, threads);
    std::printf("%-28s %12s %14s %14s %10s\n", "kernel", "serial ref", "omp @1", "omp @N",
                "speedup");

    const AnatomySchema schema = default_schema();
    const LandmarkSet example = example_annotation();

    // detector-input geometry: the example scaled onto a 512 x 512 frame
    LandmarkSet square = example;
    for (auto& p : square.points) {
        p.x *= 512.0 / example.width;
        p.y *= 512.0 / example.height;
    }
    square.width = square.height = 512;

    // --- heatmap encode (38 planes x 128^2) ---
    {
        const CodecConfig cfg{};
        const double ref_s = time_best_of(reps, [&] {
            const auto s = ref::encode(square, cfg);
            g_sink = g_sink + s.data[0];
        });
        set_threads(1);
        const double omp1 = time_best_of(reps, [&] {
            const auto s = encode(square, cfg);
            g_sink = g_sink + s.data[0];
        });
        set_threads(threads);
        const double ompN = time_best_of(reps, [&] {
            const auto s = encode(square, cfg);
            g_sink = g_sink + s.data[0];
        });
        report("heatmap encode", ref_s, omp1, ompN);
    }

    // --- mse over two stacks ---
    {
        const CodecConfig cfg{};
        const auto a = encode(square, cfg);
        auto b = a;
        for (auto& v : b.data) v *= 0.75f;
        const double ref_s = time_best_of(reps, [&] { g_sink = g_sink + ref::mse(a, b); });
        set_threads(1);
        const double omp1 = time_best_of(reps, [&] { g_sink = g_sink + mse_loss(a, b); });
        set_threads(threads);
        const double ompN = time_best_of(reps, [&] { g_sink = g_sink + mse_loss(a, b); });
        report("heatmap mse", ref_s, omp1, ompN);
    }

    // --- rasterize batch (64 sets at 512^2); serial ref = one-by-one loop ---
    {
        AugmentConfig cfg;
        cfg.n_l = 64;
        cfg.seed = 9;
        std::vector<LandmarkSet> sets;
        for (auto& out : mira_generate({example}, cfg, schema)) sets.push_back(std::move(out.set));

        const double ref_s = time_best_of(reps, [&] {
            for (const auto& s : sets) g_sink = g_sink + rasterize(s, schema, 512).pixels[0].r;
        });
        set_threads(1);
        const double omp1 = time_best_of(reps, [&] {
            g_sink = g_sink + rasterize_batch(sets, schema, 512)[0].pixels[0].r;
        });
        set_threads(threads);
        const double ompN = time_best_of(reps, [&] {
            g_sink = g_sink + rasterize_batch(sets, schema, 512)[0].pixels[0].r;
        });
        report("rasterize batch x64", ref_s, omp1, ompN);
    }

    // --- mira generation (1024 sets) ---
    {
        AugmentConfig cfg;
        cfg.n_l = 1024;
        cfg.seed = 10;
        // serial reference: thread count 1 doubles as the plain serial loop
        set_threads(1);
        const double ref_s = time_best_of(reps, [&] {
            g_sink = g_sink + mira_generate({example}, cfg, schema)[0].set.points[0].x;
        });
        const double omp1 = ref_s;
        set_threads(threads);
        const double ompN = time_best_of(reps, [&] {
            g_sink = g_sink + mira_generate({example}, cfg, schema)[0].set.points[0].x;
        });
        report("mira generate x1024", ref_s, omp1, ompN);
    }

    // --- evaluate (200 pairs x 38 landmarks) ---
    {
        Rng rng(11);
        std::vector<std::pair<LandmarkSet, LandmarkSet>> pairs;
        for (int i = 0; i < 200; ++i) {
            LandmarkSet pred = example;
            for (auto& p : pred.points) {
                p.x += rng.uniform(-10, 10);
                p.y += rng.uniform(-10, 10);
            }
            pairs.emplace_back(std::move(pred), example);
        }
        const std::vector<double> thresholds{2.0, 2.5, 3.0, 4.0};
        const double ref_s =
            time_best_of(reps, [&] { g_sink = g_sink + ref::evaluate(pairs, thresholds).mre_mm; });
        set_threads(1);
        const double omp1 =
            time_best_of(reps, [&] { g_sink = g_sink + evaluate(pairs, thresholds, {}, false).mre_mm; });
        set_threads(threads);
        const double ompN =
            time_best_of(reps, [&] { g_sink = g_sink + evaluate(pairs, thresholds, {}, false).mre_mm; });
        report("evaluate 200 pairs", ref_s, omp1, ompN);
    }

    std::printf("\n(sink %g)\n", g_sink);
    return 0;
}
