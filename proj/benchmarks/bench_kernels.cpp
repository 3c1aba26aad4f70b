// Compares the OpenMP-parallel kernels against their serial reference
// implementations (same inputs, identical outputs expected).

#include "sra/clustering.hpp"
#include "sra/geometry.hpp"

#include "../tests/support/reference.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int repeats) {
    auto begin = Clock::now();
    for (int i = 0; i < repeats; ++i) fn();
    auto end = Clock::now();
    return std::chrono::duration<double, std::milli>(end - begin).count() / repeats;
}

std::vector<sra::Vec3> make_floor_cloud(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 0.01);
    std::vector<sra::Vec3> points;
    for (std::size_t i = 0; i < n; ++i) {
        if (unit(rng) < 0.2)
            points.push_back({unit(rng) * 8.0, unit(rng) * 6.0, unit(rng) * 3.0});
        else
            points.push_back({unit(rng) * 8.0, unit(rng) * 6.0, gauss(rng)});
    }
    return points;
}

std::vector<sra::ObjectView> make_views(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<sra::ObjectView> views;
    for (std::size_t i = 0; i < n; ++i)
        views.push_back({static_cast<int>(i % 64),
                         {},
                         {unit(rng) * 8.0, unit(rng) * 6.0, unit(rng)},
                         "object"});
    return views;
}

}  // namespace

int main() {
    const int threads = omp_get_max_threads();
    std::printf("OpenMP threads: %d\n\n", threads);
    std::printf("%-34s %12s %12s %8s\n", "kernel", "serial (ms)", "parallel (ms)",
                "speedup");

    {
        auto points = make_floor_cloud(20000, 7);
        double serial = time_ms(
            [&] { sra::reference::serial_ransac_inliers(points, 1000, 0.02, 13); }, 3);
        double parallel =
            time_ms([&] { sra::fit_plane_ransac(points, 1000, 0.02, 13); }, 3);
        std::printf("%-34s %12.2f %12.2f %8.2fx\n", "plane RANSAC (20k pts, 1k iters)",
                    serial, parallel, serial / parallel);
    }

    {
        auto views = make_views(1500, 11);
        double serial = time_ms(
            [&] { sra::reference::naive_constrained_greedy_groups(views, 0.5); }, 3);
        double parallel = time_ms([&] { sra::constrained_greedy(views, 0.5); }, 3);
        std::printf("%-34s %12.2f %12.2f %8.2fx\n",
                    "constrained greedy (1.5k views)", serial, parallel,
                    serial / parallel);
    }

    return 0;
}
