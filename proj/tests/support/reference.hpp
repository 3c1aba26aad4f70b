#pragma once

// Naive reference implementations used as independent oracles in the tests
// and as serial baselines in the benchmark target. They transcribe the
// definitions as directly as possible and make no attempt at efficiency.

#include "sra/clustering.hpp"
#include "sra/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

namespace sra::reference {

// ---------------------------------------------------------------------------
// Constrained greedy clustering, literal transcription: repeatedly find the
// globally closest pair of mergeable clusters and merge, until the closest
// remaining pair exceeds epsilon.
// ---------------------------------------------------------------------------

struct RefCluster {
    Vec3 sum{};
    std::size_t weight = 0;       // merged points, for the running mean
    std::set<int> frames;
    std::vector<std::size_t> view_indices;

    Vec3 center() const { return sum / static_cast<double>(weight); }
};

inline std::vector<std::vector<std::size_t>> naive_constrained_greedy_groups(
    const std::vector<ObjectView>& views, double epsilon,
    const TrackPartition* tracks = nullptr) {
    std::vector<RefCluster> clusters;
    std::vector<bool> covered(views.size(), false);
    if (tracks) {
        for (const auto& group : tracks->groups) {
            RefCluster c;
            for (std::size_t i : group) {
                covered[i] = true;
                c.sum = c.sum + views[i].center;
                ++c.weight;
                c.frames.insert(views[i].frame);
                c.view_indices.push_back(i);
            }
            // A pre-merged track group acts as one point at the mean center.
            c.sum = c.center();
            c.weight = 1;
            clusters.push_back(std::move(c));
        }
    }
    for (std::size_t i = 0; i < views.size(); ++i) {
        if (covered[i]) continue;
        RefCluster c;
        c.sum = views[i].center;
        c.weight = 1;
        c.frames = {views[i].frame};
        c.view_indices = {i};
        clusters.push_back(std::move(c));
    }

    // The optimized version sorts all *initial-point* pairs once and never
    // recomputes centroids, so the reference must merge on initial-point
    // distances too: track the closest initial-point pair between clusters.
    std::vector<Vec3> initial_centers;
    std::vector<std::size_t> owner;  // initial point -> cluster index
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        initial_centers.push_back(clusters[c].center());
        owner.push_back(c);
    }

    struct Pair {
        double dist;
        std::size_t i, j;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < initial_centers.size(); ++i)
        for (std::size_t j = i + 1; j < initial_centers.size(); ++j)
            pairs.push_back(
                {euclidean_distance(initial_centers[i], initial_centers[j]), i, j});

    while (true) {
        // Globally closest admissible pair, ties by (i, j).
        const Pair* best = nullptr;
        for (const auto& p : pairs) {
            if (owner[p.i] == owner[p.j]) continue;
            if (best && (p.dist > best->dist ||
                         (p.dist == best->dist &&
                          (p.i > best->i || (p.i == best->i && p.j > best->j)))))
                continue;
            best = &p;
        }
        if (!best || best->dist > epsilon) break;
        std::size_t a = owner[best->i], b = owner[best->j];
        bool overlap = false;
        for (int f : clusters[b].frames)
            if (clusters[a].frames.count(f)) {
                overlap = true;
                break;
            }
        if (overlap) {
            // This pair can never merge; drop it so the scan can proceed.
            pairs.erase(pairs.begin() + (best - pairs.data()));
            continue;
        }
        clusters[a].frames.insert(clusters[b].frames.begin(), clusters[b].frames.end());
        clusters[a].view_indices.insert(clusters[a].view_indices.end(),
                                        clusters[b].view_indices.begin(),
                                        clusters[b].view_indices.end());
        clusters[b].frames.clear();
        clusters[b].view_indices.clear();  // now owned by a
        for (auto& o : owner)
            if (o == b) o = a;
    }

    std::map<std::size_t, std::vector<std::size_t>> grouped;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        std::size_t root = owner[c];
        grouped[root].insert(grouped[root].end(), clusters[c].view_indices.begin(),
                             clusters[c].view_indices.end());
    }
    std::vector<std::vector<std::size_t>> out;
    for (auto& [root, idx] : grouped) {
        std::sort(idx.begin(), idx.end());
        out.push_back(std::move(idx));
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// View-index partition of an Instance list, in canonical sorted form.
inline std::vector<std::vector<std::size_t>> partition_of(
    const std::vector<Instance>& instances, const std::vector<ObjectView>& views) {
    // Match member views back to their indices by exact field comparison.
    std::vector<bool> used(views.size(), false);
    std::vector<std::vector<std::size_t>> out;
    for (const auto& inst : instances) {
        std::vector<std::size_t> idx;
        for (const auto& m : inst.members) {
            for (std::size_t i = 0; i < views.size(); ++i) {
                if (used[i]) continue;
                if (views[i].frame == m.frame && views[i].center == m.center &&
                    views[i].box == m.box && views[i].category == m.category) {
                    used[i] = true;
                    idx.push_back(i);
                    break;
                }
            }
        }
        std::sort(idx.begin(), idx.end());
        out.push_back(std::move(idx));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Naive DBSCAN on 3D centers (textbook definition).
// ---------------------------------------------------------------------------

inline std::vector<int> naive_dbscan_labels(const std::vector<Vec3>& points, double eps,
                                            int min_points) {
    const int kUnvisited = -2, kNoise = -1;
    std::vector<int> labels(points.size(), kUnvisited);
    auto neighbors = [&](std::size_t i) {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < points.size(); ++j)
            if (euclidean_distance(points[i], points[j]) <= eps) out.push_back(j);
        return out;
    };
    int cluster = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (labels[i] != kUnvisited) continue;
        auto nb = neighbors(i);
        if (static_cast<int>(nb.size()) < min_points) {
            labels[i] = kNoise;
            continue;
        }
        labels[i] = cluster;
        std::vector<std::size_t> frontier = nb;
        for (std::size_t k = 0; k < frontier.size(); ++k) {
            std::size_t j = frontier[k];
            if (labels[j] == kNoise) labels[j] = cluster;
            if (labels[j] != kUnvisited) continue;
            labels[j] = cluster;
            auto nb_j = neighbors(j);
            if (static_cast<int>(nb_j.size()) >= min_points)
                frontier.insert(frontier.end(), nb_j.begin(), nb_j.end());
        }
        ++cluster;
    }
    return labels;
}

// ---------------------------------------------------------------------------
// Serial RANSAC evaluation with the exact sampling scheme of the optimized
// kernel (pre-sampled triples, best by count then iteration order). Returns
// the winning inlier index set.
// ---------------------------------------------------------------------------

inline std::vector<std::size_t> serial_ransac_inliers(const std::vector<Vec3>& points,
                                                      int iterations, double threshold,
                                                      std::uint64_t seed) {
    const std::size_t n = points.size();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    long best_count = -1;
    std::optional<Plane> best;
    for (int it = 0; it < iterations; ++it) {
        std::array<std::size_t, 3> t;
        t[0] = pick(rng);
        do { t[1] = pick(rng); } while (t[1] == t[0]);
        do { t[2] = pick(rng); } while (t[2] == t[0] || t[2] == t[1]);
        Vec3 normal = (points[t[1]] - points[t[0]]).cross(points[t[2]] - points[t[0]]);
        double len = normal.norm();
        if (len < 1e-12) continue;
        Plane plane{normal / len, (normal / len).dot(points[t[0]])};
        long count = 0;
        for (const auto& p : points)
            if (std::abs(plane.signed_distance(p)) <= threshold) ++count;
        if (count > best_count) {
            best_count = count;
            best = plane;
        }
    }
    std::vector<std::size_t> inliers;
    if (!best) return inliers;
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(best->signed_distance(points[i])) <= threshold) inliers.push_back(i);
    return inliers;
}

// ---------------------------------------------------------------------------
// Dense-sampling oracles for geometry primitives.
// ---------------------------------------------------------------------------

/// Min distance from p to segment [s,d] by sampling the parameter densely.
inline double dense_segment_distance(const Vec3& p, const Vec3& s, const Vec3& d,
                                     int samples = 100000) {
    double best = 1e300;
    for (int k = 0; k <= samples; ++k) {
        double t = static_cast<double>(k) / samples;
        best = std::min(best, euclidean_distance(p, s + (d - s) * t));
    }
    return best;
}

/// Min distance between two boxes by sampling both surfaces (plus interior
/// overlap check).
inline double sampled_box_distance(const BBox3D& a, const BBox3D& b, int grid = 24) {
    if (a.intersects(b)) return 0.0;
    auto surface_points = [&](const BBox3D& box) {
        std::vector<Vec3> pts;
        for (int i = 0; i <= grid; ++i)
            for (int j = 0; j <= grid; ++j) {
                double u = static_cast<double>(i) / grid;
                double v = static_cast<double>(j) / grid;
                double x = box.min.x + u * (box.max.x - box.min.x);
                double y = box.min.y + v * (box.max.y - box.min.y);
                double z = box.min.z + v * (box.max.z - box.min.z);
                double yu = box.min.y + u * (box.max.y - box.min.y);
                pts.push_back({x, y, box.min.z});
                pts.push_back({x, y, box.max.z});
                pts.push_back({x, box.min.y, z});
                pts.push_back({x, box.max.y, z});
                pts.push_back({box.min.x, yu, z});
                pts.push_back({box.max.x, yu, z});
            }
        return pts;
    };
    double best = 1e300;
    for (const auto& pa : surface_points(a))
        for (const auto& pb : surface_points(b))
            best = std::min(best, euclidean_distance(pa, pb));
    return best;
}

}  // namespace sra::reference
