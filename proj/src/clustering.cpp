#include "sra/clustering.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace sra {

int Instance::first_frame() const {
    int f = std::numeric_limits<int>::max();
    for (const auto& v : members) f = std::min(f, v.frame);
    return f;
}

namespace {

struct MergedPoint {
    Vec3 center;
    std::set<int> frames;
    std::vector<std::size_t> view_indices;
};

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
};

Instance make_instance(const std::vector<ObjectView>& views,
                       const std::vector<std::size_t>& indices) {
    Instance inst;
    inst.category = views[indices.front()].category;
    Vec3 sum{};
    BBox3D hull{views[indices.front()].center, views[indices.front()].center};
    for (auto i : indices) {
        const Vec3& c = views[i].center;
        sum = sum + c;
        hull.min = {std::min(hull.min.x, c.x), std::min(hull.min.y, c.y),
                    std::min(hull.min.z, c.z)};
        hull.max = {std::max(hull.max.x, c.x), std::max(hull.max.y, c.y),
                    std::max(hull.max.z, c.z)};
        inst.members.push_back(views[i]);
    }
    inst.center = sum / static_cast<double>(indices.size());
    inst.box3d = hull;
    return inst;
}

void check_single_category(const std::vector<ObjectView>& views) {
    for (const auto& v : views)
        if (v.category != views.front().category)
            throw ClusteringError("mixed-category input: '" + v.category + "' vs '" +
                                  views.front().category + "'");
}

}  // namespace

std::vector<Instance> constrained_greedy(const std::vector<ObjectView>& views,
                                         double epsilon,
                                         const TrackPartition* tracks) {
    if (epsilon < 0.0) throw ClusteringError("epsilon must be non-negative");
    if (views.empty()) return {};
    check_single_category(views);

    // Build merged points: one per track group, singletons for the rest.
    std::vector<MergedPoint> points;
    if (tracks) {
        std::vector<bool> covered(views.size(), false);
        for (const auto& group : tracks->groups) {
            if (group.empty()) continue;
            MergedPoint p;
            Vec3 sum{};
            for (auto i : group) {
                if (i >= views.size()) throw ClusteringError("track index out of range");
                if (covered[i]) throw ClusteringError("track groups overlap");
                covered[i] = true;
                sum = sum + views[i].center;
                p.frames.insert(views[i].frame);
                p.view_indices.push_back(i);
            }
            p.center = sum / static_cast<double>(group.size());
            points.push_back(std::move(p));
        }
        for (std::size_t i = 0; i < views.size(); ++i)
            if (!covered[i])
                points.push_back({views[i].center, {views[i].frame}, {i}});
    } else {
        for (std::size_t i = 0; i < views.size(); ++i)
            points.push_back({views[i].center, {views[i].frame}, {i}});
    }

    // Enumerate all pairs and sort by distance exactly once.
    const std::size_t n = points.size();
    struct Pair {
        double dist;
        std::size_t i, j;
    };
    std::vector<Pair> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            pairs.push_back({0.0, i, j});
#pragma omp parallel for schedule(static)
    for (long k = 0; k < static_cast<long>(pairs.size()); ++k) {
        auto& p = pairs[static_cast<std::size_t>(k)];
        p.dist = euclidean_distance(points[p.i].center, points[p.j].center);
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });

    // Greedy merging under the frame-disjointness hard constraint.
    UnionFind uf(n);
    std::vector<std::set<int>> cluster_frames(n);
    for (std::size_t i = 0; i < n; ++i) cluster_frames[i] = points[i].frames;

    for (const auto& pr : pairs) {
        if (pr.dist > epsilon) break;
        std::size_t a = uf.find(pr.i), b = uf.find(pr.j);
        if (a == b) continue;
        const auto& fa = cluster_frames[a];
        const auto& fb = cluster_frames[b];
        bool overlap = std::any_of(fb.begin(), fb.end(),
                                   [&](int f) { return fa.count(f) > 0; });
        if (overlap) continue;  // no shared frames within one instance
        uf.parent[b] = a;
        cluster_frames[a].insert(fb.begin(), fb.end());
    }

    // Convert clusters to instances over the original views.
    std::map<std::size_t, std::vector<std::size_t>> cluster_views;
    for (std::size_t i = 0; i < n; ++i) {
        auto& vi = cluster_views[uf.find(i)];
        vi.insert(vi.end(), points[i].view_indices.begin(), points[i].view_indices.end());
    }
    std::vector<Instance> instances;
    for (auto& [root, indices] : cluster_views) {
        std::sort(indices.begin(), indices.end());
        instances.push_back(make_instance(views, indices));
    }
    return instances;
}

std::vector<Instance> dbscan(const std::vector<ObjectView>& views, double eps,
                             int min_points) {
    if (eps <= 0.0) throw ClusteringError("eps must be positive");
    if (min_points < 1) throw ClusteringError("min_points must be >= 1");
    if (views.empty()) return {};
    check_single_category(views);

    const std::size_t n = views.size();
    constexpr int kUndefined = -2, kNoise = -1;
    std::vector<int> labels(n, kUndefined);

    auto neighbors_of = [&](std::size_t i) {
        std::vector<std::size_t> nb;
        for (std::size_t j = 0; j < n; ++j)
            if (euclidean_distance(views[i].center, views[j].center) <= eps)
                nb.push_back(j);
        return nb;
    };

    int cluster = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != kUndefined) continue;
        auto seeds = neighbors_of(i);
        if (seeds.size() < static_cast<std::size_t>(min_points)) {
            labels[i] = kNoise;
            continue;
        }
        labels[i] = cluster;
        for (std::size_t k = 0; k < seeds.size(); ++k) {
            std::size_t j = seeds[k];
            if (labels[j] == kNoise) labels[j] = cluster;
            if (labels[j] != kUndefined) continue;
            labels[j] = cluster;
            auto more = neighbors_of(j);
            if (more.size() >= static_cast<std::size_t>(min_points))
                seeds.insert(seeds.end(), more.begin(), more.end());
        }
        ++cluster;
    }

    std::map<int, std::vector<std::size_t>> groups;
    int noise_label = cluster;  // singletons keep counting total
    for (std::size_t i = 0; i < n; ++i)
        groups[labels[i] == kNoise ? noise_label++ : labels[i]].push_back(i);

    std::vector<Instance> instances;
    for (const auto& [label, indices] : groups)
        instances.push_back(make_instance(views, indices));
    return instances;
}

std::vector<Instance> rank_instances(std::vector<Instance> instances) {
    std::stable_sort(instances.begin(), instances.end(),
                     [](const Instance& a, const Instance& b) {
                         if (a.category != b.category) return a.category < b.category;
                         if (a.member_count() != b.member_count())
                             return a.member_count() > b.member_count();
                         return a.first_frame() < b.first_frame();
                     });
    std::map<std::string, int> next_rank;
    for (auto& inst : instances)
        inst.instance_id = inst.category + "_" + std::to_string(++next_rank[inst.category]);
    return instances;
}

}  // namespace sra
