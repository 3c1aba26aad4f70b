#include "sra/clustering.hpp"
#include "support/reference.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace sra;

namespace {

std::vector<ObjectView> random_views(std::mt19937_64& rng, std::size_t max_views) {
    std::uniform_int_distribution<std::size_t> n_dist(1, max_views);
    std::uniform_int_distribution<int> frame(0, 9);
    std::uniform_real_distribution<double> coord(0.0, 3.0);
    std::size_t n = n_dist(rng);
    std::vector<ObjectView> views;
    for (std::size_t i = 0; i < n; ++i) {
        ObjectView v;
        v.frame = frame(rng);
        v.center = {coord(rng), coord(rng), coord(rng)};
        v.category = "chair";
        views.push_back(v);
    }
    return views;
}

void check_valid_partition(const std::vector<Instance>& instances,
                           const std::vector<ObjectView>& views) {
    std::size_t total = 0;
    for (const auto& inst : instances) {
        total += inst.members.size();
        // No two members of one instance may share a frame.
        std::set<int> frames;
        for (const auto& m : inst.members) frames.insert(m.frame);
        CHECK(frames.size() == inst.members.size());
        // Center is the mean of member centers (up to pre-merged tracks).
    }
    CHECK(total == views.size());
}

}  // namespace

TEST_CASE("constrained greedy matches the naive reference on random inputs") {
    std::mt19937_64 meta(11);
    for (int trial = 0; trial < 500; ++trial) {
        std::mt19937_64 rng(meta());
        auto views = random_views(rng, 30);
        double epsilon = std::uniform_real_distribution<double>(0.1, 1.5)(rng);

        auto got = constrained_greedy(views, epsilon);
        check_valid_partition(got, views);
        CHECK(reference::partition_of(got, views) ==
              reference::naive_constrained_greedy_groups(views, epsilon));
    }
}

TEST_CASE("constrained greedy matches the reference with track pre-merge") {
    std::mt19937_64 meta(12);
    for (int trial = 0; trial < 200; ++trial) {
        std::mt19937_64 rng(meta());
        auto views = random_views(rng, 24);
        // Random disjoint track groups over a prefix of the views, frames
        // deduplicated so the pre-merged clusters stay frame-disjoint.
        TrackPartition tracks;
        std::vector<std::size_t> pool(views.size());
        for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
        std::shuffle(pool.begin(), pool.end(), rng);
        std::size_t cursor = 0;
        while (cursor < pool.size() && tracks.groups.size() < 3) {
            std::size_t take = std::min<std::size_t>(
                1 + rng() % 4, pool.size() - cursor);
            std::vector<std::size_t> group;
            std::set<int> frames;
            for (std::size_t k = 0; k < take; ++k) {
                std::size_t idx = pool[cursor + k];
                if (frames.insert(views[idx].frame).second) group.push_back(idx);
            }
            cursor += take;
            if (!group.empty()) tracks.groups.push_back(std::move(group));
        }
        double epsilon = std::uniform_real_distribution<double>(0.1, 1.5)(rng);

        auto got = constrained_greedy(views, epsilon, &tracks);
        check_valid_partition(got, views);
        CHECK(reference::partition_of(got, views) ==
              reference::naive_constrained_greedy_groups(views, epsilon, &tracks));
    }
}

TEST_CASE("two well-separated tight groups yield two instances") {
    std::vector<ObjectView> views;
    for (int i = 0; i < 5; ++i)
        views.push_back({i, {}, {0.01 * i, 0.0, 0.0}, "chair"});
    for (int i = 0; i < 5; ++i)
        views.push_back({i, {}, {10.0 + 0.01 * i, 0.0, 0.0}, "chair"});
    auto instances = constrained_greedy(views, 0.5);
    CHECK(instances.size() == 2);
}

TEST_CASE("identical points in distinct frames collapse to one instance") {
    std::vector<ObjectView> views;
    for (int i = 0; i < 6; ++i) views.push_back({i, {}, {1.0, 2.0, 0.5}, "tv"});
    CHECK(constrained_greedy(views, 0.5).size() == 1);
}

TEST_CASE("same-frame views never merge") {
    std::vector<ObjectView> views{{3, {}, {0.0, 0.0, 0.0}, "chair"},
                                  {3, {}, {0.01, 0.0, 0.0}, "chair"}};
    CHECK(constrained_greedy(views, 0.5).size() == 2);
}

TEST_CASE("track groups with epsilon 0 pass through as instances") {
    std::vector<ObjectView> views;
    for (int i = 0; i < 8; ++i)
        views.push_back({i, {}, {static_cast<double>(i), 0.0, 0.0}, "chair"});
    TrackPartition tracks{{{0, 1, 2}, {3, 4}, {5, 6, 7}}};
    auto instances = constrained_greedy(views, 0.0, &tracks);
    CHECK(instances.size() == 3);
    // Pre-merged groups collapse to one point at the mean of their members.
    std::vector<double> xs;
    for (const auto& inst : instances) xs.push_back(inst.center.x);
    std::sort(xs.begin(), xs.end());
    CHECK(xs[0] == doctest::Approx(1.0));
    CHECK(xs[1] == doctest::Approx(3.5));
    CHECK(xs[2] == doctest::Approx(6.0));
}

TEST_CASE("shrinking epsilon never decreases the instance count") {
    std::mt19937_64 meta(13);
    for (int trial = 0; trial < 100; ++trial) {
        std::mt19937_64 rng(meta());
        auto views = random_views(rng, 20);
        std::size_t prev = 0;
        for (double eps : {1.5, 1.0, 0.5, 0.25, 0.0}) {
            std::size_t n = constrained_greedy(views, eps).size();
            CHECK(n >= prev);
            prev = n;
        }
    }
}

TEST_CASE("constrained greedy is deterministic") {
    std::mt19937_64 rng(14);
    auto views = random_views(rng, 30);
    auto a = constrained_greedy(views, 0.7);
    auto b = constrained_greedy(views, 0.7);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].center == b[i].center);
        CHECK(a[i].member_count() == b[i].member_count());
    }
}

TEST_CASE("dbscan is label-equivalent to the naive reference") {
    std::mt19937_64 meta(15);
    for (int trial = 0; trial < 200; ++trial) {
        std::mt19937_64 rng(meta());
        auto views = random_views(rng, 30);
        std::vector<Vec3> centers;
        for (const auto& v : views) centers.push_back(v.center);
        double eps = std::uniform_real_distribution<double>(0.2, 1.0)(rng);
        int min_pts = 1 + static_cast<int>(rng() % 4);

        auto ref_labels = reference::naive_dbscan_labels(centers, eps, min_pts);
        // Reference noise points become singleton groups, matching dbscan().
        std::map<int, std::vector<std::size_t>> by_label;
        std::vector<std::vector<std::size_t>> expected;
        for (std::size_t i = 0; i < ref_labels.size(); ++i) {
            if (ref_labels[i] == -1)
                expected.push_back({i});
            else
                by_label[ref_labels[i]].push_back(i);
        }
        for (auto& [l, idx] : by_label) expected.push_back(idx);
        for (auto& g : expected) std::sort(g.begin(), g.end());
        std::sort(expected.begin(), expected.end());

        auto got = dbscan(views, eps, min_pts);
        CHECK(reference::partition_of(got, views) == expected);
    }
}

TEST_CASE("rank_instances orders by member count then first frame") {
    auto inst = [](const std::string& cat, std::vector<int> frames) {
        Instance i;
        i.category = cat;
        for (int f : frames) i.members.push_back({f, {}, {}, cat});
        return i;
    };
    SUBCASE("counts 3 vs 1") {
        auto ranked = rank_instances({inst("chair", {0}), inst("chair", {1, 2, 3})});
        REQUIRE(ranked.size() == 2);
        CHECK(ranked[0].instance_id == "chair_1");
        CHECK(ranked[0].member_count() == 3);
        CHECK(ranked[1].instance_id == "chair_2");
    }
    SUBCASE("count tie broken by earliest first frame") {
        auto ranked = rank_instances({inst("tv", {5, 6}), inst("tv", {3, 8})});
        REQUIRE(ranked.size() == 2);
        CHECK(ranked[0].instance_id == "tv_1");
        CHECK(ranked[0].first_frame() == 3);
    }
    SUBCASE("categories ranked independently") {
        auto ranked = rank_instances(
            {inst("tv", {0}), inst("chair", {1, 2}), inst("chair", {4})});
        std::set<std::string> ids;
        for (const auto& i : ranked) ids.insert(i.instance_id);
        CHECK(ids == std::set<std::string>{"tv_1", "chair_1", "chair_2"});
    }
}
