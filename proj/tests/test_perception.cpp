#include "sra/benchgen.hpp"
#include "sra/perception.hpp"

#include <doctest.h>

#include <json.hpp>

#include <map>
#include <set>

using namespace sra;

namespace {

SceneSpec test_scene(std::uint64_t seed) {
    GenConfig config;
    return generate_scene(config, seed);
}

std::map<std::string, int> gt_counts(const SceneSpec& scene) {
    std::map<std::string, int> counts;
    for (const auto& obj : scene.objects) ++counts[obj.category];
    return counts;
}

}  // namespace

TEST_CASE("sample_frames is uniform and caps at the frame count") {
    CHECK(sample_frames(10, 20) == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    CHECK(sample_frames(10, 10).size() == 10);
    auto s = sample_frames(100, 4);
    CHECK(s.size() == 4);
    CHECK(s.front() == 0);
    CHECK(s.back() < 100);
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] > s[i - 1]);
    CHECK(sample_frames(64, 1) == std::vector<int>{0});
}

TEST_CASE("run_track follows the cap and absence policy") {
    SamplingPolicy policy;  // cap 50, absence limit 2

    auto offsets = [](const TrackRun& r) { return r.appended_offsets; };

    SUBCASE("all visible short sequence runs to end of video") {
        auto r = run_track(std::vector<bool>(10, true), policy);
        CHECK(offsets(r).size() == 10);
        CHECK(r.termination_reason == TrackTermination::EndOfVideo);
    }
    SUBCASE("all visible long sequence stops at the cap") {
        auto r = run_track(std::vector<bool>(200, true), policy);
        CHECK(offsets(r).size() == 50);
        CHECK(r.termination_reason == TrackTermination::CapReached);
    }
    SUBCASE("exactly at the cap") {
        auto r = run_track(std::vector<bool>(50, true), policy);
        CHECK(offsets(r).size() == 50);
        CHECK(r.termination_reason == TrackTermination::CapReached);
    }
    SUBCASE("one below the cap") {
        auto r = run_track(std::vector<bool>(49, true), policy);
        CHECK(offsets(r).size() == 49);
        CHECK(r.termination_reason == TrackTermination::EndOfVideo);
    }
    SUBCASE("single absent frame does not terminate") {
        auto r = run_track({true, false, true, true}, policy);
        CHECK(offsets(r) == std::vector<std::size_t>{0, 2, 3});
        CHECK(r.termination_reason == TrackTermination::EndOfVideo);
    }
    SUBCASE("two consecutive absences terminate") {
        auto r = run_track({true, false, false, true, true}, policy);
        CHECK(offsets(r) == std::vector<std::size_t>{0});
        CHECK(r.termination_reason == TrackTermination::AbsentTwice);
    }
    SUBCASE("alternating absences never terminate") {
        auto r = run_track({true, false, true, false, true, false, true}, policy);
        CHECK(offsets(r) == std::vector<std::size_t>{0, 2, 4, 6});
        CHECK(r.termination_reason == TrackTermination::EndOfVideo);
    }
    SUBCASE("absent pair later in the sequence") {
        auto r = run_track({true, true, false, true, false, false, true}, policy);
        CHECK(offsets(r) == std::vector<std::size_t>{0, 1, 3});
        CHECK(r.termination_reason == TrackTermination::AbsentTwice);
    }
    SUBCASE("trailing single absence keeps end-of-video") {
        auto r = run_track({true, true, false}, policy);
        CHECK(offsets(r) == std::vector<std::size_t>{0, 1});
        CHECK(r.termination_reason == TrackTermination::EndOfVideo);
    }
    SUBCASE("absences separate but never consecutive") {
        std::vector<bool> vis;
        for (int i = 0; i < 30; ++i) vis.push_back(i % 3 != 2);
        auto r = run_track(vis, policy);
        CHECK(r.termination_reason == TrackTermination::EndOfVideo);
        CHECK(offsets(r).size() == 20);
    }
    SUBCASE("cap reached before an absence pair") {
        std::vector<bool> vis(60, true);
        vis[55] = vis[56] = false;
        auto r = run_track(vis, policy);
        CHECK(offsets(r).size() == 50);
        CHECK(r.termination_reason == TrackTermination::CapReached);
    }
    SUBCASE("custom absence limit") {
        SamplingPolicy p3 = policy;
        p3.absence_limit = 3;
        auto r = run_track({true, false, false, true, false, false, false, true}, p3);
        CHECK(offsets(r) == std::vector<std::size_t>{0, 3});
        CHECK(r.termination_reason == TrackTermination::AbsentTwice);
    }
}

TEST_CASE("detect_2d emits in-bounds boxes and associates to ground truth") {
    auto scene = test_scene(31);
    std::vector<std::string> cats;
    for (const auto& [c, n] : gt_counts(scene)) cats.push_back(c);
    SamplingPolicy policy;
    auto dets = detect_2d(scene, cats, policy, {}, 7);
    CHECK(!dets.empty());
    for (const auto& [cat, list] : dets) {
        CHECK(!list.empty());
        for (const auto& d : list) {
            CHECK(d.box.valid());
            CHECK(d.box.x_min >= 0.0);
            CHECK(d.box.y_min >= 0.0);
            CHECK(d.box.x_max <= 640.0);
            CHECK(d.box.y_max <= 480.0);
            CHECK(d.gt_object_id >= 0);  // noiseless: no false positives
        }
    }
}

TEST_CASE("detect_2d and lift_3d are deterministic per seed") {
    auto scene = test_scene(32);
    std::vector<std::string> cats;
    for (const auto& [c, n] : gt_counts(scene)) cats.push_back(c);
    SamplingPolicy policy;
    NoiseModel noise;
    noise.center_sigma = 0.1;
    noise.box_jitter_sigma = 2.0;
    noise.miss_rate = 0.1;
    noise.false_positive_rate = 0.05;

    auto d1 = detect_2d(scene, cats, policy, noise, 99);
    auto d2 = detect_2d(scene, cats, policy, noise, 99);
    REQUIRE(d1.size() == d2.size());
    for (const auto& [cat, list] : d1) {
        const auto& other = d2.at(cat);
        REQUIRE(list.size() == other.size());
        for (std::size_t i = 0; i < list.size(); ++i) {
            CHECK(list[i].frame == other[i].frame);
            CHECK(list[i].box == other[i].box);
            CHECK(list[i].gt_object_id == other[i].gt_object_id);
        }
    }

    auto l1 = lift_3d(scene, d1, noise, 5);
    auto l2 = lift_3d(scene, d1, noise, 5);
    REQUIRE(l1.size() == l2.size());
    for (std::size_t i = 0; i < l1.size(); ++i) {
        CHECK(l1[i].center == l2[i].center);
        CHECK(l1[i].frame == l2[i].frame);
    }
    // A different seed moves the noisy centers.
    auto l3 = lift_3d(scene, d1, noise, 6);
    bool any_different = false;
    for (std::size_t i = 0; i < l1.size(); ++i)
        if (!(l1[i].center == l3[i].center)) any_different = true;
    CHECK(any_different);
}

TEST_CASE("noiseless lift recovers ground-truth centers exactly") {
    auto scene = test_scene(33);
    std::vector<std::string> cats;
    for (const auto& [c, n] : gt_counts(scene)) cats.push_back(c);
    auto dets = detect_2d(scene, cats, {}, {}, 1);
    auto views = lift_3d(scene, dets, {}, 1);
    std::set<std::string> seen;
    for (const auto& v : views) {
        bool matched = false;
        for (const auto& obj : scene.objects)
            if (obj.category == v.category &&
                euclidean_distance(obj.center, v.center) < 1e-9)
                matched = true;
        CHECK(matched);
        seen.insert(v.category);
    }
    CHECK(seen.size() == cats.size());
}

TEST_CASE("noiseless pipeline recovers exact instance counts per category") {
    for (std::uint64_t seed : {34, 35, 36}) {
        auto scene = test_scene(seed);
        auto counts = gt_counts(scene);
        std::vector<std::string> cats;
        for (const auto& [c, n] : counts) cats.push_back(c);
        auto dets = detect_2d(scene, cats, {}, {}, seed);
        for (const auto& [cat, list] : dets) {
            std::map<std::string, std::vector<Detection>> one{{cat, list}};
            auto views = lift_3d(scene, one, {}, seed);
            auto instances = constrained_greedy(views, kDefaultClusterEpsilon);
            CHECK(instances.size() == static_cast<std::size_t>(counts.at(cat)));
        }
    }
}

TEST_CASE("tracklets have strictly increasing frames within policy limits") {
    auto scene = test_scene(37);
    SamplingPolicy policy;
    std::vector<std::string> cats{scene.objects.front().category};
    auto dets = detect_2d(scene, cats, policy, {}, 3);
    const auto& first = dets.at(cats[0]).front();
    auto tracklet = track(scene, cats[0], first, policy, {}, 11);
    CHECK(!tracklet.boxes.empty());
    CHECK(tracklet.boxes.size() <= static_cast<std::size_t>(policy.tracking_cap));
    for (std::size_t i = 1; i < tracklet.boxes.size(); ++i)
        CHECK(tracklet.boxes[i].first > tracklet.boxes[i - 1].first);
    CHECK(tracklet.object_id == first.gt_object_id);
}

TEST_CASE("floor_points lie on the ground plane per sampled frame") {
    auto scene = test_scene(38);
    auto frames = floor_points(scene, {}, {}, 17);
    CHECK(!frames.empty());
    std::size_t total = 0;
    for (const auto& pts : frames) {
        total += pts.size();
        for (const auto& p : pts) CHECK(std::abs(p.z) < 1e-9);
    }
    CHECK(total > 100);
}

TEST_CASE("answer_query handles the two strict templates and refuses others") {
    SceneSpec scene;
    scene.scene_id = "s";
    scene.room_min = {0, 0, 0};
    scene.room_max = {4, 5, 3};
    scene.ground_plane = {{0, 0, 1}, 0.0};
    scene.trajectory.resize(1);
    SceneObject a{0, "chair", {{0, 0, 0}, {1, 1, 1}}, {0.5, 0.5, 0.5}};
    SceneObject b{1, "tv", {{3, 0, 0}, {4, 1, 1}}, {3.5, 0.5, 0.5}};
    scene.objects = {a, b};

    CHECK(answer_query(scene, "You are estimating room size in square meters.",
                       "video", -1) == "<answer>20</answer>");
    std::string dist_prompt =
        "You are estimating REAL-WORLD distance. QUESTION: how far is the chair "
        "from the tv?";
    CHECK(answer_query(scene, dist_prompt, "video", -1) == "<answer>3</answer>");
    CHECK(answer_query(scene, "What color is the sofa?", "video", -1) ==
          kQueryRefusal);
    CHECK_THROWS_AS(answer_query(scene, "anything", "image", -1), PerceptionError);
    CHECK_THROWS_AS(answer_query(scene, "anything", "audio", 0), PerceptionError);
}

TEST_CASE("scene JSON round-trips and validates") {
    auto scene = test_scene(39);
    auto j = scene.to_json();
    auto back = SceneSpec::from_json(j);
    back.validate();
    CHECK(back.scene_id == scene.scene_id);
    CHECK(back.objects.size() == scene.objects.size());
    CHECK(back.trajectory.size() == scene.trajectory.size());
    CHECK(back.rng_seed == scene.rng_seed);
    CHECK(back.to_json() == j);

    auto broken = j;
    broken["objects"][0]["center"] = {100.0, 100.0, 100.0};  // outside its box
    CHECK_THROWS_AS(SceneSpec::from_json(broken).validate(), PerceptionError);
}

TEST_CASE("noise model validation rejects out-of-range parameters") {
    NoiseModel bad;
    bad.miss_rate = 1.5;
    CHECK_THROWS_AS(bad.validate(), PerceptionError);
    NoiseModel neg;
    neg.center_sigma = -0.1;
    CHECK_THROWS_AS(neg.validate(), PerceptionError);
    NoiseModel ok;
    ok.center_sigma = 0.2;
    ok.miss_rate = 0.3;
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("derive_seed separates tools and ordinals") {
    auto s1 = derive_seed(42, "tool_a", 0);
    CHECK(s1 == derive_seed(42, "tool_a", 0));
    CHECK(s1 != derive_seed(42, "tool_a", 1));
    CHECK(s1 != derive_seed(42, "tool_b", 0));
    CHECK(s1 != derive_seed(43, "tool_a", 0));
}
