#include "sra/benchgen.hpp"
#include "sra/scripted.hpp"

#include <doctest.h>

#include <json.hpp>

#include <memory>

using namespace sra;

TEST_CASE("question classification follows the ordered decision rules") {
    auto k = [](const std::string& q) { return classify_question(q); };
    CHECK(k("What will appear first, the chair or the tv?") ==
          QuestionKind::AppearanceOrder);
    CHECK(k("How many chairs are in this room?") == QuestionKind::Counting);
    CHECK(k("Measuring from the closest point of each object, which of these "
            "objects (chair, tv, sofa) is the farthest from the bed?") ==
          QuestionKind::RelativeDistance);
    CHECK(k("If I am standing by the sofa and facing the tv, is the chair to my "
            "front-left, front-right, back-left, or back-right?") ==
          QuestionKind::RelativeDirection);
    CHECK(k("If I am standing by the sofa with my back to the tv (facing "
            "directly away from it), is the chair to my front-left, "
            "front-right, back-left, or back-right?") ==
          QuestionKind::RelativeDirectionBackward);
    CHECK(k("Is there any obstruction between the chair and the tv? If so, what "
            "is it?") == QuestionKind::Obstruction);
    CHECK(k("Which is higher, the lamp or the shelf?") ==
          QuestionKind::HeightComparison);
    CHECK(k("What is the area of this room in square meters?") ==
          QuestionKind::NumericalEstimation);
    CHECK(k("What is the longest dimension of the tv?") ==
          QuestionKind::ObjectAttributes);
    CHECK(k("Describe this scene.") == QuestionKind::GeneralVqa);
}

TEST_CASE("planner_rules_json is a valid ordered rule table") {
    auto rules = nlohmann::json::parse(planner_rules_json());
    REQUIRE(rules.is_array());
    CHECK(rules.size() >= 8);
    for (const auto& rule : rules) {
        CHECK(rule.contains("kind"));
        CHECK(rule.contains("pattern"));
    }
}

TEST_CASE("option blocks parse into lettered choices") {
    std::string q =
        "Which object is closest?\nOptions:\nA. chair\nB. tv stand\nC. sofa\nD. "
        "bed";
    auto opts = parse_options(q);
    REQUIRE(opts.size() == 4);
    CHECK(opts[0].letter == 'A');
    CHECK(opts[1].text == "tv stand");
    CHECK(opts[3].letter == 'D');
    CHECK(parse_options("No options here").empty());
}

TEST_CASE("vocabulary matching is word-bounded, plural-aware, position-ordered") {
    std::vector<std::string> vocab = {"chair", "tv", "bed", "lamp"};
    auto hits = match_vocabulary("Are the beds nearer than the chair or the TV?",
                                 vocab);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].category == "bed");     // plural matched
    CHECK(hits[1].category == "chair");
    CHECK(hits[2].category == "tv");      // case-insensitive
    // "armchair" must not match "chair" (word boundary).
    CHECK(match_vocabulary("the armchair is red", vocab).empty());
    // First occurrence only.
    auto once = match_vocabulary("chair next to another chair", vocab);
    CHECK(once.size() == 1);
}

TEST_CASE("the oracle registry exposes the full tool suite") {
    GenConfig config;
    auto scene = generate_scene(config, 41);
    auto provider = std::make_shared<OracleProvider>(scene, SamplingPolicy{},
                                                     NoiseModel{});
    auto knowledge = std::make_shared<const KnowledgeStore>(
        KnowledgeStore::load(std::string(SRA_SOURCE_DIR) + "/data/knowledge.jsonl"));
    auto registry = build_oracle_registry(provider, knowledge, "video.mp4");

    for (const char* name :
         {"tool_2d_object_detection", "tool_cross_frame_tracking",
          "tool_object_3d_detection", "tool_scene_modeling",
          "tool_knowledge_retrieval", "tool_video_image_query",
          "tool_calculate_distance", "tool_calculate_direction",
          "tool_calculate_direction_backward", "tool_compare_height",
          "tool_calculate_obstruction"})
        CHECK(registry.has(name));

    auto schemas = registry.schemas_json();
    CHECK(schemas.size() == registry.tool_names().size());

    // 2D detection output keyed by category.
    auto first_cat = scene.objects.front().category;
    auto out = registry.invoke(
        "tool_2d_object_detection",
        OJson{{"objects", first_cat}, {"video_path", "video.mp4"}});
    CHECK(out.contains(first_cat));
    CHECK(!out.at(first_cat).empty());
}

TEST_CASE("scripted plans have the right shape per question kind") {
    RoleBackends backends = make_scripted_backends({"chair", "tv", "sofa", "bed"},
                                                   "video.mp4");
    GenConfig config;
    auto scene = generate_scene(config, 42);
    auto provider =
        std::make_shared<OracleProvider>(scene, SamplingPolicy{}, NoiseModel{});
    auto knowledge = std::make_shared<const KnowledgeStore>(
        KnowledgeStore::from_entries({{"chair", "object", {0.5, 0.5, 0.9},
                                       {0.1, 0.1, 0.1}, "a chair"}}));
    auto registry = build_oracle_registry(provider, knowledge, "video.mp4");

    auto plan_tools = [&](const std::string& q) {
        return backends.planner(q, registry).plan;
    };

    auto counting = plan_tools("How many chairs are in this room?");
    REQUIRE(counting.size() >= 2);
    CHECK(counting[0] == "tool_2d_object_detection");
    CHECK(std::find(counting.begin(), counting.end(), "tool_object_3d_detection") !=
          counting.end());

    auto direction = plan_tools(
        "If I am standing by the sofa and facing the tv, is the chair to my "
        "front-left, front-right, back-left, or back-right?\nOptions:\nA. "
        "front-left\nB. front-right\nC. back-left\nD. back-right");
    CHECK(std::find(direction.begin(), direction.end(),
                    "tool_calculate_direction") != direction.end());

    auto order = plan_tools("What will appear first: chair, tv, sofa, or bed?");
    CHECK(order[0] == "tool_2d_object_detection");
}

TEST_CASE("instance sets round-trip through the 3D tool output") {
    GenConfig config;
    auto scene = generate_scene(config, 43);
    auto provider =
        std::make_shared<OracleProvider>(scene, SamplingPolicy{}, NoiseModel{});
    auto knowledge = std::make_shared<const KnowledgeStore>(
        KnowledgeStore::from_entries({{"chair", "object", {0.5, 0.5, 0.9},
                                       {0.1, 0.1, 0.1}, "a chair"}}));
    auto registry = build_oracle_registry(provider, knowledge, "video.mp4");
    auto cat = scene.objects.front().category;

    auto det = registry.invoke(
        "tool_2d_object_detection",
        OJson{{"objects", cat}, {"video_path", "video.mp4"}});
    auto out3d = registry.invoke("tool_object_3d_detection",
                                 OJson{{"video_path", "video.mp4"},
                                       {"output_2d", det},
                                       {"using_tracking", false},
                                       {"aligned_scene", true}});
    auto set = instance_set_from_tool_output(out3d);
    CHECK(set.aligned);
    CHECK(!set.instances.empty());
    CHECK(set.instances.front().instance_id == cat + "_1");
    // Aligned frame: every center sits above the recovered floor.
    for (const auto& inst : set.instances) CHECK(inst.center.z > 0.0);
}

TEST_CASE("scripted end-to-end answers a counting question correctly") {
    GenConfig config;
    auto scene = generate_scene(config, 44);
    std::map<std::string, int> counts;
    for (const auto& obj : scene.objects) ++counts[obj.category];
    auto cat = scene.objects.front().category;

    std::vector<std::string> vocab;
    for (const auto& [c, n] : counts) vocab.push_back(c);
    auto provider =
        std::make_shared<OracleProvider>(scene, SamplingPolicy{}, NoiseModel{});
    auto knowledge = std::make_shared<const KnowledgeStore>(
        KnowledgeStore::from_entries({{"chair", "object", {0.5, 0.5, 0.9},
                                       {0.1, 0.1, 0.1}, "a chair"}}));
    auto registry = build_oracle_registry(provider, knowledge, "video.mp4");
    auto backends = make_scripted_backends(vocab, "video.mp4");

    auto run = run_agent("How many " + cat + "s are in this room?", registry,
                         backends, kDefaultBudget);
    CHECK(run.final_answer == std::to_string(counts.at(cat)));
    CHECK(run.chain.size() <= static_cast<std::size_t>(kDefaultBudget));
    for (const auto& entry : run.chain) CHECK(!entry.interpretation.empty());
}
