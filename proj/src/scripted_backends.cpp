#include "sra/scripted.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>

namespace sra {

namespace {

std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

}  // namespace

// Ordered rule table; first match wins, fallback is general VQA.
const char* planner_rules_json() {
    return R"([
  {"kind": "appearance_order", "pattern": "appearance order|first-time appearance|appear first"},
  {"kind": "object_attributes", "pattern": "(size|dimension|material)s? of the|how (big|tall|wide|long) is"},
  {"kind": "numerical_estimation", "pattern": "square met(er|re)|how many met(er|re)s|in met(er|re)s"},
  {"kind": "obstruction", "pattern": "obstruct"},
  {"kind": "relative_direction_backward", "pattern": "back to the"},
  {"kind": "relative_direction", "pattern": "front-left|front-right|back-left|back-right"},
  {"kind": "relative_distance", "pattern": "closest|nearest|farthest|furthest"},
  {"kind": "counting", "pattern": "how many"},
  {"kind": "height_comparison", "pattern": "higher|taller"},
  {"kind": "general_vqa", "pattern": ""}
])";
}

std::string to_string(QuestionKind kind) {
    switch (kind) {
        case QuestionKind::AppearanceOrder: return "appearance_order";
        case QuestionKind::ObjectAttributes: return "object_attributes";
        case QuestionKind::NumericalEstimation: return "numerical_estimation";
        case QuestionKind::GeneralVqa: return "general_vqa";
        case QuestionKind::RelativeDistance: return "relative_distance";
        case QuestionKind::RelativeDirection: return "relative_direction";
        case QuestionKind::RelativeDirectionBackward: return "relative_direction_backward";
        case QuestionKind::Obstruction: return "obstruction";
        case QuestionKind::Counting: return "counting";
        case QuestionKind::HeightComparison: return "height_comparison";
    }
    return "general_vqa";
}

QuestionKind classify_question(const std::string& question) {
    static const std::map<std::string, QuestionKind> kKinds = {
        {"appearance_order", QuestionKind::AppearanceOrder},
        {"object_attributes", QuestionKind::ObjectAttributes},
        {"numerical_estimation", QuestionKind::NumericalEstimation},
        {"obstruction", QuestionKind::Obstruction},
        {"relative_direction_backward", QuestionKind::RelativeDirectionBackward},
        {"relative_direction", QuestionKind::RelativeDirection},
        {"relative_distance", QuestionKind::RelativeDistance},
        {"counting", QuestionKind::Counting},
        {"height_comparison", QuestionKind::HeightComparison},
        {"general_vqa", QuestionKind::GeneralVqa},
    };
    const std::string q = lowercase(question);
    for (const auto& rule : OJson::parse(planner_rules_json())) {
        const std::string pattern = rule.at("pattern").get<std::string>();
        if (pattern.empty() || std::regex_search(q, std::regex(pattern)))
            return kKinds.at(rule.at("kind").get<std::string>());
    }
    return QuestionKind::GeneralVqa;
}

std::vector<McaOption> parse_options(const std::string& question) {
    std::vector<McaOption> options;
    std::istringstream lines(question);
    std::string line;
    static const std::regex opt(R"(^\s*([A-D])\.\s+(.*?)\s*$)");
    while (std::getline(lines, line)) {
        std::smatch m;
        if (std::regex_match(line, m, opt)) options.push_back({m[1].str()[0], m[2].str()});
    }
    return options;
}

std::vector<VocabHit> match_vocabulary(const std::string& question,
                                       const std::vector<std::string>& vocabulary) {
    const std::string q = lowercase(question);
    std::vector<VocabHit> hits;
    for (const auto& cat : vocabulary) {
        std::regex word("\\b" + cat + "s?\\b");
        std::smatch m;
        if (std::regex_search(q, m, word))
            hits.push_back({static_cast<std::size_t>(m.position(0)), cat});
    }
    std::sort(hits.begin(), hits.end(), [](const VocabHit& a, const VocabHit& b) {
        if (a.position != b.position) return a.position < b.position;
        return a.category < b.category;
    });
    return hits;
}

// ---------------------------------------------------------------------------
// Oracle tool suite
// ---------------------------------------------------------------------------

namespace {

OJson bbox_to_json(const BBox2D& b) {
    return OJson::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

BBox2D bbox_from_json(const OJson& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(),
            j.at(3).get<double>()};
}

OJson center_to_json(const Vec3& v) { return OJson::array({v.x, v.y, v.z}); }

OJson point_obj(const Vec3& v) {
    return OJson{{"x", v.x}, {"y", v.y}, {"z", v.z}};
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) parts.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c)) || !cur.empty()) {
            cur.push_back(c);
        }
    }
    while (!cur.empty() && std::isspace(static_cast<unsigned char>(cur.back())))
        cur.pop_back();
    if (!cur.empty()) parts.push_back(cur);
    return parts;
}

// Shared across one registry's tools: the oracle association for the most
// recent 2D detection output, so that lifting does not have to re-associate.
struct ToolsetState {
    std::map<std::string, std::vector<Detection>> last_detections;
};

// Rebuild oracle detections from an injected output_2d payload. Uses the
// cached associations when shapes line up, otherwise falls back to
// nearest-projected-center association.
std::map<std::string, std::vector<Detection>> detections_from_output_2d(
    const OJson& output_2d, const SceneSpec& scene, const ToolsetState& state) {
    std::map<std::string, std::vector<Detection>> result;
    for (auto it = output_2d.begin(); it != output_2d.end(); ++it) {
        const std::string& category = it.key();
        const auto& views = it.value().at("views");
        auto cached = state.last_detections.find(category);
        bool use_cache = cached != state.last_detections.end() &&
                         cached->second.size() == views.size();
        std::vector<Detection> dets;
        for (std::size_t i = 0; i < views.size(); ++i) {
            Detection det;
            det.frame = views.at(i).at("frame").get<int>();
            det.box = bbox_from_json(views.at(i).at("bbox"));
            if (use_cache && cached->second[i].frame == det.frame) {
                det.gt_object_id = cached->second[i].gt_object_id;
            } else {
                det.gt_object_id = -1;
                double best = 1e30;
                const CameraPose& cam =
                    scene.trajectory[static_cast<std::size_t>(det.frame)];
                Vec3 bc = det.box.center();
                for (const auto& obj : scene.objects) {
                    if (obj.category != category) continue;
                    auto px = project_point(obj.center, cam);
                    if (!px) continue;
                    double d = std::hypot(px->u - bc.x, px->v - bc.y);
                    if (d < best) {
                        best = d;
                        det.gt_object_id = obj.object_id;
                    }
                }
            }
            dets.push_back(det);
        }
        result[category] = std::move(dets);
    }
    return result;
}

// Per-category track partition from oracle tracklets, keyed to view indices.
TrackPartition build_tracks(const SceneSpec& scene, const std::string& category,
                            const std::vector<Detection>& dets,
                            const std::vector<std::size_t>& view_indices,
                            const SamplingPolicy& policy, const NoiseModel& noise,
                            std::uint64_t seed) {
    // Earliest detection per associated object seeds one tracking run.
    std::map<int, std::size_t> seed_det;  // object id -> index into dets
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (dets[i].gt_object_id < 0) continue;
        auto [it, inserted] = seed_det.emplace(dets[i].gt_object_id, i);
        if (!inserted && dets[i].frame < dets[it->second].frame) it->second = i;
    }
    TrackPartition tracks;
    for (const auto& [object_id, det_idx] : seed_det) {
        Tracklet t = track(scene, category, dets[det_idx], policy, noise, seed + object_id);
        std::set<int> covered;
        for (const auto& [frame, box] : t.boxes) covered.insert(frame);
        std::vector<std::size_t> group;
        std::set<int> group_frames;
        for (std::size_t i = 0; i < dets.size(); ++i) {
            if (dets[i].gt_object_id != object_id) continue;
            if (!covered.count(dets[i].frame)) continue;
            if (!group_frames.insert(dets[i].frame).second) continue;
            group.push_back(view_indices[i]);
        }
        if (group.size() > 1) tracks.groups.push_back(std::move(group));
    }
    return tracks;
}

struct SceneModelFit {
    Plane plane;
    RigidTransform transform;
    int frames_used = 0;
    double mean_inlier_ratio = 0.0;
};

SceneModelFit model_scene(const SceneSpec& scene, const SamplingPolicy& policy,
                          const NoiseModel& noise, const ToolsetConfig& config,
                          std::uint64_t seed) {
    auto per_frame = floor_points(scene, policy, noise, seed);
    std::vector<Plane> planes;
    std::vector<Vec3> all_points;
    double inlier_ratio_sum = 0.0;
    for (const auto& pts : per_frame) {
        all_points.insert(all_points.end(), pts.begin(), pts.end());
        if (pts.size() < 3) continue;
        try {
            auto fit = fit_plane_ransac(pts, config.ransac_iterations,
                                        config.ransac_threshold, seed ^ planes.size());
            inlier_ratio_sum += static_cast<double>(fit.inlier_indices.size()) /
                                static_cast<double>(pts.size());
            planes.push_back(fit.plane);
        } catch (const GeometryError&) {
            continue;  // degenerate frame
        }
    }
    if (planes.empty()) throw PerceptionError("scene modeling found no usable floor frames");

    SceneModelFit fit;
    fit.plane = average_planes(planes);
    fit.frames_used = static_cast<int>(planes.size());
    fit.mean_inlier_ratio = inlier_ratio_sum / fit.frames_used;

    // Majority direction from object centers plus the floor points.
    std::vector<Vec3> direction_points = all_points;
    for (const auto& obj : scene.objects) direction_points.push_back(obj.center);
    fit.transform = align_scene(fit.plane, direction_points);
    return fit;
}

BBox3D transform_box(const BBox3D& box, const RigidTransform& tf) {
    BBox3D out{{1e30, 1e30, 1e30}, {-1e30, -1e30, -1e30}};
    for (const Vec3& c : box.corners()) {
        Vec3 p = tf.apply(c);
        out.min = {std::min(out.min.x, p.x), std::min(out.min.y, p.y),
                   std::min(out.min.z, p.z)};
        out.max = {std::max(out.max.x, p.x), std::max(out.max.y, p.y),
                   std::max(out.max.z, p.z)};
    }
    return out;
}

}  // namespace

InstanceSet instance_set_from_tool_output(const OJson& tool_3d_output) {
    if (!tool_3d_output.is_object() || !tool_3d_output.contains("instances"))
        throw AgentError("tool_3d_output is not a 3D detection result");
    InstanceSet set;
    set.aligned = tool_3d_output.value("aligned_scene", false);
    for (const auto& rec : tool_3d_output.at("instances")) {
        Instance inst;
        inst.instance_id = rec.at("instance_id").get<std::string>();
        inst.category = rec.at("category").get<std::string>();
        const auto& c = rec.at("3d_center");
        inst.center = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
        const auto& b = rec.at("bbox_3d");
        inst.box3d = {{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>()},
                      {b.at(3).get<double>(), b.at(4).get<double>(), b.at(5).get<double>()}};
        set.instances.push_back(std::move(inst));
    }
    return set;
}

ToolRegistry build_oracle_registry(std::shared_ptr<OracleProvider> provider,
                                   std::shared_ptr<const KnowledgeStore> knowledge,
                                   std::string video_path, ToolsetConfig config) {
    ToolRegistry registry;
    auto state = std::make_shared<ToolsetState>();

    auto resolve_set = [](const OJson& args) {
        return instance_set_from_tool_output(args.at("tool_3d_output"));
    };

    registry.register_tool(
        {"tool_2d_object_detection",
         {{"video_path", "string", true, {}},
          {"objects", "string", true, {}}},
         "dict of category -> {views: [{frame, bbox}]}",
         "Per-frame category-level 2D detections across uniformly sampled key "
         "frames. Not instance-aware; do not use for counting. The objects "
         "argument must include the reference object together with the targets."},
        [provider, state](const OJson& args) {
            auto categories = split_csv(args.at("objects").get<std::string>());
            auto detections = detect_2d(provider->scene(), categories, provider->policy(),
                                        provider->noise(),
                                        provider->next_seed("tool_2d_object_detection"));
            state->last_detections = detections;
            OJson out = OJson::object();
            for (const auto& [category, dets] : detections) {
                OJson views = OJson::array();
                for (const auto& det : dets)
                    views.push_back(
                        {{"frame", det.frame}, {"bbox", bbox_to_json(det.box)}});
                out[category] = OJson{{"views", std::move(views)}};
            }
            return out;
        });

    registry.register_tool(
        {"tool_cross_frame_tracking",
         {{"video_path", "string", true, {}},
          {"category", "string", true, {}},
          {"seed_frame", "integer", true, {}},
          {"seed_bbox", "array", true, {}}},
         "{video_path, result: {object_frames, boxes, termination_reason}}",
         "Propagates a seed 2D box across frames, producing a tracklet that "
         "associates views of one object instance."},
        [provider](const OJson& args) {
            Detection seed{args.at("seed_frame").get<int>(),
                           bbox_from_json(args.at("seed_bbox")), -1};
            Tracklet t = track(provider->scene(), args.at("category").get<std::string>(),
                               seed, provider->policy(), provider->noise(),
                               provider->next_seed("tool_cross_frame_tracking"));
            OJson boxes = OJson::array();
            OJson frames = OJson::array();
            for (const auto& [frame, box] : t.boxes) {
                frames.push_back(frame);
                boxes.push_back(bbox_to_json(box));
            }
            return OJson{{"video_path", args.at("video_path")},
                         {"result",
                          {{"frames", frames},
                           {"boxes", boxes},
                           {"termination_reason", to_string(t.termination_reason)}}}};
        });

    registry.register_tool(
        {"tool_object_3d_detection",
         {{"video_path", "string", true, {}},
          {"output_2d", "object", true, {}},
          {"using_tracking", "boolean", false, false},
          {"aligned_scene", "boolean", false, false}},
         "{video_path, aligned_scene, using_tracking, instances: [{instance_id, "
         "category, 3d_center, bbox_3d, member_count}]}",
         "Clusters 2D views into physical instances via 3D centers; usable for "
         "counting. using_tracking=True is required for counting. "
         "aligned_scene=True enables height/direction reasoning in a "
         "real-world frame. Instances are sorted by visibility (member_count); "
         "index _1 is the most prominent instance of a category."},
        [provider, state, config](const OJson& args) {
            const SceneSpec& scene = provider->scene();
            auto detections =
                detections_from_output_2d(args.at("output_2d"), scene, *state);
            if (detections.empty())
                throw AgentError(
                    "output_2d is empty; run tool_2d_object_detection first");
            std::uint64_t seed = provider->next_seed("tool_object_3d_detection");

            std::vector<ObjectView> all_views;
            std::vector<Instance> instances;
            for (const auto& [category, dets] : detections) {
                std::map<std::string, std::vector<Detection>> one{{category, dets}};
                auto views = lift_3d(scene, one, provider->noise(), seed ^ std::hash<std::string>{}(category));
                if (views.empty()) continue;
                std::vector<std::size_t> view_indices(views.size());
                for (std::size_t i = 0; i < views.size(); ++i) view_indices[i] = i;
                std::vector<Instance> clustered;
                if (args.at("using_tracking").get<bool>()) {
                    TrackPartition tracks =
                        build_tracks(scene, category, dets, view_indices,
                                     provider->policy(), provider->noise(), seed);
                    clustered = constrained_greedy(views, config.cluster_epsilon, &tracks);
                } else {
                    clustered = constrained_greedy(views, config.cluster_epsilon);
                }
                instances.insert(instances.end(), clustered.begin(), clustered.end());
            }
            instances = rank_instances(std::move(instances));

            bool aligned = args.at("aligned_scene").get<bool>();
            if (aligned) {
                SceneModelFit fit = model_scene(scene, provider->policy(),
                                                provider->noise(), config, seed ^ 0xa11);
                for (auto& inst : instances) {
                    inst.center = fit.transform.apply(inst.center);
                    inst.box3d = transform_box(inst.box3d, fit.transform);
                }
            }

            OJson records = OJson::array();
            for (const auto& inst : instances) {
                records.push_back({{"instance_id", inst.instance_id},
                                   {"category", inst.category},
                                   {"3d_center", center_to_json(inst.center)},
                                   {"bbox_3d",
                                    OJson::array({inst.box3d.min.x, inst.box3d.min.y,
                                                  inst.box3d.min.z, inst.box3d.max.x,
                                                  inst.box3d.max.y, inst.box3d.max.z})},
                                   {"member_count", inst.member_count()}});
            }
            return OJson{{"video_path", args.at("video_path")},
                         {"aligned_scene", aligned},
                         {"using_tracking", args.at("using_tracking")},
                         {"instances", std::move(records)}};
        });

    registry.register_tool(
        {"tool_scene_modeling",
         {{"video_path", "string", true, {}}},
         "{video_path, result: {plane_normal, plane_offset, frames_used, "
         "mean_inlier_ratio}}",
         "Estimates the ground plane from lifted floor points via per-frame "
         "RANSAC fits averaged across frames; defines the real-world-aligned "
         "scene coordinate frame."},
        [provider, config](const OJson& args) {
            SceneModelFit fit =
                model_scene(provider->scene(), provider->policy(), provider->noise(),
                            config, provider->next_seed("tool_scene_modeling"));
            return OJson{{"video_path", args.at("video_path")},
                         {"result",
                          {{"plane_normal", center_to_json(fit.plane.normal)},
                           {"plane_offset", fit.plane.offset},
                           {"frames_used", fit.frames_used},
                           {"mean_inlier_ratio", fit.mean_inlier_ratio}}}};
        });

    registry.register_tool(
        {"tool_knowledge_retrieval",
         {{"query", "string", true, {}},
          {"top_k", "integer", false, kDefaultTopK}},
         "{query, top_k, entries: [str]}",
         "Retrieves object-/room-level size statistics and descriptions as "
         "spatial priors for estimation questions."},
        [knowledge](const OJson& args) {
            auto result = knowledge->retrieve(args.at("query").get<std::string>(),
                                              args.at("top_k").get<int>());
            return OJson{{"query", result.query},
                         {"top_k", result.top_k},
                         {"entries", result.entries}};
        });

    registry.register_tool(
        {"tool_video_image_query",
         {{"video_path", "string", true, {}},
          {"prompt", "string", true, {}},
          {"query_type", "string", false, "video"},
          {"frame_idx", "integer", false, -1}},
         "{video_path, query_type, frame_idx, prompt, response}",
         "Directly queries the video (or one key frame) and returns a "
         "natural-language response; supports the strict numeric estimation "
         "prompt templates."},
        [provider](const OJson& args) {
            std::string response = answer_query(
                provider->scene(), args.at("prompt").get<std::string>(),
                args.at("query_type").get<std::string>(), args.at("frame_idx").get<int>());
            return OJson{{"video_path", args.at("video_path")},
                         {"query_type", args.at("query_type")},
                         {"frame_idx", args.at("frame_idx")},
                         {"prompt", args.at("prompt")},
                         {"response", response}};
        });

    registry.register_tool(
        {"tool_calculate_distance",
         {{"tool_3d_output", "object", true, {}},
          {"video_path", "string", true, {}},
          {"reference_instance", "string", true, {}},
          {"target_instances", "string", true, {}}},
         "{video_path, result: {reference_instance, target_instances, distances, "
         "unit}}",
         "Euclidean distance between 3D centers of instances; distances are "
         "relative to the scene scale. reference_instance must be a specific "
         "instance ID such as tv_1, not a category name."},
        [resolve_set](const OJson& args) {
            InstanceSet set = resolve_set(args);
            auto result = calculate_distance(
                set, args.at("reference_instance").get<std::string>(),
                split_csv(args.at("target_instances").get<std::string>()));
            OJson distances = OJson::object();
            for (const auto& tid : result.targets) distances[tid] = result.distances.at(tid);
            return OJson{{"video_path", args.at("video_path")},
                         {"result",
                          {{"reference_instance", result.reference},
                           {"target_instances", result.targets},
                           {"distances", distances},
                           {"unit", result.unit}}}};
        });

    auto direction_tool = [resolve_set](const OJson& args, bool backward) {
        InstanceSet set = resolve_set(args);
        auto stand = args.at("stand_instance").get<std::string>();
        auto face = args.at("face_instance").get<std::string>();
        auto target = args.at("target_instance").get<std::string>();
        DirectionResult result =
            backward ? calculate_direction_backward(set, stand, face, target)
                     : calculate_direction(set, stand, face, target);
        return OJson{{"video_path", args.at("video_path")},
                     {"result",
                      {{"stand_instance", stand},
                       {"face_instance", face},
                       {"target_instance", target},
                       {"direction", to_string(result.quadrant)},
                       {"evidence",
                        {{"stand_center", point_obj(result.evidence.stand)},
                         {"face_center", point_obj(result.evidence.face)},
                         {"target_center", point_obj(result.evidence.target)},
                         {"forward_offset", result.evidence.df},
                         {"right_offset", result.evidence.dr}}}}}};
    };
    std::vector<ArgSpec> direction_args = {{"tool_3d_output", "object", true, {}},
                                           {"video_path", "string", true, {}},
                                           {"stand_instance", "string", true, {}},
                                           {"face_instance", "string", true, {}},
                                           {"target_instance", "string", true, {}}};
    registry.register_tool(
        {"tool_calculate_direction", direction_args,
         "{video_path, result: {stand_instance, face_instance, target_instance, "
         "direction, evidence}}",
         "Relative direction of a target under the egocentric frame defined by "
         "a standing instance and a faced instance; one of front-left, "
         "front-right, back-left, back-right."},
        [direction_tool](const OJson& args) { return direction_tool(args, false); });
    registry.register_tool(
        {"tool_calculate_direction_backward", direction_args,
         "{video_path, result: {stand_instance, face_instance, target_instance, "
         "direction, evidence}}",
         "Relative direction with the viewer's back to the faced instance "
         "(forward vector negated)."},
        [direction_tool](const OJson& args) { return direction_tool(args, true); });

    registry.register_tool(
        {"tool_compare_height",
         {{"tool_3d_output", "object", true, {}},
          {"video_path", "string", true, {}},
          {"instance_a", "string", true, {}},
          {"instance_b", "string", true, {}}},
         "{video_path, result: {instance_a, instance_b, z_a, z_b, relation}}",
         "Compares object heights by z-axis values; requires an aligned scene "
         "(3D output produced with aligned_scene=True)."},
        [resolve_set, config](const OJson& args) {
            InstanceSet set = resolve_set(args);
            auto a = args.at("instance_a").get<std::string>();
            auto b = args.at("instance_b").get<std::string>();
            HeightRelation rel = compare_height(set, a, b, config.height_epsilon);
            std::string name = rel.relation == HeightRelationKind::AHigher  ? "a_higher"
                               : rel.relation == HeightRelationKind::BHigher ? "b_higher"
                                                                             : "equal";
            return OJson{{"video_path", args.at("video_path")},
                         {"result",
                          {{"instance_a", a},
                           {"instance_b", b},
                           {"z_a", rel.z_a},
                           {"z_b", rel.z_b},
                           {"relation", name}}}};
        });

    registry.register_tool(
        {"tool_calculate_obstruction",
         {{"tool_3d_output", "object", true, {}},
          {"video_path", "string", true, {}},
          {"source_instance", "string", true, {}},
          {"destination_instance", "string", true, {}},
          {"obstruction_instance", "string", true, {}}},
         "{video_path, result: {source_instance, destination_instance, "
         "obstruction_instance, is_obstruction, evidence}}",
         "Checks whether the obstruction instance lies on the straight-line "
         "route from source to destination, using 3D centers."},
        [resolve_set, config](const OJson& args) {
            InstanceSet set = resolve_set(args);
            auto src = args.at("source_instance").get<std::string>();
            auto dst = args.at("destination_instance").get<std::string>();
            auto obs = args.at("obstruction_instance").get<std::string>();
            ObstructionResult result =
                calculate_obstruction(set, src, dst, obs, config.obstruction_threshold);
            const auto& ev = result.evidence;
            return OJson{{"video_path", args.at("video_path")},
                         {"result",
                          {{"source_instance", src},
                           {"destination_instance", dst},
                           {"obstruction_instance", obs},
                           {"is_obstruction", result.is_obstruction},
                           {"evidence",
                            {{"source_center", point_obj(ev.source_center)},
                             {"destination_center", point_obj(ev.destination_center)},
                             {"obstruction_center", point_obj(ev.obstruction_center)},
                             {"t", ev.t},
                             {"closest_point", point_obj(ev.closest_point)},
                             {"distance_to_segment", ev.distance_to_segment},
                             {"threshold", ev.threshold}}}}}};
        });

    return registry;
}

// ---------------------------------------------------------------------------
// Scripted role backends
// ---------------------------------------------------------------------------

namespace {

struct QuestionContext {
    QuestionKind kind;
    std::vector<VocabHit> hits;
    std::vector<McaOption> options;
    std::string anchor;  // category after "closest to the" / "farthest from the"
    std::string stand, face, target;
};

std::string first_vocab_after(const std::vector<VocabHit>& hits, std::size_t pos) {
    for (const auto& h : hits)
        if (h.position >= pos) return h.category;
    return {};
}

QuestionContext analyze_question(const std::string& question,
                                 const std::vector<std::string>& vocabulary) {
    QuestionContext ctx;
    ctx.kind = classify_question(question);
    ctx.hits = match_vocabulary(question, vocabulary);
    ctx.options = parse_options(question);

    const std::string q = lowercase(question);
    auto after_phrase = [&](const std::string& phrase) -> std::string {
        std::size_t pos = q.find(phrase);
        if (pos == std::string::npos) return {};
        return first_vocab_after(ctx.hits, pos + phrase.size());
    };

    for (const char* phrase :
         {"closest to the ", "nearest to the ", "farthest from the ", "furthest from the "}) {
        ctx.anchor = after_phrase(phrase);
        if (!ctx.anchor.empty()) break;
    }
    ctx.stand = after_phrase("standing by the ");
    ctx.face = after_phrase("facing the ");
    if (ctx.face.empty()) ctx.face = after_phrase("back to the ");
    ctx.target = after_phrase("is the ");
    return ctx;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// Categories the 2D detector should look for, in question order.
std::vector<std::string> question_objects(const QuestionContext& ctx) {
    std::vector<std::string> cats;
    for (const auto& h : ctx.hits)
        if (std::find(cats.begin(), cats.end(), h.category) == cats.end())
            cats.push_back(h.category);
    return cats;
}

Plan plan_for(const QuestionContext& ctx) {
    Plan plan;
    switch (ctx.kind) {
        case QuestionKind::AppearanceOrder:
            plan.plan = {"tool_2d_object_detection"};
            plan.information = {"2d_views", "appearance_sorting"};
            break;
        case QuestionKind::ObjectAttributes:
            plan.plan = {"tool_knowledge_retrieval"};
            plan.information = {"visual_description", "retrieved_knowledge"};
            break;
        case QuestionKind::NumericalEstimation:
            plan.plan = {"tool_video_image_query"};
            plan.information = {"visual_estimation_response"};
            break;
        case QuestionKind::GeneralVqa:
            plan.plan = {"tool_video_image_query"};
            plan.information = {"visual_description"};
            break;
        case QuestionKind::RelativeDistance:
            plan.plan = {"tool_2d_object_detection", "tool_object_3d_detection",
                         "tool_calculate_distance"};
            plan.information = {"closest_point_distance"};
            break;
        case QuestionKind::RelativeDirection:
            plan.plan = {"tool_2d_object_detection", "tool_object_3d_detection",
                         "tool_calculate_direction"};
            plan.information = {"relative_direction"};
            break;
        case QuestionKind::RelativeDirectionBackward:
            plan.plan = {"tool_2d_object_detection", "tool_object_3d_detection",
                         "tool_calculate_direction_backward"};
            plan.information = {"relative_direction"};
            break;
        case QuestionKind::Obstruction:
            plan.plan = {"tool_2d_object_detection", "tool_object_3d_detection",
                         "tool_calculate_obstruction"};
            plan.information = {"obstruction_check"};
            break;
        case QuestionKind::Counting:
            plan.plan = {"tool_2d_object_detection", "tool_object_3d_detection"};
            plan.information = {"2d_views", "3d_center", "3d_bbox"};
            break;
        case QuestionKind::HeightComparison:
            plan.plan = {"tool_2d_object_detection", "tool_object_3d_detection",
                         "tool_compare_height"};
            plan.information = {"height_comparison"};
            break;
    }
    for (const auto& name : plan.plan) plan.tool_chain.push_back(OJson{{"tool", name}});
    return plan;
}

constexpr const char* kRoomAreaPrompt =
    "You are an expert at estimating room size (area) from videos.\n"
    "Use the visual information in the video to answer the user's question.\n"
    "Return ONLY a single best numerical estimate (integer or decimal) in square meters.\n"
    "Output format (STRICT): <answer>NUMBER</answer>\n"
    "- Do NOT output units.\n"
    "- Do NOT output a range.\n"
    "- Do NOT output any explanation.\n\n"
    "QUESTION: ";

constexpr const char* kDistancePrompt =
    "You are an expert at estimating REAL-WORLD distance between two objects from videos.\n"
    "Use the visual information in the video to answer the user's question.\n"
    "Return ONLY a single best numerical estimate (integer or decimal) in meters.\n"
    "Output format (STRICT): <answer>NUMBER</answer>\n"
    "- Do NOT output units.\n"
    "- Do NOT output a range.\n"
    "- Do NOT output any explanation.\n\n"
    "QUESTION: ";

std::string instance_id_of(const std::string& category) { return category + "_1"; }

// MCA option categories fall back to all non-anchor question categories.
std::vector<std::string> candidate_categories(const QuestionContext& ctx) {
    std::vector<std::string> cats;
    if (!ctx.options.empty()) {
        for (const auto& opt : ctx.options) cats.push_back(opt.text);
    } else {
        for (const auto& cat : question_objects(ctx))
            if (cat != ctx.anchor) cats.push_back(cat);
    }
    return cats;
}

ReflectorDecision scripted_reflect(const QuestionContext& ctx, const std::string& question,
                                   const std::string& video_path, const Plan& plan,
                                   const std::vector<CallChainEntry>& chain) {
    ReflectorDecision decision;
    std::size_t step = chain.size();

    // The obstruction plan's final step expands into one call per candidate.
    std::size_t plan_steps = plan.plan.size();
    std::vector<std::string> obstruction_candidates;
    if (ctx.kind == QuestionKind::Obstruction) {
        obstruction_candidates = candidate_categories(ctx);
        plan_steps = plan.plan.size() - 1 + obstruction_candidates.size();
    }
    if (step >= plan_steps) {
        decision.action = ReflectorDecision::Action::Final;
        decision.analysis = "plan exhausted; finalizing";
        return decision;
    }

    std::size_t plan_index = std::min(step, plan.plan.size() - 1);
    const std::string& tool = plan.plan[plan_index];
    decision.action = ReflectorDecision::Action::CallTool;
    decision.call.tool = tool;
    decision.analysis = step == 0 ? "starting the plan"
                                  : "previous step returned output; continuing the plan";
    OJson& args = decision.call.args;
    args = OJson::object();

    if (tool == "tool_2d_object_detection") {
        args["video_path"] = video_path;
        args["objects"] = join(question_objects(ctx), ", ");
    } else if (tool == "tool_object_3d_detection") {
        args["video_path"] = video_path;
        args["output_2d"] = OJson::object();  // injected from history
        args["using_tracking"] = ctx.kind == QuestionKind::Counting;
        args["aligned_scene"] = ctx.kind == QuestionKind::RelativeDirection ||
                                ctx.kind == QuestionKind::RelativeDirectionBackward ||
                                ctx.kind == QuestionKind::HeightComparison;
    } else if (tool == "tool_calculate_distance") {
        args["tool_3d_output"] = OJson::object();
        args["video_path"] = video_path;
        args["reference_instance"] = instance_id_of(ctx.anchor);
        std::vector<std::string> targets;
        for (const auto& cat : candidate_categories(ctx))
            targets.push_back(instance_id_of(cat));
        args["target_instances"] = join(targets, ", ");
    } else if (tool == "tool_calculate_direction" ||
               tool == "tool_calculate_direction_backward") {
        args["tool_3d_output"] = OJson::object();
        args["video_path"] = video_path;
        args["stand_instance"] = instance_id_of(ctx.stand);
        args["face_instance"] = instance_id_of(ctx.face);
        args["target_instance"] = instance_id_of(ctx.target);
    } else if (tool == "tool_calculate_obstruction") {
        std::size_t candidate_index = step - (plan.plan.size() - 1);
        args["tool_3d_output"] = OJson::object();
        args["video_path"] = video_path;
        args["source_instance"] = instance_id_of(ctx.stand);
        args["destination_instance"] = instance_id_of(ctx.face);
        args["obstruction_instance"] =
            instance_id_of(obstruction_candidates[candidate_index]);
    } else if (tool == "tool_compare_height") {
        auto cats = question_objects(ctx);
        args["tool_3d_output"] = OJson::object();
        args["video_path"] = video_path;
        args["instance_a"] = instance_id_of(cats.size() > 0 ? cats[0] : "");
        args["instance_b"] = instance_id_of(cats.size() > 1 ? cats[1] : "");
    } else if (tool == "tool_knowledge_retrieval") {
        args["query"] = question;
        args["top_k"] = kDefaultTopK;
    } else if (tool == "tool_video_image_query") {
        bool room = lowercase(question).find("room") != std::string::npos;
        args["video_path"] = video_path;
        args["prompt"] = std::string(room ? kRoomAreaPrompt : kDistancePrompt) + question + "\n";
        args["query_type"] = "video";
        args["frame_idx"] = -1;
    }
    return decision;
}

std::string interpret_output(const ToolSchema& schema, const ToolCall& call,
                             const OJson& raw) {
    std::ostringstream out;
    if (raw.is_object() && raw.contains("error")) {
        out << "The call to " << call.tool << " failed with error: "
            << raw.at("error").get<std::string>() << ".";
        return out.str();
    }
    if (call.tool == "tool_2d_object_detection") {
        std::size_t total = 0;
        std::vector<std::string> parts;
        for (auto it = raw.begin(); it != raw.end(); ++it) {
            std::size_t n = it.value().at("views").size();
            total += n;
            int first = -1;
            if (n > 0) first = it.value().at("views").at(0).at("frame").get<int>();
            parts.push_back(it.key() + " with " + std::to_string(n) + " views" +
                            (n ? " (first at frame " + std::to_string(first) + ")" : ""));
        }
        if (total == 0)
            out << "The 2D detection tool returned zero detections for the requested "
                   "objects.";
        else
            out << "The 2D detection tool collected category-level views: "
                << join(parts, "; ") << ".";
        return out.str();
    }
    if (call.tool == "tool_object_3d_detection") {
        const auto& instances = raw.at("instances");
        out << "The 3D detection tool clustered the views into " << instances.size()
            << " physical instance(s):";
        for (const auto& rec : instances) {
            const auto& c = rec.at("3d_center");
            out << " " << rec.at("instance_id").get<std::string>() << " at 3d_center=["
                << c.at(0).get<double>() << ", " << c.at(1).get<double>() << ", "
                << c.at(2).get<double>() << "] with member_count="
                << rec.at("member_count").get<std::size_t>() << ";";
        }
        return out.str();
    }
    if (call.tool == "tool_calculate_distance") {
        out << "The distance tool reported distances from "
            << raw.at("result").at("reference_instance").get<std::string>() << ": ";
        const auto& distances = raw.at("result").at("distances");
        std::vector<std::string> parts;
        for (auto it = distances.begin(); it != distances.end(); ++it) {
            std::ostringstream v;
            v << it.key() << " = " << it.value().get<double>();
            parts.push_back(v.str());
        }
        out << join(parts, ", ") << " (unit: relative).";
        return out.str();
    }
    if (call.tool == "tool_calculate_direction" ||
        call.tool == "tool_calculate_direction_backward") {
        const auto& r = raw.at("result");
        out << "The direction tool placed " << r.at("target_instance").get<std::string>()
            << " at direction=" << r.at("direction").get<std::string>()
            << " relative to standing at " << r.at("stand_instance").get<std::string>();
        out << (call.tool == "tool_calculate_direction_backward" ? " with back to "
                                                                 : " facing ")
            << r.at("face_instance").get<std::string>() << ".";
        return out.str();
    }
    if (call.tool == "tool_calculate_obstruction") {
        const auto& r = raw.at("result");
        out << "The obstruction tool evaluated "
            << r.at("obstruction_instance").get<std::string>() << " on the route "
            << r.at("source_instance").get<std::string>() << " -> "
            << r.at("destination_instance").get<std::string>() << ": is_obstruction="
            << (r.at("is_obstruction").get<bool>() ? "true" : "false")
            << ", distance_to_segment="
            << r.at("evidence").at("distance_to_segment").get<double>() << " at t="
            << r.at("evidence").at("t").get<double>() << ".";
        return out.str();
    }
    if (call.tool == "tool_compare_height") {
        const auto& r = raw.at("result");
        out << "The height tool compared z values: z_a=" << r.at("z_a").get<double>()
            << ", z_b=" << r.at("z_b").get<double>() << ", relation="
            << r.at("relation").get<std::string>() << ".";
        return out.str();
    }
    if (call.tool == "tool_knowledge_retrieval") {
        out << "The knowledge tool retrieved " << raw.at("entries").size()
            << " entries";
        if (!raw.at("entries").empty())
            out << ", the top one being: " << raw.at("entries").at(0).get<std::string>();
        out << ".";
        return out.str();
    }
    if (call.tool == "tool_video_image_query") {
        out << "The video query tool responded: " << raw.at("response").get<std::string>()
            << ".";
        return out.str();
    }
    out << "Tool " << schema.name << " returned: " << raw.dump() << ".";
    return out.str();
}

std::string extract_answer_number(const std::string& response) {
    static const std::regex answer(R"(<answer>\s*([-+0-9.eE]+)\s*</answer>)");
    std::smatch m;
    if (std::regex_search(response, m, answer)) return m[1].str();
    return {};
}

const CallChainEntry* last_tool_entry(const std::vector<CallChainEntry>& chain,
                                      const std::string& tool) {
    for (auto it = chain.rbegin(); it != chain.rend(); ++it)
        if (it->call.tool == tool && !(it->raw_output.is_object() &&
                                       it->raw_output.contains("error")))
            return &*it;
    return nullptr;
}

std::string option_letter_for(const std::vector<McaOption>& options,
                              const std::string& text) {
    for (const auto& opt : options)
        if (opt.text == text) return std::string(1, opt.letter);
    return {};
}

std::string category_of_instance(const std::string& instance_id) {
    std::size_t pos = instance_id.rfind('_');
    return pos == std::string::npos ? instance_id : instance_id.substr(0, pos);
}

}  // namespace

RoleBackends make_scripted_backends(std::vector<std::string> vocabulary,
                                    std::string video_path) {
    auto vocab = std::make_shared<std::vector<std::string>>(std::move(vocabulary));
    auto path = std::make_shared<std::string>(std::move(video_path));

    RoleBackends backends;
    backends.planner = [vocab](const std::string& question, const ToolRegistry&) {
        return plan_for(analyze_question(question, *vocab));
    };
    backends.reflector = [vocab, path](const std::string& question, const Plan& plan,
                                       const std::vector<CallChainEntry>& chain,
                                       const ToolRegistry&) {
        return scripted_reflect(analyze_question(question, *vocab), question, *path, plan,
                                chain);
    };
    backends.executor_interpret = [](const ToolSchema& schema, const ToolCall& call,
                                     const OJson& raw) {
        return interpret_output(schema, call, raw);
    };
    backends.summarizer = [vocab](const std::string& question,
                                  const std::vector<CallChainEntry>& chain)
        -> std::pair<std::string, std::string> {
        QuestionContext ctx = analyze_question(question, *vocab);
        const std::string lower = lowercase(question);
        if (chain.empty())
            return {"No evidence was collected (empty call chain).", kSentinelAnswer};

        switch (ctx.kind) {
            case QuestionKind::Counting: {
                const auto* entry = last_tool_entry(chain, "tool_object_3d_detection");
                if (!entry) break;
                std::string target = ctx.hits.empty() ? "" : ctx.hits.front().category;
                std::size_t count = 0;
                for (const auto& rec : entry->raw_output.at("instances"))
                    if (rec.at("category").get<std::string>() == target) ++count;
                return {"Counted " + std::to_string(count) + " distinct '" + target +
                            "' instance(s) in the 3D detection output.",
                        std::to_string(count)};
            }
            case QuestionKind::RelativeDistance: {
                const auto* entry = last_tool_entry(chain, "tool_calculate_distance");
                if (!entry) break;
                const auto& distances = entry->raw_output.at("result").at("distances");
                if (distances.empty()) break;
                bool farthest = lower.find("farthest") != std::string::npos ||
                                lower.find("furthest") != std::string::npos;
                std::string best_id;
                double best = farthest ? -1e30 : 1e30;
                for (auto it = distances.begin(); it != distances.end(); ++it) {
                    double d = it.value().get<double>();
                    if (farthest ? d > best : d < best) {
                        best = d;
                        best_id = it.key();
                    }
                }
                std::string category = category_of_instance(best_id);
                std::string letter = option_letter_for(ctx.options, category);
                std::ostringstream summary;
                summary << "The " << (farthest ? "largest" : "smallest")
                        << " center distance in the distance map is " << best << " for "
                        << best_id << ".";
                return {summary.str(), letter.empty() ? category : letter};
            }
            case QuestionKind::RelativeDirection:
            case QuestionKind::RelativeDirectionBackward: {
                const auto* entry =
                    last_tool_entry(chain, ctx.kind == QuestionKind::RelativeDirection
                                               ? "tool_calculate_direction"
                                               : "tool_calculate_direction_backward");
                if (!entry) break;
                std::string quadrant =
                    entry->raw_output.at("result").at("direction").get<std::string>();
                std::string letter = option_letter_for(ctx.options, quadrant);
                return {"The direction tool reported direction=" + quadrant + ".",
                        letter.empty() ? quadrant : letter};
            }
            case QuestionKind::Obstruction: {
                std::string best_cat;
                double best_dist = 1e30;
                for (const auto& entry : chain) {
                    if (entry.call.tool != "tool_calculate_obstruction") continue;
                    if (entry.raw_output.is_object() && entry.raw_output.contains("error"))
                        continue;
                    const auto& r = entry.raw_output.at("result");
                    if (!r.at("is_obstruction").get<bool>()) continue;
                    double d = r.at("evidence").at("distance_to_segment").get<double>();
                    if (d < best_dist) {
                        best_dist = d;
                        best_cat = category_of_instance(
                            r.at("obstruction_instance").get<std::string>());
                    }
                }
                if (best_cat.empty()) break;
                std::string letter = option_letter_for(ctx.options, best_cat);
                std::ostringstream summary;
                summary << "Instance " << best_cat
                        << "_1 lies on the route with distance_to_segment=" << best_dist
                        << ".";
                return {summary.str(), letter.empty() ? best_cat : letter};
            }
            case QuestionKind::AppearanceOrder: {
                const auto* entry = last_tool_entry(chain, "tool_2d_object_detection");
                if (!entry) break;
                std::map<std::string, std::vector<ObjectView>> by_category;
                for (auto it = entry->raw_output.begin(); it != entry->raw_output.end();
                     ++it) {
                    for (const auto& v : it.value().at("views"))
                        by_category[it.key()].push_back(
                            {v.at("frame").get<int>(), {}, {}, it.key()});
                }
                if (by_category.empty()) break;
                std::string order = join(appearance_order(by_category), ", ");
                std::string letter = option_letter_for(ctx.options, order);
                return {"First-visibility order by minimum frame index: " + order + ".",
                        letter.empty() ? order : letter};
            }
            case QuestionKind::HeightComparison: {
                const auto* entry = last_tool_entry(chain, "tool_compare_height");
                if (!entry) break;
                const auto& r = entry->raw_output.at("result");
                std::string relation = r.at("relation").get<std::string>();
                std::string winner =
                    relation == "a_higher"   ? r.at("instance_a").get<std::string>()
                    : relation == "b_higher" ? r.at("instance_b").get<std::string>()
                                             : "equal";
                std::string letter =
                    option_letter_for(ctx.options, category_of_instance(winner));
                return {"Height comparison relation=" + relation + ".",
                        letter.empty() ? winner : letter};
            }
            case QuestionKind::NumericalEstimation:
            case QuestionKind::GeneralVqa: {
                const auto* entry = last_tool_entry(chain, "tool_video_image_query");
                if (!entry) break;
                std::string response =
                    entry->raw_output.at("response").get<std::string>();
                std::string number = extract_answer_number(response);
                if (number.empty()) break;
                return {"The video query returned the estimate " + number + ".", number};
            }
            case QuestionKind::ObjectAttributes: {
                const auto* entry = last_tool_entry(chain, "tool_knowledge_retrieval");
                if (!entry || entry->raw_output.at("entries").empty()) break;
                std::string top = entry->raw_output.at("entries").at(0).get<std::string>();
                KnowledgeEntry parsed = parse_entry(top);
                double largest = std::max(
                    {parsed.dims_mean[0], parsed.dims_mean[1], parsed.dims_mean[2]});
                std::ostringstream num;
                num << largest;
                return {"Top knowledge entry: " + top + ".", num.str()};
            }
        }
        return {"The collected evidence does not determine an answer.", kSentinelAnswer};
    };
    return backends;
}

}  // namespace sra
