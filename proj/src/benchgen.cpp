#include "sra/benchgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>

namespace sra {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::vector<std::string>& default_vocabulary() {
    static const std::vector<std::string> kVocab = {
        "chair", "table", "sofa",  "bed",   "lamp", "plant",
        "tv",    "cabinet", "shelf", "stool", "desk", "fridge"};
    return kVocab;
}

CameraPose look_at(const Vec3& position, const Vec3& target) {
    CameraPose cam;
    cam.position = position;
    Vec3 forward = (target - position).normalized();
    Vec3 right = forward.cross(Vec3{0.0, 0.0, 1.0}).normalized();
    Vec3 down = forward.cross(right);  // = z_c x x_c in camera convention
    cam.rotation = {right.x, right.y, right.z, down.x, down.y,
                    down.z,  forward.x, forward.y, forward.z};
    cam.focal_x = 500.0;
    cam.focal_y = 500.0;
    cam.principal_x = 320.0;
    cam.principal_y = 240.0;
    cam.width = 640;
    cam.height = 480;
    return cam;
}

}  // namespace

std::uint64_t hash_id(const std::string& id) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : id) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

SceneSpec generate_scene(const GenConfig& config, std::uint64_t seed) {
    const auto& vocab = config.vocabulary.empty() ? default_vocabulary() : config.vocabulary;
    const Vec3 center = (config.room_min + config.room_max) / 2.0;
    const double wall_inset = 0.6;
    const double center_clearance = 1.4;  // keeps objects outside the camera orbit

    for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
        std::mt19937_64 rng(hash_id(std::to_string(seed) + "#" + std::to_string(attempt)));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<int> count_dist(config.min_objects, config.max_objects);

        SceneSpec scene;
        scene.scene_id = "scene_" + std::to_string(seed);
        scene.rng_seed = seed;
        scene.fps = config.fps;
        scene.room_min = config.room_min;
        scene.room_max = config.room_max;
        scene.ground_plane = {{0.0, 0.0, 1.0}, 0.0};

        int wanted = count_dist(rng);
        bool packed = true;
        for (int i = 0; i < wanted; ++i) {
            bool placed = false;
            for (int attempt_obj = 0; attempt_obj < 500 && !placed; ++attempt_obj) {
                double lx = 0.3 + unit(rng) * 0.6;
                double ly = 0.3 + unit(rng) * 0.6;
                double h = 0.3 + unit(rng) * 1.2;
                double x_lo = config.room_min.x + wall_inset + lx / 2.0;
                double x_hi = config.room_max.x - wall_inset - lx / 2.0;
                double y_lo = config.room_min.y + wall_inset + ly / 2.0;
                double y_hi = config.room_max.y - wall_inset - ly / 2.0;
                if (x_lo >= x_hi || y_lo >= y_hi) break;
                double cx = x_lo + unit(rng) * (x_hi - x_lo);
                double cy = y_lo + unit(rng) * (y_hi - y_lo);
                if (std::hypot(cx - center.x, cy - center.y) < center_clearance) continue;

                SceneObject obj;
                obj.object_id = i;
                obj.category = vocab[static_cast<std::size_t>(
                    unit(rng) * static_cast<double>(vocab.size()))];
                obj.box3d = {{cx - lx / 2.0, cy - ly / 2.0, 0.0},
                             {cx + lx / 2.0, cy + ly / 2.0, h}};
                obj.center = obj.box3d.center();

                bool separated = true;
                for (const auto& other : scene.objects)
                    if (box_closest_distance(obj.box3d, other.box3d) <
                        config.min_separation) {
                        separated = false;
                        break;
                    }
                if (!separated) continue;
                scene.objects.push_back(std::move(obj));
                placed = true;
            }
            if (!placed) {
                packed = false;
                break;
            }
        }
        if (!packed) continue;

        // Panoramic orbit: small circle around the room center, looking
        // outward and downward; one full revolution over the trajectory.
        const double orbit_radius = 0.7;
        const double camera_height = 1.0;
        for (int f = 0; f < config.frame_count; ++f) {
            double theta = 2.0 * M_PI * f / config.frame_count;
            Vec3 outward{std::cos(theta), std::sin(theta), 0.0};
            Vec3 pos = Vec3{center.x, center.y, camera_height} + outward * orbit_radius;
            Vec3 target = pos + outward * 2.0 + Vec3{0.0, 0.0, -1.0};
            scene.trajectory.push_back(look_at(pos, target));
        }

        bool all_visible = true;
        for (const auto& obj : scene.objects) {
            bool seen = false;
            for (int f = 0; f < scene.frame_count() && !seen; ++f)
                seen = object_visible(scene, obj, f);
            if (!seen) {
                all_visible = false;
                break;
            }
        }
        if (!all_visible) continue;

        scene.validate();
        return scene;
    }
    throw BenchgenError("infeasible packing after " +
                        std::to_string(config.max_attempts) + " attempts");
}

std::string to_string(QuestionFamily family) {
    switch (family) {
        case QuestionFamily::ObjectCount: return "object_count";
        case QuestionFamily::RelativeDistanceFarthest: return "relative_distance_farthest";
        case QuestionFamily::RelativeDirection: return "relative_direction";
        case QuestionFamily::RelativeDirectionBackward:
            return "relative_direction_backward";
        case QuestionFamily::ObjectObstruction: return "object_obstruction";
        case QuestionFamily::AppearanceOrder: return "appearance_order";
    }
    return "object_count";
}

QuestionFamily family_from_string(const std::string& s) {
    for (QuestionFamily f :
         {QuestionFamily::ObjectCount, QuestionFamily::RelativeDistanceFarthest,
          QuestionFamily::RelativeDirection, QuestionFamily::RelativeDirectionBackward,
          QuestionFamily::ObjectObstruction, QuestionFamily::AppearanceOrder})
        if (to_string(f) == s) return f;
    throw BenchgenError("unknown question family: " + s);
}

std::string Question::rendered() const {
    if (choices.empty()) return text;
    std::ostringstream out;
    out << text << "\nOptions:";
    for (std::size_t i = 0; i < choices.size(); ++i)
        out << "\n" << static_cast<char>('A' + i) << ". " << choices[i];
    return out.str();
}

ordered_json Question::to_json() const {
    ordered_json j;
    j["question_id"] = question_id;
    j["scene_id"] = scene_id;
    j["kind"] = to_string(kind);
    j["text"] = text;
    j["answer_type"] = answer_type;
    j["choices"] = choices;
    j["ground_truth"] = ground_truth;
    j["provenance"] = provenance;
    return j;
}

Question Question::from_json(const json& j) {
    Question q;
    try {
        q.question_id = j.at("question_id").get<std::string>();
        q.scene_id = j.at("scene_id").get<std::string>();
        q.kind = family_from_string(j.at("kind").get<std::string>());
        q.text = j.at("text").get<std::string>();
        q.answer_type = j.at("answer_type").get<std::string>();
        q.choices = j.at("choices").get<std::vector<std::string>>();
        q.ground_truth = j.at("ground_truth").get<std::string>();
        if (j.contains("provenance")) q.provenance = j.at("provenance");
    } catch (const json::exception& e) {
        throw BenchgenError(std::string("invalid question record: ") + e.what());
    }
    if (q.answer_type == "multiple_choice") {
        if (q.choices.empty()) throw BenchgenError("multiple_choice question without choices");
        if (q.ground_truth.size() != 1 ||
            q.ground_truth[0] < 'A' ||
            q.ground_truth[0] >= static_cast<char>('A' + q.choices.size()))
            throw BenchgenError("ground truth is not a valid choice letter: " +
                                q.ground_truth);
    } else if (q.answer_type == "numerical") {
        try {
            (void)std::stod(q.ground_truth);
        } catch (const std::exception&) {
            throw BenchgenError("numerical ground truth does not parse: " + q.ground_truth);
        }
    } else {
        throw BenchgenError("unknown answer_type: " + q.answer_type);
    }
    return q;
}

namespace {

std::map<std::string, std::vector<const SceneObject*>> by_category(const SceneSpec& scene) {
    std::map<std::string, std::vector<const SceneObject*>> out;
    for (const auto& obj : scene.objects) out[obj.category].push_back(&obj);
    return out;
}

/// Categories with exactly one instance (unambiguous referring expressions).
std::vector<const SceneObject*> single_instance_objects(const SceneSpec& scene) {
    std::vector<const SceneObject*> singles;
    for (const auto& [category, objs] : by_category(scene))
        if (objs.size() == 1) singles.push_back(objs.front());
    return singles;
}

InstanceSet gt_instance_set(const std::vector<const SceneObject*>& objects) {
    InstanceSet set;
    set.aligned = true;
    for (const SceneObject* obj : objects) {
        Instance inst;
        inst.instance_id = obj->category + "_1";
        inst.category = obj->category;
        inst.center = obj->center;
        inst.box3d = obj->box3d;
        set.instances.push_back(std::move(inst));
    }
    return set;
}

/// Places the ground-truth choice among distractors with an id-seeded shuffle
/// so the correct letter carries no positional bias.
void finalize_mca(Question& q, const std::string& gt_text,
                  std::vector<std::string> distractors) {
    std::vector<std::string> choices = {gt_text};
    choices.insert(choices.end(), distractors.begin(), distractors.end());
    std::mt19937_64 shuffle_rng(hash_id(q.question_id));
    std::shuffle(choices.begin(), choices.end(), shuffle_rng);
    q.choices = choices;
    auto pos = std::find(choices.begin(), choices.end(), gt_text);
    q.ground_truth = std::string(1, static_cast<char>('A' + (pos - choices.begin())));
    q.answer_type = "multiple_choice";
}

template <typename T>
std::vector<T> shuffled(std::vector<T> items, std::mt19937_64& rng) {
    std::shuffle(items.begin(), items.end(), rng);
    return items;
}

int first_visible_frame(const SceneSpec& scene, const SceneObject& obj) {
    for (int f = 0; f < scene.frame_count(); ++f)
        if (object_visible(scene, obj, f)) return f;
    return -1;
}

constexpr const char* kDirectionsClause =
    " Directions refer to the quadrants of a Cartesian plane (assuming I am "
    "standing at the origin and facing the positive y-axis).";

const std::vector<std::string>& quadrant_names() {
    static const std::vector<std::string> kQuads = {"front-left", "front-right",
                                                    "back-left", "back-right"};
    return kQuads;
}

}  // namespace

std::optional<Question> gen_count(const SceneSpec& scene, std::mt19937_64& rng,
                                  const std::string& question_id) {
    auto categories = by_category(scene);
    if (categories.empty()) return std::nullopt;
    std::vector<std::string> names;
    for (const auto& [category, objs] : categories) names.push_back(category);
    const std::string& category = names[rng() % names.size()];

    Question q;
    q.question_id = question_id;
    q.scene_id = scene.scene_id;
    q.kind = QuestionFamily::ObjectCount;
    q.text = "How many " + category + "s are in this room?";
    q.answer_type = "numerical";
    q.ground_truth = std::to_string(categories.at(category).size());
    q.provenance = {{"category", category},
                    {"count", categories.at(category).size()}};
    return q;
}

std::optional<Question> gen_appearance_order(const SceneSpec& scene, std::mt19937_64& rng,
                                             const std::string& question_id) {
    std::map<std::string, int> first_frame;
    for (const auto& [category, objs] : by_category(scene)) {
        int best = -1;
        for (const SceneObject* obj : objs) {
            int f = first_visible_frame(scene, *obj);
            if (f >= 0 && (best < 0 || f < best)) best = f;
        }
        if (best >= 0) first_frame[category] = best;
    }
    std::vector<std::string> names;
    for (const auto& [category, frame] : first_frame) names.push_back(category);
    if (names.size() < 4) return std::nullopt;

    // Four categories with pairwise-distinct first frames.
    names = shuffled(names, rng);
    std::vector<std::string> picked;
    std::set<int> used_frames;
    for (const auto& name : names) {
        if (used_frames.count(first_frame[name])) continue;
        used_frames.insert(first_frame[name]);
        picked.push_back(name);
        if (picked.size() == 4) break;
    }
    if (picked.size() < 4) return std::nullopt;

    std::vector<std::string> order = picked;
    std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
        return first_frame[a] < first_frame[b];
    });
    auto join = [](const std::vector<std::string>& parts) {
        std::string out;
        for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
        return out;
    };
    std::string gt_text = join(order);

    std::set<std::string> seen = {gt_text};
    std::vector<std::string> distractors;
    std::vector<std::string> perm = order;
    while (distractors.size() < 3) {
        std::shuffle(perm.begin(), perm.end(), rng);
        std::string candidate = join(perm);
        if (seen.insert(candidate).second) distractors.push_back(candidate);
    }

    Question q;
    q.question_id = question_id;
    q.scene_id = scene.scene_id;
    q.kind = QuestionFamily::AppearanceOrder;
    q.text = "What will be the first-time appearance order of the following "
             "categories in the video: " +
             join(picked) + "?";
    ordered_json firsts = ordered_json::object();
    for (const auto& name : order) firsts[name] = first_frame[name];
    q.provenance = {{"first_frames", firsts}};
    finalize_mca(q, gt_text, distractors);
    return q;
}

std::optional<Question> gen_direction(const SceneSpec& scene, std::mt19937_64& rng,
                                      const std::string& question_id, bool backward) {
    auto singles = shuffled(single_instance_objects(scene), rng);
    if (singles.size() < 3) return std::nullopt;
    InstanceSet set = gt_instance_set(singles);

    for (std::size_t a = 0; a < singles.size(); ++a)
        for (std::size_t b = 0; b < singles.size(); ++b)
            for (std::size_t c = 0; c < singles.size(); ++c) {
                if (a == b || a == c || b == c) continue;
                const std::string pos = singles[a]->category;
                const std::string orient = singles[b]->category;
                const std::string query = singles[c]->category;
                DirectionResult r =
                    backward ? calculate_direction_backward(set, pos + "_1", orient + "_1",
                                                            query + "_1")
                             : calculate_direction(set, pos + "_1", orient + "_1",
                                                   query + "_1");
                if (std::abs(r.evidence.df) < kDirectionMargin ||
                    std::abs(r.evidence.dr) < kDirectionMargin)
                    continue;

                Question q;
                q.question_id = question_id;
                q.scene_id = scene.scene_id;
                q.kind = backward ? QuestionFamily::RelativeDirectionBackward
                                  : QuestionFamily::RelativeDirection;
                q.text = "If I am standing by the " + pos +
                         (backward
                              ? " and with my back to the " + orient +
                                    " (facing directly away from it), is the "
                              : " and facing the " + orient + ", is the ") +
                         query +
                         " to my front-left, front-right, back-left, or back-right?" +
                         kDirectionsClause;
                q.provenance = {{"positioning", pos},
                                {"orienting", orient},
                                {"querying", query},
                                {"forward_offset", r.evidence.df},
                                {"right_offset", r.evidence.dr}};
                std::string gt_text = to_string(r.quadrant);
                std::vector<std::string> distractors;
                for (const auto& name : quadrant_names())
                    if (name != gt_text) distractors.push_back(name);
                finalize_mca(q, gt_text, distractors);
                return q;
            }
    return std::nullopt;
}

std::optional<Question> gen_obstruction(const SceneSpec& scene, std::mt19937_64& rng,
                                        const std::string& question_id) {
    auto singles = shuffled(single_instance_objects(scene), rng);
    if (singles.size() < 6) return std::nullopt;  // src + dst + obstructor + 3 distractors

    std::set<int> single_ids;
    for (const SceneObject* obj : singles) single_ids.insert(obj->object_id);

    for (std::size_t a = 0; a < singles.size(); ++a)
        for (std::size_t b = 0; b < singles.size(); ++b) {
            if (a == b) continue;
            const SceneObject* src = singles[a];
            const SceneObject* dst = singles[b];
            if (euclidean_distance(src->center, dst->center) < 1.2) continue;

            // The route must have exactly one on-segment object within the
            // obstruction threshold, over *all* other objects in the scene.
            const SceneObject* obstructor = nullptr;
            bool ambiguous = false;
            std::vector<const SceneObject*> distractors;
            for (const SceneObject* other : singles) {
                if (other == src || other == dst) continue;
                auto proj =
                    point_segment_projection(other->center, src->center, dst->center);
                bool on_route = proj.distance < kDefaultObstructionThreshold &&
                                proj.t > 0.0 && proj.t < 1.0;
                if (on_route) {
                    if (obstructor) ambiguous = true;
                    obstructor = other;
                } else if (proj.distance >=
                           kDefaultObstructionThreshold + kObstructionClearance) {
                    distractors.push_back(other);
                }
            }
            for (const auto& obj : scene.objects) {
                if (single_ids.count(obj.object_id)) continue;
                auto proj = point_segment_projection(obj.center, src->center, dst->center);
                if (proj.distance < kDefaultObstructionThreshold && proj.t > 0.0 &&
                    proj.t < 1.0)
                    ambiguous = true;  // multi-instance category on the route
            }
            if (!obstructor || ambiguous || distractors.size() < 3) continue;

            auto proj = point_segment_projection(obstructor->center, src->center,
                                                 dst->center);
            Question q;
            q.question_id = question_id;
            q.scene_id = scene.scene_id;
            q.kind = QuestionFamily::ObjectObstruction;
            q.text = "If I am standing by the " + src->category + " and facing the " +
                     dst->category +
                     ", which object is there as an obstruction when I walk straight "
                     "to the " +
                     dst->category + "?";
            q.provenance = {{"positioning", src->category},
                            {"orienting", dst->category},
                            {"obstructor", obstructor->category},
                            {"distance_to_segment", proj.distance},
                            {"t", proj.t}};
            std::vector<std::string> distractor_names;
            for (std::size_t i = 0; i < 3; ++i)
                distractor_names.push_back(distractors[i]->category);
            finalize_mca(q, obstructor->category, distractor_names);
            return q;
        }
    return std::nullopt;
}

std::optional<Question> gen_farthest(const SceneSpec& scene, std::mt19937_64& rng,
                                     const std::string& question_id) {
    auto singles = shuffled(single_instance_objects(scene), rng);
    if (singles.size() < 5) return std::nullopt;

    for (std::size_t anchor_idx = 0; anchor_idx < singles.size(); ++anchor_idx) {
        const SceneObject* anchor = singles[anchor_idx];
        std::vector<const SceneObject*> pool;
        for (std::size_t i = 0; i < singles.size(); ++i)
            if (i != anchor_idx) pool.push_back(singles[i]);

        for (int subset = 0; subset < 20; ++subset) {
            std::shuffle(pool.begin(), pool.end(), rng);
            std::vector<const SceneObject*> candidates(pool.begin(), pool.begin() + 4);

            std::size_t best_box = 0, best_center = 0;
            std::vector<double> box_dist(4);
            for (std::size_t i = 0; i < 4; ++i) {
                box_dist[i] = box_closest_distance(anchor->box3d, candidates[i]->box3d);
                if (box_dist[i] > box_dist[best_box]) best_box = i;
                if (euclidean_distance(anchor->center, candidates[i]->center) >
                    euclidean_distance(anchor->center, candidates[best_center]->center))
                    best_center = i;
            }
            double runner_up = 0.0;
            for (std::size_t i = 0; i < 4; ++i)
                if (i != best_box) runner_up = std::max(runner_up, box_dist[i]);
            if (box_dist[best_box] < runner_up * (1.0 + kFarthestRelativeMargin))
                continue;
            // Center-distance argmax must agree so that the answer does not
            // depend on which distance convention a solver uses.
            if (best_center != best_box) continue;

            Question q;
            q.question_id = question_id;
            q.scene_id = scene.scene_id;
            q.kind = QuestionFamily::RelativeDistanceFarthest;
            std::vector<std::string> distractor_names;
            for (std::size_t i = 0; i < 4; ++i)
                if (i != best_box) distractor_names.push_back(candidates[i]->category);
            finalize_mca(q, candidates[best_box]->category, distractor_names);
            q.text = "Measuring from the closest point of each object, which of these "
                     "objects (" +
                     q.choices[0] + ", " + q.choices[1] + ", " + q.choices[2] + ", " +
                     q.choices[3] + ") is the farthest from the " + anchor->category +
                     "?";
            ordered_json dists = ordered_json::object();
            for (std::size_t i = 0; i < 4; ++i)
                dists[candidates[i]->category] = box_dist[i];
            q.provenance = {{"anchor", anchor->category},
                            {"box_distances", dists},
                            {"farthest", candidates[best_box]->category}};
            return q;
        }
    }
    return std::nullopt;
}

std::vector<Question> generate_questions(const SceneSpec& scene, QuestionFamily family,
                                         int max_count, std::uint64_t seed) {
    std::mt19937_64 rng(hash_id(scene.scene_id + "|" + to_string(family) + "|" +
                                std::to_string(seed)));
    std::vector<Question> questions;
    std::set<std::string> seen_text;
    int attempts = std::max(1, max_count) * 20;
    for (int i = 0; i < attempts && static_cast<int>(questions.size()) < max_count; ++i) {
        std::string qid = scene.scene_id + "_" + to_string(family) + "_" +
                          std::to_string(questions.size());
        std::optional<Question> q;
        switch (family) {
            case QuestionFamily::ObjectCount: q = gen_count(scene, rng, qid); break;
            case QuestionFamily::RelativeDistanceFarthest:
                q = gen_farthest(scene, rng, qid);
                break;
            case QuestionFamily::RelativeDirection:
                q = gen_direction(scene, rng, qid, false);
                break;
            case QuestionFamily::RelativeDirectionBackward:
                q = gen_direction(scene, rng, qid, true);
                break;
            case QuestionFamily::ObjectObstruction:
                q = gen_obstruction(scene, rng, qid);
                break;
            case QuestionFamily::AppearanceOrder:
                q = gen_appearance_order(scene, rng, qid);
                break;
        }
        if (!q) break;  // generators are exhaustive; retrying cannot help
        if (seen_text.insert(q->text).second) questions.push_back(std::move(*q));
    }
    return questions;
}

void save_questions(const std::vector<Question>& questions, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw BenchgenError("cannot write question file: " + path);
    for (const auto& q : questions) out << q.to_json().dump() << "\n";
}

std::vector<Question> load_questions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BenchgenError("cannot open question file: " + path);
    std::vector<Question> questions;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            questions.push_back(Question::from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw BenchgenError(path + ":" + std::to_string(line_no) +
                                ": parse error: " + e.what());
        }
    }
    return questions;
}

ParsedQuestion parse_question_text(const std::string& rendered) {
    ParsedQuestion parsed;
    std::string text = rendered;
    std::size_t opt_pos = rendered.find("\nOptions:");
    if (opt_pos != std::string::npos) {
        text = rendered.substr(0, opt_pos);
        std::istringstream lines(rendered.substr(opt_pos + 1));
        std::string line;
        static const std::regex opt(R"(^\s*[A-D]\.\s+(.*?)\s*$)");
        while (std::getline(lines, line)) {
            std::smatch m;
            if (std::regex_match(line, m, opt)) parsed.choices.push_back(m[1].str());
        }
    }

    std::smatch m;
    static const std::regex count_re(R"(^How many (.+?)s are in this room\?$)");
    static const std::regex order_re(
        R"(^What will be the first-time appearance order of the following categories in the video: (.+?)\?$)");
    static const std::regex farthest_re(
        R"(^Measuring from the closest point of each object, which of these objects \((.+?)\) is the farthest from the (.+?)\?$)");
    static const std::regex obstruction_re(
        R"(^If I am standing by the (.+?) and facing the (.+?), which object is there as an obstruction when I walk straight to the .+?\?$)");
    static const std::regex backward_re(
        R"(^If I am standing by the (.+?) and with my back to the (.+?) \(facing directly away from it\), is the (.+?) to my front-left.*)");
    static const std::regex forward_re(
        R"(^If I am standing by the (.+?) and facing the (.+?), is the (.+?) to my front-left.*)");

    if (std::regex_match(text, m, count_re)) {
        parsed.kind = QuestionFamily::ObjectCount;
        parsed.slots["category"] = m[1].str();
    } else if (std::regex_match(text, m, order_re)) {
        parsed.kind = QuestionFamily::AppearanceOrder;
        parsed.slots["categories"] = m[1].str();
    } else if (std::regex_match(text, m, farthest_re)) {
        parsed.kind = QuestionFamily::RelativeDistanceFarthest;
        parsed.slots["choices"] = m[1].str();
        parsed.slots["category"] = m[2].str();
    } else if (std::regex_match(text, m, obstruction_re)) {
        parsed.kind = QuestionFamily::ObjectObstruction;
        parsed.slots["positioning"] = m[1].str();
        parsed.slots["orienting"] = m[2].str();
    } else if (std::regex_match(text, m, backward_re)) {
        parsed.kind = QuestionFamily::RelativeDirectionBackward;
        parsed.slots["positioning"] = m[1].str();
        parsed.slots["orienting"] = m[2].str();
        parsed.slots["querying"] = m[3].str();
    } else if (std::regex_match(text, m, forward_re)) {
        parsed.kind = QuestionFamily::RelativeDirection;
        parsed.slots["positioning"] = m[1].str();
        parsed.slots["orienting"] = m[2].str();
        parsed.slots["querying"] = m[3].str();
    } else {
        throw BenchgenError("unrecognized question template: " + text);
    }
    return parsed;
}

ordered_json CognitiveMap::to_json() const {
    ordered_json j;
    j["scene_id"] = scene_id;
    j["grid_size"] = grid_size;
    j["objects"] = ordered_json::object();
    for (const auto& [category, coords] : entries) {
        ordered_json list = ordered_json::array();
        for (const auto& [gx, gy] : coords) list.push_back(ordered_json::array({gx, gy}));
        j["objects"][category] = std::move(list);
    }
    return j;
}

CognitiveMap cognitive_map(const SceneSpec& scene) {
    double ext_x = scene.room_max.x - scene.room_min.x;
    double ext_y = scene.room_max.y - scene.room_min.y;
    if (ext_x <= 0.0 || ext_y <= 0.0)
        throw BenchgenError("degenerate scene extent for cognitive map");
    double scale = 9.0 / std::max(ext_x, ext_y);  // one shared scale keeps the
                                                  // xy aspect ratio
    auto grid = [&](double v, double lo) {
        return static_cast<int>(std::floor((v - lo) * scale + 0.5));  // half-up
    };
    CognitiveMap map;
    map.scene_id = scene.scene_id;
    for (const auto& obj : scene.objects)
        map.entries[obj.category].emplace_back(grid(obj.center.x, scene.room_min.x),
                                               grid(obj.center.y, scene.room_min.y));
    return map;
}

}  // namespace sra
