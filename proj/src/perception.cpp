#include "sra/perception.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

namespace sra {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json vec_to_json(const Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }

Vec3 vec_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw PerceptionError("expected a 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

ordered_json box_to_json(const BBox3D& b) {
    return ordered_json::array({b.min.x, b.min.y, b.min.z, b.max.x, b.max.y, b.max.z});
}

BBox3D box_from_json(const json& j) {
    if (!j.is_array() || j.size() != 6) throw PerceptionError("expected a 6-element box array");
    return {{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()},
            {j[3].get<double>(), j[4].get<double>(), j[5].get<double>()}};
}

}  // namespace

ordered_json SceneSpec::to_json() const {
    ordered_json j;
    j["scene_id"] = scene_id;
    j["rng_seed"] = rng_seed;
    j["fps"] = fps;
    j["room"] = {{"min", vec_to_json(room_min)}, {"max", vec_to_json(room_max)}};
    j["ground_plane"] = {{"normal", vec_to_json(ground_plane.normal)},
                         {"offset", ground_plane.offset}};
    j["objects"] = ordered_json::array();
    for (const auto& obj : objects) {
        j["objects"].push_back({{"object_id", obj.object_id},
                                {"category", obj.category},
                                {"center", vec_to_json(obj.center)},
                                {"box3d", box_to_json(obj.box3d)}});
    }
    j["trajectory"] = ordered_json::array();
    for (const auto& cam : trajectory) {
        ordered_json c;
        c["position"] = vec_to_json(cam.position);
        c["rotation"] = cam.rotation;
        c["fx"] = cam.focal_x;
        c["fy"] = cam.focal_y;
        c["cx"] = cam.principal_x;
        c["cy"] = cam.principal_y;
        c["width"] = cam.width;
        c["height"] = cam.height;
        j["trajectory"].push_back(std::move(c));
    }
    return j;
}

SceneSpec SceneSpec::from_json(const json& j) {
    SceneSpec s;
    try {
        s.scene_id = j.at("scene_id").get<std::string>();
        s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        s.fps = j.value("fps", 2.0);
        s.room_min = vec_from_json(j.at("room").at("min"));
        s.room_max = vec_from_json(j.at("room").at("max"));
        s.ground_plane.normal = vec_from_json(j.at("ground_plane").at("normal"));
        s.ground_plane.offset = j.at("ground_plane").at("offset").get<double>();
        for (const auto& o : j.at("objects")) {
            SceneObject obj;
            obj.object_id = o.at("object_id").get<int>();
            obj.category = o.at("category").get<std::string>();
            obj.center = vec_from_json(o.at("center"));
            obj.box3d = box_from_json(o.at("box3d"));
            s.objects.push_back(std::move(obj));
        }
        for (const auto& c : j.at("trajectory")) {
            CameraPose cam;
            cam.position = vec_from_json(c.at("position"));
            auto rot = c.at("rotation");
            if (!rot.is_array() || rot.size() != 9)
                throw PerceptionError("rotation must have 9 entries");
            for (std::size_t i = 0; i < 9; ++i) cam.rotation[i] = rot[i].get<double>();
            cam.focal_x = c.at("fx").get<double>();
            cam.focal_y = c.at("fy").get<double>();
            cam.principal_x = c.at("cx").get<double>();
            cam.principal_y = c.at("cy").get<double>();
            cam.width = c.at("width").get<int>();
            cam.height = c.at("height").get<int>();
            s.trajectory.push_back(cam);
        }
    } catch (const json::exception& e) {
        throw PerceptionError(std::string("invalid scene document: ") + e.what());
    }
    s.validate();
    return s;
}

SceneSpec SceneSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PerceptionError("cannot open scene file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw PerceptionError("scene parse error in " + path + ": " + e.what());
    }
    return from_json(j);
}

void SceneSpec::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw PerceptionError("cannot write scene file: " + path);
    out << to_json().dump(2) << "\n";
}

void SceneSpec::validate() const {
    if (trajectory.empty()) throw PerceptionError("scene has an empty trajectory");
    if (std::abs(ground_plane.normal.norm() - 1.0) > 1e-9)
        throw PerceptionError("ground plane normal is not unit length");
    for (const auto& obj : objects) {
        if (!obj.box3d.valid())
            throw PerceptionError("object " + std::to_string(obj.object_id) +
                                  " has an inverted box");
        if (!obj.box3d.contains(obj.center))
            throw PerceptionError("object " + std::to_string(obj.object_id) +
                                  " center lies outside its box");
    }
    for (const auto& cam : trajectory) {
        if (cam.focal_x <= 0.0 || cam.focal_y <= 0.0)
            throw PerceptionError("non-positive focal length in trajectory");
        if (cam.width <= 0 || cam.height <= 0)
            throw PerceptionError("non-positive image size in trajectory");
    }
}

void NoiseModel::validate() const {
    if (center_sigma < 0.0 || box_jitter_sigma < 0.0)
        throw PerceptionError("noise sigmas must be >= 0");
    if (miss_rate < 0.0 || miss_rate > 1.0 || false_positive_rate < 0.0 ||
        false_positive_rate > 1.0)
        throw PerceptionError("noise rates must be in [0,1]");
}

std::string to_string(TrackTermination t) {
    switch (t) {
        case TrackTermination::CapReached: return "cap_reached";
        case TrackTermination::AbsentTwice: return "absent_twice";
        case TrackTermination::EndOfVideo: return "end_of_video";
    }
    return "end_of_video";
}

std::vector<int> sample_frames(int frame_count, int count) {
    std::vector<int> frames;
    if (frame_count <= 0) return frames;
    if (count >= frame_count) {
        frames.resize(static_cast<std::size_t>(frame_count));
        for (int i = 0; i < frame_count; ++i) frames[static_cast<std::size_t>(i)] = i;
        return frames;
    }
    if (count == 1) return {0};
    for (int i = 0; i < count; ++i) {
        int f = static_cast<int>(std::llround(static_cast<double>(i) *
                                              (frame_count - 1) / (count - 1)));
        if (frames.empty() || frames.back() != f) frames.push_back(f);
    }
    return frames;
}

bool object_visible(const SceneSpec& scene, const SceneObject& obj, int frame) {
    if (frame < 0 || frame >= scene.frame_count()) return false;
    const CameraPose& cam = scene.trajectory[static_cast<std::size_t>(frame)];
    auto px = project_point(obj.center, cam);
    return px && px->u >= 0.0 && px->u <= cam.width && px->v >= 0.0 && px->v <= cam.height;
}

std::optional<BBox2D> project_object_box(const SceneSpec& scene, const SceneObject& obj,
                                         int frame) {
    if (!object_visible(scene, obj, frame)) return std::nullopt;
    const CameraPose& cam = scene.trajectory[static_cast<std::size_t>(frame)];
    BBox2D box{1e30, 1e30, -1e30, -1e30};
    for (const Vec3& corner : obj.box3d.corners()) {
        auto px = project_point(corner, cam);
        if (!px) continue;
        box.x_min = std::min(box.x_min, px->u);
        box.y_min = std::min(box.y_min, px->v);
        box.x_max = std::max(box.x_max, px->u);
        box.y_max = std::max(box.y_max, px->v);
    }
    box.x_min = std::clamp(box.x_min, 0.0, static_cast<double>(cam.width));
    box.x_max = std::clamp(box.x_max, 0.0, static_cast<double>(cam.width));
    box.y_min = std::clamp(box.y_min, 0.0, static_cast<double>(cam.height));
    box.y_max = std::clamp(box.y_max, 0.0, static_cast<double>(cam.height));
    if (!box.valid() || box.width() <= 0.0 || box.height() <= 0.0) return std::nullopt;
    return box;
}

namespace {

BBox2D jitter_box(const BBox2D& box, double sigma, const CameraPose& cam,
                  std::mt19937_64& rng) {
    if (sigma <= 0.0) return box;
    std::normal_distribution<double> jitter(0.0, sigma);
    BBox2D out{box.x_min + jitter(rng), box.y_min + jitter(rng),
               box.x_max + jitter(rng), box.y_max + jitter(rng)};
    if (out.x_min > out.x_max) std::swap(out.x_min, out.x_max);
    if (out.y_min > out.y_max) std::swap(out.y_min, out.y_max);
    out.x_min = std::clamp(out.x_min, 0.0, static_cast<double>(cam.width));
    out.x_max = std::clamp(out.x_max, 0.0, static_cast<double>(cam.width));
    out.y_min = std::clamp(out.y_min, 0.0, static_cast<double>(cam.height));
    out.y_max = std::clamp(out.y_max, 0.0, static_cast<double>(cam.height));
    return out;
}

}  // namespace

std::map<std::string, std::vector<Detection>> detect_2d(
    const SceneSpec& scene, const std::vector<std::string>& categories,
    const SamplingPolicy& policy, const NoiseModel& noise, std::uint64_t seed) {
    if (categories.empty()) throw PerceptionError("detect_2d: no categories requested");
    noise.validate();

    std::vector<std::string> wanted = categories;
    std::sort(wanted.begin(), wanted.end());
    wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::map<std::string, std::vector<Detection>> out;
    for (const auto& cat : wanted) out[cat] = {};

    for (int frame : sample_frames(scene.frame_count(), policy.detection_frames)) {
        const CameraPose& cam = scene.trajectory[static_cast<std::size_t>(frame)];
        for (const auto& cat : wanted) {
            for (const auto& obj : scene.objects) {
                if (obj.category != cat) continue;
                auto box = project_object_box(scene, obj, frame);
                if (!box) continue;
                bool missed = noise.miss_rate > 0.0 && unit(rng) < noise.miss_rate;
                BBox2D noisy = jitter_box(*box, noise.box_jitter_sigma, cam, rng);
                if (missed) continue;
                out[cat].push_back({frame, noisy, obj.object_id});
            }
            if (noise.false_positive_rate > 0.0 && unit(rng) < noise.false_positive_rate) {
                double x0 = unit(rng) * cam.width, y0 = unit(rng) * cam.height;
                double w = unit(rng) * cam.width / 4.0, h = unit(rng) * cam.height / 4.0;
                BBox2D spurious{x0, y0, std::min(x0 + w, static_cast<double>(cam.width)),
                                std::min(y0 + h, static_cast<double>(cam.height))};
                out[cat].push_back({frame, spurious, -1});
            }
        }
    }
    return out;
}

std::vector<ObjectView> lift_3d(const SceneSpec& scene,
                                const std::map<std::string, std::vector<Detection>>& detections,
                                const NoiseModel& noise, std::uint64_t seed) {
    noise.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<ObjectView> views;
    for (const auto& [category, dets] : detections) {
        for (const auto& det : dets) {
            if (det.frame < 0 || det.frame >= scene.frame_count())
                throw PerceptionError("detection frame out of range: " +
                                      std::to_string(det.frame));
            Vec3 center;
            if (det.gt_object_id >= 0) {
                auto it = std::find_if(scene.objects.begin(), scene.objects.end(),
                                       [&](const SceneObject& o) {
                                           return o.object_id == det.gt_object_id;
                                       });
                if (it == scene.objects.end())
                    throw PerceptionError("detection references unknown object id");
                center = it->center;
                if (noise.center_sigma > 0.0)
                    center = center + Vec3{gauss(rng), gauss(rng), gauss(rng)} *
                                          noise.center_sigma;
            } else {
                // false positives lift to a point inside the scene bounds
                center = {scene.room_min.x + unit(rng) * (scene.room_max.x - scene.room_min.x),
                          scene.room_min.y + unit(rng) * (scene.room_max.y - scene.room_min.y),
                          scene.room_min.z + unit(rng) * (scene.room_max.z - scene.room_min.z)};
            }
            views.push_back({det.frame, det.box, center, category});
        }
    }
    return views;
}

TrackRun run_track(const std::vector<bool>& visibility, const SamplingPolicy& policy) {
    TrackRun run;
    int consecutive_absent = 0;
    for (std::size_t i = 0; i < visibility.size(); ++i) {
        if (visibility[i]) {
            run.appended_offsets.push_back(i);
            consecutive_absent = 0;
            if (static_cast<int>(run.appended_offsets.size()) >= policy.tracking_cap) {
                run.termination_reason = TrackTermination::CapReached;
                return run;
            }
        } else {
            if (++consecutive_absent >= policy.absence_limit) {
                run.termination_reason = TrackTermination::AbsentTwice;
                return run;
            }
        }
    }
    run.termination_reason = TrackTermination::EndOfVideo;
    return run;
}

Tracklet track(const SceneSpec& scene, const std::string& category,
               const Detection& seed_detection, const SamplingPolicy& policy,
               const NoiseModel& noise, std::uint64_t seed) {
    noise.validate();
    if (seed_detection.frame < 0 || seed_detection.frame >= scene.frame_count())
        throw PerceptionError("invalid seed: frame out of range");

    // Nearest-center association against the seed box center in pixel space.
    const CameraPose& seed_cam = scene.trajectory[static_cast<std::size_t>(seed_detection.frame)];
    Vec3 seed_px = seed_detection.box.center();
    const SceneObject* target = nullptr;
    double best = 1e30;
    for (const auto& obj : scene.objects) {
        if (obj.category != category) continue;
        auto px = project_point(obj.center, seed_cam);
        if (!px) continue;
        double d = std::hypot(px->u - seed_px.x, px->v - seed_px.y);
        if (d < best) {
            best = d;
            target = &obj;
        }
    }
    if (!target)
        throw PerceptionError("invalid seed: no '" + category +
                              "' object visible in the seed frame");

    int stride = std::max(1, static_cast<int>(std::llround(scene.fps / policy.tracking_fps)));
    std::vector<int> frames;
    std::vector<bool> visibility;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int f = seed_detection.frame; f < scene.frame_count(); f += stride) {
        bool vis = object_visible(scene, *target, f);
        if (vis && noise.miss_rate > 0.0 && unit(rng) < noise.miss_rate) vis = false;
        frames.push_back(f);
        visibility.push_back(vis);
    }

    TrackRun run = run_track(visibility, policy);
    Tracklet tracklet;
    tracklet.object_id = target->object_id;
    tracklet.termination_reason = run.termination_reason;
    for (std::size_t off : run.appended_offsets) {
        int f = frames[off];
        auto box = project_object_box(scene, *target, f);
        if (!box) continue;  // visibility flipped by noise only
        const CameraPose& cam = scene.trajectory[static_cast<std::size_t>(f)];
        tracklet.boxes.emplace_back(f, jitter_box(*box, noise.box_jitter_sigma, cam, rng));
    }
    return tracklet;
}

std::vector<std::vector<Vec3>> floor_points(const SceneSpec& scene,
                                            const SamplingPolicy& policy,
                                            const NoiseModel& noise, std::uint64_t seed) {
    noise.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    constexpr int kPointsPerFrame = 40;

    std::vector<std::vector<Vec3>> per_frame;
    for (int frame : sample_frames(scene.frame_count(), policy.detection_frames)) {
        const CameraPose& cam = scene.trajectory[static_cast<std::size_t>(frame)];
        std::vector<Vec3> pts;
        for (int k = 0; k < kPointsPerFrame; ++k) {
            if (noise.false_positive_rate > 0.0 && unit(rng) < noise.false_positive_rate) {
                pts.push_back(
                    {scene.room_min.x + unit(rng) * (scene.room_max.x - scene.room_min.x),
                     scene.room_min.y + unit(rng) * (scene.room_max.y - scene.room_min.y),
                     unit(rng) * 3.0});
                continue;
            }
            double u = unit(rng) * cam.width;
            double v = unit(rng) * cam.height;
            // Cast the pixel ray onto the ground plane.
            Vec3 dir = back_project(u, v, 1.0, cam) - cam.position;
            double denom = scene.ground_plane.normal.dot(dir);
            if (std::abs(denom) < 1e-9) continue;
            double t = (scene.ground_plane.offset -
                        scene.ground_plane.normal.dot(cam.position)) /
                       denom;
            if (t <= 0.0) continue;
            Vec3 p = cam.position + dir * t;
            if (noise.center_sigma > 0.0)
                p = p + Vec3{gauss(rng), gauss(rng), gauss(rng)} * noise.center_sigma;
            pts.push_back(p);
        }
        per_frame.push_back(std::move(pts));
    }
    return per_frame;
}

namespace {

std::string format_number(double v) {
    if (std::abs(v - std::llround(v)) < 1e-9) return std::to_string(std::llround(v));
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

}  // namespace

std::string answer_query(const SceneSpec& scene, const std::string& prompt,
                         const std::string& query_type, int frame_idx) {
    if (query_type != "video" && query_type != "image")
        throw PerceptionError("query_type must be 'video' or 'image'");
    if (query_type == "image" && frame_idx < 0)
        throw PerceptionError("frame_idx is required for image queries");

    if (prompt.find("estimating room size") != std::string::npos) {
        double area = (scene.room_max.x - scene.room_min.x) *
                      (scene.room_max.y - scene.room_min.y);
        return "<answer>" + format_number(area) + "</answer>";
    }
    if (prompt.find("estimating REAL-WORLD distance") != std::string::npos) {
        // Find the two mentioned categories in the QUESTION line.
        std::string lower = prompt;
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        std::vector<const SceneObject*> hits;
        std::vector<std::pair<std::size_t, const SceneObject*>> positions;
        for (const auto& obj : scene.objects) {
            auto pos = lower.find(obj.category);
            if (pos == std::string::npos) continue;
            bool seen = std::any_of(positions.begin(), positions.end(),
                                    [&](const auto& p) {
                                        return p.second->category == obj.category;
                                    });
            if (!seen) positions.emplace_back(pos, &obj);
        }
        std::sort(positions.begin(), positions.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        if (positions.size() >= 2) {
            double d = euclidean_distance(positions[0].second->center,
                                          positions[1].second->center);
            return "<answer>" + format_number(d) + "</answer>";
        }
    }
    return kQueryRefusal;
}

std::uint64_t derive_seed(std::uint64_t scene_seed, const std::string& tool_name,
                          std::uint64_t ordinal) {
    std::uint64_t h = scene_seed ^ 0x9e3779b97f4a7c15ULL;
    for (unsigned char c : tool_name) h = (h ^ c) * 0x100000001b3ULL;
    h ^= ordinal + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

}  // namespace sra
