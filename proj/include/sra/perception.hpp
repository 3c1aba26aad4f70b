#pragma once

#include "sra/clustering.hpp"
#include "sra/geometry.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sra {

struct PerceptionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SceneObject {
    int object_id = 0;
    std::string category;
    BBox3D box3d;
    Vec3 center;
};

/// Ground-truth scene: categorized boxes on the ground plane plus a camera
/// trajectory. The simulation oracle for the whole pipeline.
struct SceneSpec {
    std::string scene_id;
    std::vector<SceneObject> objects;
    Plane ground_plane;                // z = 0 in the world frame
    std::vector<CameraPose> trajectory;
    double fps = 2.0;                  // trajectory frame rate
    std::uint64_t rng_seed = 0;
    Vec3 room_min, room_max;           // xy extents; z spans [room_min.z, room_max.z]

    int frame_count() const { return static_cast<int>(trajectory.size()); }

    nlohmann::ordered_json to_json() const;
    static SceneSpec from_json(const nlohmann::json& j);
    static SceneSpec load(const std::string& path);
    void save(const std::string& path) const;
    void validate() const;  // throws PerceptionError with the failed invariant
};

struct NoiseModel {
    double center_sigma = 0.0;       // Gaussian noise on lifted 3D centers
    double box_jitter_sigma = 0.0;   // pixels
    double miss_rate = 0.0;
    double false_positive_rate = 0.0;

    bool silent() const {
        return center_sigma == 0.0 && box_jitter_sigma == 0.0 && miss_rate == 0.0 &&
               false_positive_rate == 0.0;
    }
    void validate() const;
};

struct SamplingPolicy {
    int detection_frames = 64;
    int query_frames = 32;
    double tracking_fps = 2.0;
    int tracking_cap = 50;
    int absence_limit = 2;
};

/// One detection with its oracle association (-1 for a false positive).
struct Detection {
    int frame = 0;
    BBox2D box;
    int gt_object_id = -1;
};

enum class TrackTermination { CapReached, AbsentTwice, EndOfVideo };

std::string to_string(TrackTermination t);

struct Tracklet {
    int object_id = -1;
    std::vector<std::pair<int, BBox2D>> boxes;  // frames strictly increasing
    TrackTermination termination_reason = TrackTermination::EndOfVideo;
};

/// Uniformly spaced frame indices, all frames when count >= frame_count.
std::vector<int> sample_frames(int frame_count, int count);

/// Center-visibility test: depth > 0 and the projected center inside the image.
bool object_visible(const SceneSpec& scene, const SceneObject& obj, int frame);

/// Projected, clipped 2D box of an object; absent when not visible.
std::optional<BBox2D> project_object_box(const SceneSpec& scene, const SceneObject& obj,
                                         int frame);

std::map<std::string, std::vector<Detection>> detect_2d(
    const SceneSpec& scene, const std::vector<std::string>& categories,
    const SamplingPolicy& policy, const NoiseModel& noise, std::uint64_t seed);

std::vector<ObjectView> lift_3d(const SceneSpec& scene,
                                const std::map<std::string, std::vector<Detection>>& detections,
                                const NoiseModel& noise, std::uint64_t seed);

/// Core tracking policy over a visibility sequence: element 0 is the seed
/// frame. Returns the offsets (into the sequence) where a box was appended.
struct TrackRun {
    std::vector<std::size_t> appended_offsets;
    TrackTermination termination_reason = TrackTermination::EndOfVideo;
};
TrackRun run_track(const std::vector<bool>& visibility, const SamplingPolicy& policy);

Tracklet track(const SceneSpec& scene, const std::string& category,
               const Detection& seed_detection, const SamplingPolicy& policy,
               const NoiseModel& noise, std::uint64_t seed);

/// Ground-plane points per sampled frame (frustum-constrained), with outliers
/// injected at the false-positive rate.
std::vector<std::vector<Vec3>> floor_points(const SceneSpec& scene,
                                            const SamplingPolicy& policy,
                                            const NoiseModel& noise, std::uint64_t seed);

inline constexpr const char* kQueryRefusal = "UNSUPPORTED_QUERY";

/// Oracle answers to the two strict numeric query templates (room area and
/// object-pair distance); anything else returns the refusal sentinel.
std::string answer_query(const SceneSpec& scene, const std::string& prompt,
                         const std::string& query_type, int frame_idx);

/// Deterministic per-call seed: hash(scene seed, tool name, call ordinal).
std::uint64_t derive_seed(std::uint64_t scene_seed, const std::string& tool_name,
                          std::uint64_t ordinal);

/// Stateful wrapper keeping per-tool call ordinals over one immutable scene.
class OracleProvider {
  public:
    OracleProvider(SceneSpec scene, SamplingPolicy policy, NoiseModel noise)
        : scene_(std::move(scene)), policy_(policy), noise_(noise) {}

    const SceneSpec& scene() const { return scene_; }
    const SamplingPolicy& policy() const { return policy_; }
    const NoiseModel& noise() const { return noise_; }

    std::uint64_t next_seed(const std::string& tool_name) {
        return derive_seed(scene_.rng_seed, tool_name, ordinals_[tool_name]++);
    }

  private:
    SceneSpec scene_;
    SamplingPolicy policy_;
    NoiseModel noise_;
    std::map<std::string, std::uint64_t> ordinals_;
};

}  // namespace sra
