#pragma once

#include "sra/perception.hpp"
#include "sra/relations.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace sra {

struct BenchgenError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GenConfig {
    Vec3 room_min{0.0, 0.0, 0.0};
    Vec3 room_max{8.0, 6.0, 3.0};
    std::vector<std::string> vocabulary;  // defaults filled when empty
    int min_objects = 6;
    int max_objects = 9;
    double min_separation = 0.7;   // pairwise box_closest_distance floor
    int frame_count = 64;
    double fps = 2.0;
    int max_attempts = 50;         // whole-scene retries on infeasible packing
};

/// Random furniture layout plus a panoramic orbit trajectory; every object is
/// verified visible in at least one frame.
SceneSpec generate_scene(const GenConfig& config, std::uint64_t seed);

enum class QuestionFamily {
    ObjectCount,
    RelativeDistanceFarthest,
    RelativeDirection,
    RelativeDirectionBackward,
    ObjectObstruction,
    AppearanceOrder,
};

std::string to_string(QuestionFamily family);
QuestionFamily family_from_string(const std::string& s);

struct Question {
    std::string question_id;
    std::string scene_id;
    QuestionFamily kind = QuestionFamily::ObjectCount;
    std::string text;                  // rendered template, no option lines
    std::string answer_type;           // "numerical" | "multiple_choice"
    std::vector<std::string> choices;  // ordered A..D; empty for numerical
    std::string ground_truth;          // letter for MCA, digits for numerical
    nlohmann::ordered_json provenance;

    /// text plus the "Options:" block; what the agent sees.
    std::string rendered() const;

    nlohmann::ordered_json to_json() const;
    static Question from_json(const nlohmann::json& j);
};

/// Ambiguity filters (the generators reject configurations that violate them).
inline constexpr double kDirectionMargin = 0.15;       // min |df|, |dr|
inline constexpr double kFarthestRelativeMargin = 0.15;
inline constexpr double kObstructionClearance = 0.1;   // distractors: threshold + this

std::optional<Question> gen_count(const SceneSpec& scene, std::mt19937_64& rng,
                                  const std::string& question_id);
std::optional<Question> gen_appearance_order(const SceneSpec& scene, std::mt19937_64& rng,
                                             const std::string& question_id);
std::optional<Question> gen_direction(const SceneSpec& scene, std::mt19937_64& rng,
                                      const std::string& question_id, bool backward);
std::optional<Question> gen_obstruction(const SceneSpec& scene, std::mt19937_64& rng,
                                        const std::string& question_id);
std::optional<Question> gen_farthest(const SceneSpec& scene, std::mt19937_64& rng,
                                     const std::string& question_id);

/// Up to max_count distinct questions of one family for one scene.
std::vector<Question> generate_questions(const SceneSpec& scene, QuestionFamily family,
                                         int max_count, std::uint64_t seed);

void save_questions(const std::vector<Question>& questions, const std::string& path);
std::vector<Question> load_questions(const std::string& path);

/// Recoverable structure of a rendered question (template round-trip).
struct ParsedQuestion {
    QuestionFamily kind = QuestionFamily::ObjectCount;
    std::map<std::string, std::string> slots;
    std::vector<std::string> choices;
};
ParsedQuestion parse_question_text(const std::string& rendered);

struct CognitiveMap {
    std::string scene_id;
    int grid_size = 10;
    std::map<std::string, std::vector<std::pair<int, int>>> entries;

    nlohmann::ordered_json to_json() const;
};

/// 10x10 grid with one shared scale = 9 / max xy extent (aspect preserved),
/// round-half-up coordinates.
CognitiveMap cognitive_map(const SceneSpec& scene);

/// Stable seed for choice-order shuffles and generator salts.
std::uint64_t hash_id(const std::string& id);

}  // namespace sra
