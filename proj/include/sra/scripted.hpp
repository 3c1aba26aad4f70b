#pragma once

#include "sra/agent.hpp"
#include "sra/knowledge.hpp"
#include "sra/perception.hpp"
#include "sra/relations.hpp"

#include <memory>

namespace sra {

/// Ordered question classification mirroring the Planner decision rules.
enum class QuestionKind {
    AppearanceOrder,
    ObjectAttributes,
    NumericalEstimation,
    GeneralVqa,
    RelativeDistance,
    RelativeDirection,
    RelativeDirectionBackward,
    Obstruction,
    Counting,
    HeightComparison,
};

/// The ruleset lives as an ordered JSON table (see planner_rules_json()).
QuestionKind classify_question(const std::string& question);
const char* planner_rules_json();
std::string to_string(QuestionKind kind);

/// "A. chair" option lines appended to MCA question text.
struct McaOption {
    char letter;
    std::string text;
};
std::vector<McaOption> parse_options(const std::string& question);

/// First occurrence of each vocabulary word (word-boundary, optional plural
/// 's') in the lowercased question, ordered by position.
struct VocabHit {
    std::size_t position;
    std::string category;
};
std::vector<VocabHit> match_vocabulary(const std::string& question,
                                       const std::vector<std::string>& vocabulary);

/// Tunables for the oracle tool suite.
struct ToolsetConfig {
    double cluster_epsilon = kDefaultClusterEpsilon;
    double obstruction_threshold = kDefaultObstructionThreshold;
    double height_epsilon = kDefaultHeightEpsilon;
    int ransac_iterations = kRansacDefaultIterations;
    double ransac_threshold = kRansacDefaultThreshold;
};

/// Registry of all tool families backed by the synthetic oracle provider.
/// The provider must outlive the registry.
ToolRegistry build_oracle_registry(std::shared_ptr<OracleProvider> provider,
                                   std::shared_ptr<const KnowledgeStore> knowledge,
                                   std::string video_path,
                                   ToolsetConfig config = {});

/// Deterministic scripted role backends over a scene vocabulary.
RoleBackends make_scripted_backends(std::vector<std::string> vocabulary,
                                    std::string video_path);

/// Parses a tool_object_3d_detection raw output back into an instance set.
InstanceSet instance_set_from_tool_output(const OJson& tool_3d_output);

}  // namespace sra
