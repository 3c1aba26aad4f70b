#pragma once

#include "sra/clustering.hpp"

#include <map>
#include <string>
#include <vector>

namespace sra {

struct RelationsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Ranked instances plus the alignment flag set by scene modeling.
struct InstanceSet {
    std::vector<Instance> instances;
    bool aligned = false;

    /// Resolves an exact instance id; rejects bare category names.
    const Instance& resolve(const std::string& id) const;
};

enum class DirectionQuadrant { FrontLeft, FrontRight, BackLeft, BackRight };

std::string to_string(DirectionQuadrant q);
DirectionQuadrant quadrant_from_string(const std::string& s);

/// 180-degree flip: front-left <-> back-right, front-right <-> back-left.
DirectionQuadrant flip_quadrant(DirectionQuadrant q);

struct DirectionEvidence {
    Vec3 stand, face, target;
    double df = 0.0;  // forward offset
    double dr = 0.0;  // rightward offset
};

struct DirectionResult {
    DirectionQuadrant quadrant;
    DirectionEvidence evidence;
};

enum class HeightRelationKind { AHigher, BHigher, Equal };

struct HeightRelation {
    HeightRelationKind relation;
    double z_a = 0.0, z_b = 0.0;
};

struct ObstructionEvidence {
    Vec3 source_center, destination_center, obstruction_center;
    double t = 0.0;
    Vec3 closest_point;
    double distance_to_segment = 0.0;
    double threshold = 0.0;
};

struct ObstructionResult {
    bool is_obstruction = false;
    ObstructionEvidence evidence;
};

inline constexpr double kDefaultObstructionThreshold = 0.25;
inline constexpr double kDefaultHeightEpsilon = 0.05;

struct DistanceResult {
    std::string reference;
    std::vector<std::string> targets;
    std::map<std::string, double> distances;
    std::string unit = "relative";
};

DistanceResult calculate_distance(const InstanceSet& set, const std::string& reference_id,
                                  const std::vector<std::string>& target_ids);

/// Egocentric quadrant of target in the frame defined by standing at stand
/// and facing face, computed in the ground-plane xy after alignment.
DirectionResult calculate_direction(const InstanceSet& set, const std::string& stand_id,
                                    const std::string& face_id,
                                    const std::string& target_id);

/// Same egocentric frame with the forward vector negated.
DirectionResult calculate_direction_backward(const InstanceSet& set,
                                             const std::string& stand_id,
                                             const std::string& face_id,
                                             const std::string& target_id);

HeightRelation compare_height(const InstanceSet& set, const std::string& id_a,
                              const std::string& id_b,
                              double epsilon_z = kDefaultHeightEpsilon);

ObstructionResult calculate_obstruction(const InstanceSet& set,
                                        const std::string& source_id,
                                        const std::string& destination_id,
                                        const std::string& obstruction_id,
                                        double threshold = kDefaultObstructionThreshold);

/// Categories sorted by minimum frame index among their views, ties by name.
std::vector<std::string> appearance_order(
    const std::map<std::string, std::vector<ObjectView>>& views_by_category);

std::size_t count_instances(const InstanceSet& set, const std::string& category);

}  // namespace sra
