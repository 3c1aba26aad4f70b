#pragma once

#include "sra/geometry.hpp"

#include <string>
#include <vector>

namespace sra {

struct ClusteringError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One sighting of a category in one frame.
struct ObjectView {
    int frame = 0;
    BBox2D box;
    Vec3 center;
    std::string category;
};

/// A clustered physical object.
struct Instance {
    std::string instance_id;  // assigned by rank_instances: "<category>_<k>"
    std::string category;
    Vec3 center;              // mean of member view centers
    BBox3D box3d;             // axis-aligned hull of member centers
    std::vector<ObjectView> members;

    std::size_t member_count() const { return members.size(); }
    int first_frame() const;
};

/// Disjoint groups of view indices (into the views list passed alongside);
/// may cover only a subset of the views.
struct TrackPartition {
    std::vector<std::vector<std::size_t>> groups;
};

inline constexpr double kDefaultClusterEpsilon = 0.5;

/// Greedy merging of views into instances: pairs sorted ascending by center
/// distance once (ties by index), scanned until the first pair beyond epsilon,
/// merging only frame-disjoint clusters. With tracks, each group is pre-merged
/// into one point whose center is the mean of its members.
std::vector<Instance> constrained_greedy(const std::vector<ObjectView>& views,
                                         double epsilon,
                                         const TrackPartition* tracks = nullptr);

/// Density clustering on 3D centers; noise points become singleton instances.
std::vector<Instance> dbscan(const std::vector<ObjectView>& views, double eps,
                             int min_points);

/// Per category: sort by member count descending (ties by earliest first
/// frame, then input order) and assign ids "<category>_1".."<category>_n".
std::vector<Instance> rank_instances(std::vector<Instance> instances);

}  // namespace sra
