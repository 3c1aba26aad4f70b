#include "sra/relations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sra {

const Instance& InstanceSet::resolve(const std::string& id) const {
    for (const auto& inst : instances)
        if (inst.instance_id == id) return inst;
    for (const auto& inst : instances)
        if (inst.category == id)
            throw RelationsError("'" + id +
                                 "' is a category name; pass a specific instance ID such as '" +
                                 id + "_1'");
    throw RelationsError("unknown instance '" + id + "'");
}

std::string to_string(DirectionQuadrant q) {
    switch (q) {
        case DirectionQuadrant::FrontLeft: return "front-left";
        case DirectionQuadrant::FrontRight: return "front-right";
        case DirectionQuadrant::BackLeft: return "back-left";
        case DirectionQuadrant::BackRight: return "back-right";
    }
    return "front-left";
}

DirectionQuadrant quadrant_from_string(const std::string& s) {
    if (s == "front-left") return DirectionQuadrant::FrontLeft;
    if (s == "front-right") return DirectionQuadrant::FrontRight;
    if (s == "back-left") return DirectionQuadrant::BackLeft;
    if (s == "back-right") return DirectionQuadrant::BackRight;
    throw RelationsError("unknown quadrant '" + s + "'");
}

DirectionQuadrant flip_quadrant(DirectionQuadrant q) {
    switch (q) {
        case DirectionQuadrant::FrontLeft: return DirectionQuadrant::BackRight;
        case DirectionQuadrant::FrontRight: return DirectionQuadrant::BackLeft;
        case DirectionQuadrant::BackLeft: return DirectionQuadrant::FrontRight;
        case DirectionQuadrant::BackRight: return DirectionQuadrant::FrontLeft;
    }
    return DirectionQuadrant::BackRight;
}

DistanceResult calculate_distance(const InstanceSet& set, const std::string& reference_id,
                                  const std::vector<std::string>& target_ids) {
    const Instance& ref = set.resolve(reference_id);
    DistanceResult result;
    result.reference = reference_id;
    for (const auto& tid : target_ids) {
        const Instance& target = set.resolve(tid);
        result.targets.push_back(tid);
        result.distances[tid] = euclidean_distance(ref.center, target.center);
    }
    return result;
}

namespace {

DirectionResult direction_impl(const InstanceSet& set, const std::string& stand_id,
                               const std::string& face_id, const std::string& target_id,
                               bool backward) {
    const Vec3 stand = set.resolve(stand_id).center;
    const Vec3 face = set.resolve(face_id).center;
    const Vec3 target = set.resolve(target_id).center;

    double fx = face.x - stand.x, fy = face.y - stand.y;
    double flen = std::sqrt(fx * fx + fy * fy);
    if (flen <= 1e-9)
        throw RelationsError("stand and face instances coincide in the ground plane");
    fx /= flen;
    fy /= flen;
    if (backward) {
        fx = -fx;
        fy = -fy;
    }
    double rx = fy, ry = -fx;  // right-hand side of forward

    double tx = target.x - stand.x, ty = target.y - stand.y;
    double df = tx * fx + ty * fy;
    double dr = tx * rx + ty * ry;

    DirectionQuadrant q = df >= 0.0
                              ? (dr > 0.0 ? DirectionQuadrant::FrontRight
                                          : DirectionQuadrant::FrontLeft)
                              : (dr > 0.0 ? DirectionQuadrant::BackRight
                                          : DirectionQuadrant::BackLeft);
    return {q, {stand, face, target, df, dr}};
}

}  // namespace

DirectionResult calculate_direction(const InstanceSet& set, const std::string& stand_id,
                                    const std::string& face_id,
                                    const std::string& target_id) {
    return direction_impl(set, stand_id, face_id, target_id, false);
}

DirectionResult calculate_direction_backward(const InstanceSet& set,
                                             const std::string& stand_id,
                                             const std::string& face_id,
                                             const std::string& target_id) {
    return direction_impl(set, stand_id, face_id, target_id, true);
}

HeightRelation compare_height(const InstanceSet& set, const std::string& id_a,
                              const std::string& id_b, double epsilon_z) {
    if (!set.aligned)
        throw RelationsError("compare_height requires an aligned scene");
    double z_a = set.resolve(id_a).center.z;
    double z_b = set.resolve(id_b).center.z;
    HeightRelationKind kind = HeightRelationKind::Equal;
    if (z_a - z_b > epsilon_z)
        kind = HeightRelationKind::AHigher;
    else if (z_b - z_a > epsilon_z)
        kind = HeightRelationKind::BHigher;
    return {kind, z_a, z_b};
}

ObstructionResult calculate_obstruction(const InstanceSet& set,
                                        const std::string& source_id,
                                        const std::string& destination_id,
                                        const std::string& obstruction_id,
                                        double threshold) {
    const Vec3 src = set.resolve(source_id).center;
    const Vec3 dst = set.resolve(destination_id).center;
    const Vec3 obs = set.resolve(obstruction_id).center;

    auto proj = point_segment_projection(obs, src, dst);
    ObstructionResult result;
    result.evidence = {src, dst, obs, proj.t, proj.closest, proj.distance, threshold};
    result.is_obstruction =
        proj.distance < threshold && proj.t > 0.0 && proj.t < 1.0;
    return result;
}

std::vector<std::string> appearance_order(
    const std::map<std::string, std::vector<ObjectView>>& views_by_category) {
    struct Entry {
        int first_frame;
        std::string category;
    };
    std::vector<Entry> entries;
    for (const auto& [category, views] : views_by_category) {
        if (views.empty())
            throw RelationsError("category '" + category + "' has no views");
        int first = std::numeric_limits<int>::max();
        for (const auto& v : views) first = std::min(first, v.frame);
        entries.push_back({first, category});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.first_frame != b.first_frame) return a.first_frame < b.first_frame;
        return a.category < b.category;
    });
    std::vector<std::string> order;
    for (const auto& e : entries) order.push_back(e.category);
    return order;
}

std::size_t count_instances(const InstanceSet& set, const std::string& category) {
    return static_cast<std::size_t>(
        std::count_if(set.instances.begin(), set.instances.end(),
                      [&](const Instance& i) { return i.category == category; }));
}

}  // namespace sra
