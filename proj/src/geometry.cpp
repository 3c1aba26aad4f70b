#include "sra/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

namespace sra {

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

Vec3 Vec3::normalized() const {
    double n = norm();
    if (n < 1e-15) throw GeometryError("cannot normalize a near-zero vector");
    return *this / n;
}

double euclidean_distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

std::array<Vec3, 8> BBox3D::corners() const {
    return {Vec3{min.x, min.y, min.z}, Vec3{max.x, min.y, min.z},
            Vec3{min.x, max.y, min.z}, Vec3{max.x, max.y, min.z},
            Vec3{min.x, min.y, max.z}, Vec3{max.x, min.y, max.z},
            Vec3{min.x, max.y, max.z}, Vec3{max.x, max.y, max.z}};
}

bool BBox3D::contains(const Vec3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y &&
           p.z >= min.z && p.z <= max.z;
}

bool BBox3D::intersects(const BBox3D& o) const {
    return min.x <= o.max.x && o.min.x <= max.x && min.y <= o.max.y &&
           o.min.y <= max.y && min.z <= o.max.z && o.min.z <= max.z;
}

double box_closest_distance(const BBox3D& a, const BBox3D& b) {
    auto gap = [](double amin, double amax, double bmin, double bmax) {
        return std::max(0.0, std::max(bmin - amax, amin - bmax));
    };
    double gx = gap(a.min.x, a.max.x, b.min.x, b.max.x);
    double gy = gap(a.min.y, a.max.y, b.min.y, b.max.y);
    double gz = gap(a.min.z, a.max.z, b.min.z, b.max.z);
    return std::sqrt(gx * gx + gy * gy + gz * gz);
}

SegmentProjection point_segment_projection(const Vec3& p, const Vec3& s, const Vec3& d) {
    Vec3 dir = d - s;
    double len2 = dir.dot(dir);
    if (len2 < 1e-24) throw GeometryError("degenerate segment: endpoints coincide");
    double t = std::clamp((p - s).dot(dir) / len2, 0.0, 1.0);
    Vec3 closest = s + dir * t;
    return {t, closest, euclidean_distance(p, closest)};
}

Vec3 CameraPose::world_to_camera(const Vec3& p) const {
    Vec3 q = p - position;
    const auto& r = rotation;
    return {r[0] * q.x + r[1] * q.y + r[2] * q.z,
            r[3] * q.x + r[4] * q.y + r[5] * q.z,
            r[6] * q.x + r[7] * q.y + r[8] * q.z};
}

Vec3 CameraPose::camera_to_world(const Vec3& p) const {
    const auto& r = rotation;  // orthonormal, so inverse = transpose
    Vec3 q{r[0] * p.x + r[3] * p.y + r[6] * p.z,
           r[1] * p.x + r[4] * p.y + r[7] * p.z,
           r[2] * p.x + r[5] * p.y + r[8] * p.z};
    return q + position;
}

std::optional<PixelDepth> project_point(const Vec3& p, const CameraPose& cam) {
    Vec3 pc = cam.world_to_camera(p);
    if (pc.z <= 0.0) return std::nullopt;
    return PixelDepth{cam.focal_x * pc.x / pc.z + cam.principal_x,
                      cam.focal_y * pc.y / pc.z + cam.principal_y, pc.z};
}

Vec3 back_project(double u, double v, double depth, const CameraPose& cam) {
    Vec3 pc{(u - cam.principal_x) / cam.focal_x * depth,
            (v - cam.principal_y) / cam.focal_y * depth, depth};
    return cam.camera_to_world(pc);
}

Vec3 RigidTransform::apply(const Vec3& p) const {
    const auto& r = rotation;
    return Vec3{r[0] * p.x + r[1] * p.y + r[2] * p.z,
                r[3] * p.x + r[4] * p.y + r[5] * p.z,
                r[6] * p.x + r[7] * p.y + r[8] * p.z} +
           translation;
}

namespace {

std::optional<Plane> plane_from_triple(const Vec3& a, const Vec3& b, const Vec3& c) {
    Vec3 n = (b - a).cross(c - a);
    double len = n.norm();
    if (len < 1e-12) return std::nullopt;
    n = n / len;
    return Plane{n, n.dot(a)};
}

// TLS refit: smallest-eigenvector of the centered covariance.
Plane refit_plane(const std::vector<Vec3>& points, const std::vector<std::size_t>& idx,
                  const Vec3& prior_normal) {
    Vec3 centroid{};
    for (auto i : idx) centroid = centroid + points[i];
    centroid = centroid / static_cast<double>(idx.size());

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (auto i : idx) {
        Vec3 q = points[i] - centroid;
        Eigen::Vector3d v(q.x, q.y, q.z);
        cov += v * v.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    Eigen::Vector3d n = solver.eigenvectors().col(0);
    Vec3 normal{n.x(), n.y(), n.z()};
    normal = normal.normalized();
    if (normal.dot(prior_normal) < 0.0) normal = normal * -1.0;
    return {normal, normal.dot(centroid)};
}

}  // namespace

RansacResult fit_plane_ransac(const std::vector<Vec3>& points, int iterations,
                              double inlier_threshold, std::uint64_t seed) {
    if (points.size() < 3) throw GeometryError("insufficient points for plane fit (need >= 3)");
    if (iterations < 1) throw GeometryError("iterations must be >= 1");

    const std::size_t n = points.size();

    // Sample triples up front from a single RNG stream so the parallel
    // evaluation below stays bitwise deterministic.
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::array<std::size_t, 3>> triples(static_cast<std::size_t>(iterations));
    for (auto& t : triples) {
        t[0] = pick(rng);
        do { t[1] = pick(rng); } while (t[1] == t[0]);
        do { t[2] = pick(rng); } while (t[2] == t[0] || t[2] == t[1]);
    }

    std::vector<long> counts(triples.size(), -1);
    std::vector<Plane> candidates(triples.size());

#pragma omp parallel for schedule(static)
    for (long it = 0; it < static_cast<long>(triples.size()); ++it) {
        const auto& t = triples[static_cast<std::size_t>(it)];
        auto plane = plane_from_triple(points[t[0]], points[t[1]], points[t[2]]);
        if (!plane) continue;
        long count = 0;
        for (const auto& p : points)
            if (std::abs(plane->signed_distance(p)) <= inlier_threshold) ++count;
        counts[static_cast<std::size_t>(it)] = count;
        candidates[static_cast<std::size_t>(it)] = *plane;
    }

    long best_it = -1;
    long best_count = -1;
    for (std::size_t it = 0; it < triples.size(); ++it) {
        if (counts[it] > best_count) {
            best_count = counts[it];
            best_it = static_cast<long>(it);
        }
    }
    if (best_it < 0) throw GeometryError("degenerate input: all sampled triples collinear");

    const Plane& best = candidates[static_cast<std::size_t>(best_it)];
    RansacResult result;
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(best.signed_distance(points[i])) <= inlier_threshold)
            result.inlier_indices.push_back(i);
    result.plane = refit_plane(points, result.inlier_indices, best.normal);
    return result;
}

Plane average_planes(const std::vector<Plane>& planes) {
    if (planes.empty()) throw GeometryError("average_planes: empty list");
    Vec3 sum{};
    double offset_sum = 0.0;
    const Vec3& ref = planes.front().normal;
    for (const auto& pl : planes) {
        double s = pl.normal.dot(ref) < 0.0 ? -1.0 : 1.0;
        sum = sum + pl.normal * s;
        offset_sum += pl.offset * s;
    }
    return {sum.normalized(), offset_sum / static_cast<double>(planes.size())};
}

RigidTransform align_scene(const Plane& plane, const std::vector<Vec3>& points) {
    Vec3 n = plane.normal;
    double offset = plane.offset;

    // Points sitting on the plane (the floor itself) carry no orientation
    // information; only strictly off-plane points vote on which side is up.
    std::size_t above = 0;
    std::size_t below = 0;
    for (const auto& p : points) {
        double sd = n.dot(p) - offset;
        if (sd > 1e-9)
            ++above;
        else if (sd < -1e-9)
            ++below;
    }
    if (below > above) {
        n = n * -1.0;
        offset = -offset;
    }

    const Vec3 zhat{0.0, 0.0, 1.0};
    RigidTransform tf;
    double c = n.dot(zhat);
    Vec3 axis = n.cross(zhat);
    double s = axis.norm();
    if (s < 1e-12) {
        if (c > 0.0) {
            // already +z: identity rotation
        } else {
            // antipode: 180 degrees about x
            tf.rotation = {1, 0, 0, 0, -1, 0, 0, 0, -1};
        }
    } else {
        // Rodrigues for the minimal rotation taking n to z.
        axis = axis / s;
        double one_c = 1.0 - c;
        double ax = axis.x, ay = axis.y, az = axis.z;
        tf.rotation = {c + ax * ax * one_c,      ax * ay * one_c - az * s, ax * az * one_c + ay * s,
                       ay * ax * one_c + az * s, c + ay * ay * one_c,      ay * az * one_c - ax * s,
                       az * ax * one_c - ay * s, az * ay * one_c + ax * s, c + az * az * one_c};
    }
    // Plane points satisfy n.p = offset and map to z = offset; shift to z = 0.
    tf.translation = {0.0, 0.0, -offset};
    return tf;
}

}  // namespace sra
