#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace sra {

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const;
    Vec3 normalized() const;

    bool operator==(const Vec3&) const = default;
};

double euclidean_distance(const Vec3& a, const Vec3& b);

/// 2D box in pixels, min/max corners.
struct BBox2D {
    double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

    bool valid() const { return x_min <= x_max && y_min <= y_max; }
    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    Vec3 center() const { return {(x_min + x_max) / 2.0, (y_min + y_max) / 2.0, 0.0}; }
    bool operator==(const BBox2D&) const = default;
};

/// Axis-aligned 3D box in the aligned scene frame.
struct BBox3D {
    Vec3 min, max;

    bool valid() const {
        return min.x <= max.x && min.y <= max.y && min.z <= max.z;
    }
    Vec3 center() const { return (min + max) / 2.0; }
    std::array<Vec3, 8> corners() const;
    bool contains(const Vec3& p) const;
    bool intersects(const BBox3D& o) const;
    bool operator==(const BBox3D&) const = default;
};

/// Minimum distance between two axis-aligned boxes; 0 when they overlap.
double box_closest_distance(const BBox3D& a, const BBox3D& b);

/// plane = { p : normal . p = offset }, with ||normal|| = 1.
struct Plane {
    Vec3 normal{0.0, 0.0, 1.0};
    double offset = 0.0;

    double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
};

struct SegmentProjection {
    double t = 0.0;      // clamped to [0,1]
    Vec3 closest;
    double distance = 0.0;
};

/// Closest point on segment [s,d] to p. Throws GeometryError on a degenerate
/// segment (||d-s|| < 1e-12).
SegmentProjection point_segment_projection(const Vec3& p, const Vec3& s, const Vec3& d);

struct CameraPose {
    Vec3 position;
    std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};  // world->camera, row-major
    double focal_x = 1.0, focal_y = 1.0;
    double principal_x = 0.0, principal_y = 0.0;
    int width = 0, height = 0;

    Vec3 world_to_camera(const Vec3& p) const;
    Vec3 camera_to_world(const Vec3& p) const;
};

struct PixelDepth {
    double u = 0.0, v = 0.0;
    double depth = 0.0;
};

/// Pinhole projection; absent when the point is at or behind the camera.
std::optional<PixelDepth> project_point(const Vec3& p, const CameraPose& cam);

/// Inverse of project_point at a known depth.
Vec3 back_project(double u, double v, double depth, const CameraPose& cam);

struct RigidTransform {
    std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major
    Vec3 translation;

    Vec3 apply(const Vec3& p) const;
};

struct RansacResult {
    Plane plane;
    std::vector<std::size_t> inlier_indices;
};

/// RANSAC plane fit followed by a total-least-squares refit on the winning
/// inlier set. Deterministic for a fixed seed.
RansacResult fit_plane_ransac(const std::vector<Vec3>& points, int iterations,
                              double inlier_threshold, std::uint64_t seed);

/// Mean of sign-aligned normals (flipped toward the first plane) renormalized,
/// with offsets flipped together with their normals.
Plane average_planes(const std::vector<Plane>& planes);

/// Transform mapping the plane to z=0 with +z pointing into the half-space
/// holding the majority of points.
RigidTransform align_scene(const Plane& plane, const std::vector<Vec3>& points);

inline constexpr int kRansacDefaultIterations = 1000;
inline constexpr double kRansacDefaultThreshold = 0.02;

}  // namespace sra
