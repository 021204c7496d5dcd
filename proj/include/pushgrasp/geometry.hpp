#pragma once

#include <cmath>
#include <optional>
#include <variant>
#include <vector>

namespace pg {

struct Vec2 {
    double x{0.0};
    double y{0.0};

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(Vec2 r) const { return {x + r.x, y + r.y}; }
    constexpr Vec2 operator-(Vec2 r) const { return {x - r.x, y - r.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(Vec2 r) { x += r.x; y += r.y; return *this; }
    Vec2& operator-=(Vec2 r) { x -= r.x; y -= r.y; return *this; }

    constexpr double dot(Vec2 r) const { return x * r.x + y * r.y; }
    // z-component of the 3D cross product; positive when r is CCW from *this.
    constexpr double cross(Vec2 r) const { return x * r.y - y * r.x; }
    double norm() const { return std::sqrt(x * x + y * y); }
    constexpr double norm_sq() const { return x * x + y * y; }
    constexpr Vec2 perp() const { return {-y, x}; }

    Vec2 normalized(double eps = 1e-15) const {
        double n = norm();
        if (n <= eps) return {0.0, 0.0};
        return {x / n, y / n};
    }
};

inline constexpr Vec2 operator*(double s, Vec2 v) { return {v.x * s, v.y * s}; }

inline Vec2 rotate(Vec2 v, double theta) {
    double c = std::cos(theta), s = std::sin(theta);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Angle wrapped to [-pi, pi).
double normalize_angle(double theta);

/// Rigid planar transform: rotation by theta about the origin, then translation.
struct Pose2 {
    double x{0.0};
    double y{0.0};
    double theta{0.0};

    Pose2() = default;
    Pose2(double x_, double y_, double theta_) : x(x_), y(y_), theta(normalize_angle(theta_)) {}

    Vec2 translation() const { return {x, y}; }
};

Vec2 transform_point(const Pose2& pose, Vec2 point);
Vec2 inverse_transform_point(const Pose2& pose, Vec2 point);
Pose2 compose(const Pose2& a, const Pose2& b);
Pose2 inverse(const Pose2& pose);

struct Disc {
    double radius{0.0};
};

/// Vertices in counter-clockwise order, body frame.
struct ConvexPolygon {
    std::vector<Vec2> vertices;
};

using Shape = std::variant<Disc, ConvexPolygon>;

/// radius > 0 for discs; >= 3 distinct vertices, convex, CCW for polygons.
bool shape_valid(const Shape& shape);
/// Throws std::invalid_argument when shape_valid fails.
void require_valid_shape(const Shape& shape);

ConvexPolygon make_box(double width, double height);
ConvexPolygon make_regular_polygon(int sides, double circumradius);

double shape_area(const Shape& shape);
Vec2 shape_centroid(const Shape& shape);       // body frame
double shape_bounding_radius(const Shape& shape);  // about the body-frame centroid
/// Squared radius of gyration about the centroid (second polar moment / area).
double shape_gyration_radius_sq(const Shape& shape);

/// Farthest point of the posed shape along a world-frame direction.
Vec2 support_point(const Shape& shape, const Pose2& pose, Vec2 dir);

/// Closed membership: boundary counts as inside.
bool point_in_shape(const Shape& shape, const Pose2& pose, Vec2 point);

/// True iff the interiors intersect; touching boundaries do not count.
bool shapes_overlap(const Shape& a, const Pose2& pa, const Shape& b, const Pose2& pb);

struct Penetration {
    double depth{0.0};  // > 0
    Vec2 direction;     // unit vector; translating b by depth*direction separates the pair
};

std::optional<Penetration> penetration(const Shape& a, const Pose2& pa,
                                       const Shape& b, const Pose2& pb);

}  // namespace pg
