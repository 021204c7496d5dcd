#include "pushgrasp/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace pg {

double normalize_angle(double theta) {
    if (theta >= -M_PI && theta < M_PI) return theta;  // bit-exact for in-range values
    double t = std::fmod(theta + M_PI, 2.0 * M_PI);
    if (t < 0.0) t += 2.0 * M_PI;
    return t - M_PI;
}

Vec2 transform_point(const Pose2& pose, Vec2 point) {
    return rotate(point, pose.theta) + pose.translation();
}

Vec2 inverse_transform_point(const Pose2& pose, Vec2 point) {
    return rotate(point - pose.translation(), -pose.theta);
}

Pose2 compose(const Pose2& a, const Pose2& b) {
    Vec2 t = transform_point(a, b.translation());
    return {t.x, t.y, a.theta + b.theta};
}

Pose2 inverse(const Pose2& pose) {
    Vec2 t = rotate(-pose.translation(), -pose.theta);
    return {t.x, t.y, -pose.theta};
}

bool shape_valid(const Shape& shape) {
    if (const auto* disc = std::get_if<Disc>(&shape)) {
        return disc->radius > 0.0 && std::isfinite(disc->radius);
    }
    const auto& poly = std::get<ConvexPolygon>(shape);
    const auto& v = poly.vertices;
    size_t n = v.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i) {
        if (!std::isfinite(v[i].x) || !std::isfinite(v[i].y)) return false;
        if ((v[(i + 1) % n] - v[i]).norm_sq() < 1e-18) return false;  // repeated vertex
    }
    for (size_t i = 0; i < n; ++i) {
        Vec2 e1 = v[(i + 1) % n] - v[i];
        Vec2 e2 = v[(i + 2) % n] - v[(i + 1) % n];
        if (e1.cross(e2) < 0.0) return false;  // CW turn
    }
    return true;
}

void require_valid_shape(const Shape& shape) {
    if (!shape_valid(shape)) throw std::invalid_argument("invalid shape");
}

ConvexPolygon make_box(double width, double height) {
    double hw = width / 2.0, hh = height / 2.0;
    return ConvexPolygon{{{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}}};
}

ConvexPolygon make_regular_polygon(int sides, double circumradius) {
    ConvexPolygon poly;
    poly.vertices.reserve(static_cast<size_t>(sides));
    for (int i = 0; i < sides; ++i) {
        double a = 2.0 * M_PI * i / sides;
        poly.vertices.push_back({circumradius * std::cos(a), circumradius * std::sin(a)});
    }
    return poly;
}

namespace {

double polygon_area(const std::vector<Vec2>& v) {
    double a = 0.0;
    size_t n = v.size();
    for (size_t i = 0; i < n; ++i) a += v[i].cross(v[(i + 1) % n]);
    return 0.5 * a;
}

Vec2 polygon_centroid(const std::vector<Vec2>& v) {
    double a = polygon_area(v);
    size_t n = v.size();
    Vec2 c{0.0, 0.0};
    for (size_t i = 0; i < n; ++i) {
        double w = v[i].cross(v[(i + 1) % n]);
        c += (v[i] + v[(i + 1) % n]) * w;
    }
    return c * (1.0 / (6.0 * a));
}

// Second polar moment of area about the origin.
double polygon_polar_moment(const std::vector<Vec2>& v) {
    size_t n = v.size();
    double ix = 0.0, iy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const Vec2& p = v[i];
        const Vec2& q = v[(i + 1) % n];
        double w = p.cross(q);
        ix += (p.y * p.y + p.y * q.y + q.y * q.y) * w;
        iy += (p.x * p.x + p.x * q.x + q.x * q.x) * w;
    }
    return (ix + iy) / 12.0;
}

Vec2 closest_point_on_segment(Vec2 a, Vec2 b, Vec2 p) {
    Vec2 ab = b - a;
    double t = (p - a).dot(ab) / ab.norm_sq();
    t = std::clamp(t, 0.0, 1.0);
    return a + ab * t;
}

std::vector<Vec2> world_vertices(const ConvexPolygon& poly, const Pose2& pose) {
    std::vector<Vec2> out;
    out.reserve(poly.vertices.size());
    for (Vec2 v : poly.vertices) out.push_back(transform_point(pose, v));
    return out;
}

struct Projection {
    double lo, hi;
};

Projection project(const std::vector<Vec2>& verts, Vec2 axis) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Vec2 v : verts) {
        double d = v.dot(axis);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return {lo, hi};
}

bool point_in_world_polygon(const std::vector<Vec2>& verts, Vec2 p, double tol) {
    size_t n = verts.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 e = verts[(i + 1) % n] - verts[i];
        if (e.cross(p - verts[i]) < -tol) return false;
    }
    return true;
}

// SAT over the edge normals of both polygons; exact for convex pairs. Per
// axis the minimal translation of b is min(push_right, push_left), which
// stays correct when one projection contains the other.
std::optional<Penetration> polygon_polygon_penetration(const std::vector<Vec2>& va,
                                                       const std::vector<Vec2>& vb) {
    double best = std::numeric_limits<double>::infinity();
    Vec2 best_axis;
    auto consider = [&](const std::vector<Vec2>& edges_of) -> bool {
        size_t n = edges_of.size();
        for (size_t i = 0; i < n; ++i) {
            Vec2 e = edges_of[(i + 1) % n] - edges_of[i];
            Vec2 axis = Vec2{e.y, -e.x}.normalized();
            Projection pa = project(va, axis);
            Projection pb = project(vb, axis);
            double push_right = pa.hi - pb.lo;  // translate b along +axis
            double push_left = pb.hi - pa.lo;   // translate b along -axis
            if (push_right <= 0.0 || push_left <= 0.0) return false;  // separating axis
            if (push_right < best) {
                best = push_right;
                best_axis = axis;
            }
            if (push_left < best) {
                best = push_left;
                best_axis = -axis;
            }
        }
        return true;
    };
    if (!consider(va) || !consider(vb)) return std::nullopt;
    return Penetration{best, best_axis};
}

// Direction moves the disc away from the polygon.
std::optional<Penetration> polygon_disc_penetration(const std::vector<Vec2>& verts,
                                                    Vec2 center, double radius) {
    if (point_in_world_polygon(verts, center, 0.0)) {
        // Center inside: push out through the nearest edge.
        double best = std::numeric_limits<double>::infinity();
        Vec2 best_normal;
        size_t n = verts.size();
        for (size_t i = 0; i < n; ++i) {
            Vec2 e = verts[(i + 1) % n] - verts[i];
            Vec2 outward = Vec2{e.y, -e.x}.normalized();
            double dist = (center - verts[i]).dot(-outward);  // distance to edge line from inside
            if (dist < best) {
                best = dist;
                best_normal = outward;
            }
        }
        return Penetration{best + radius, best_normal};
    }
    double best_sq = std::numeric_limits<double>::infinity();
    Vec2 closest;
    size_t n = verts.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 c = closest_point_on_segment(verts[i], verts[(i + 1) % n], center);
        double d = (center - c).norm_sq();
        if (d < best_sq) {
            best_sq = d;
            closest = c;
        }
    }
    double dist = std::sqrt(best_sq);
    if (dist >= radius) return std::nullopt;
    Vec2 dir = dist > 1e-15 ? (center - closest) * (1.0 / dist) : Vec2{1.0, 0.0};
    return Penetration{radius - dist, dir};
}

}  // namespace

double shape_area(const Shape& shape) {
    if (const auto* disc = std::get_if<Disc>(&shape)) return M_PI * disc->radius * disc->radius;
    return polygon_area(std::get<ConvexPolygon>(shape).vertices);
}

Vec2 shape_centroid(const Shape& shape) {
    if (std::holds_alternative<Disc>(shape)) return {0.0, 0.0};
    return polygon_centroid(std::get<ConvexPolygon>(shape).vertices);
}

double shape_bounding_radius(const Shape& shape) {
    if (const auto* disc = std::get_if<Disc>(&shape)) return disc->radius;
    const auto& v = std::get<ConvexPolygon>(shape).vertices;
    Vec2 c = polygon_centroid(v);
    double r = 0.0;
    for (Vec2 p : v) r = std::max(r, (p - c).norm());
    return r;
}

double shape_gyration_radius_sq(const Shape& shape) {
    if (const auto* disc = std::get_if<Disc>(&shape)) return disc->radius * disc->radius / 2.0;
    const auto& v = std::get<ConvexPolygon>(shape).vertices;
    double area = polygon_area(v);
    Vec2 c = polygon_centroid(v);
    double j = polygon_polar_moment(v) - area * c.norm_sq();
    return j / area;
}

Vec2 support_point(const Shape& shape, const Pose2& pose, Vec2 dir) {
    if (const auto* disc = std::get_if<Disc>(&shape)) {
        return pose.translation() + dir.normalized() * disc->radius;
    }
    const auto& verts = std::get<ConvexPolygon>(shape).vertices;
    Vec2 best = transform_point(pose, verts[0]);
    double best_d = best.dot(dir);
    for (size_t i = 1; i < verts.size(); ++i) {
        Vec2 w = transform_point(pose, verts[i]);
        double d = w.dot(dir);
        if (d > best_d) {
            best_d = d;
            best = w;
        }
    }
    return best;
}

bool point_in_shape(const Shape& shape, const Pose2& pose, Vec2 point) {
    Vec2 local = inverse_transform_point(pose, point);
    if (const auto* disc = std::get_if<Disc>(&shape)) {
        return local.norm_sq() <= disc->radius * disc->radius;
    }
    const auto& v = std::get<ConvexPolygon>(shape).vertices;
    size_t n = v.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 e = v[(i + 1) % n] - v[i];
        if (e.cross(local - v[i]) < 0.0) return false;
    }
    return true;
}

bool shapes_overlap(const Shape& a, const Pose2& pa, const Shape& b, const Pose2& pb) {
    return penetration(a, pa, b, pb).has_value();
}

std::optional<Penetration> penetration(const Shape& a, const Pose2& pa,
                                       const Shape& b, const Pose2& pb) {
    const auto* da = std::get_if<Disc>(&a);
    const auto* db = std::get_if<Disc>(&b);
    if (da && db) {
        Vec2 delta = pb.translation() - pa.translation();
        double dist = delta.norm();
        double sum = da->radius + db->radius;
        if (dist >= sum) return std::nullopt;
        Vec2 dir = dist > 1e-15 ? delta * (1.0 / dist) : Vec2{1.0, 0.0};
        return Penetration{sum - dist, dir};
    }
    if (da && !db) {
        auto hit = polygon_disc_penetration(world_vertices(std::get<ConvexPolygon>(b), pb),
                                            pa.translation(), da->radius);
        if (!hit) return std::nullopt;
        return Penetration{hit->depth, -hit->direction};  // move the polygon, not the disc
    }
    if (!da && db) {
        return polygon_disc_penetration(world_vertices(std::get<ConvexPolygon>(a), pa),
                                        pb.translation(), db->radius);
    }
    return polygon_polygon_penetration(world_vertices(std::get<ConvexPolygon>(a), pa),
                                       world_vertices(std::get<ConvexPolygon>(b), pb));
}

}  // namespace pg
