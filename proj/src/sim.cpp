#include "pushgrasp/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pushgrasp/rng.hpp"

namespace pg {

namespace {

constexpr double kSubstep = 0.002;           // pusher travel per substep
constexpr int kResolveIters = 25;            // resolution iterations per substep
constexpr int kSettleIters = 500;            // post-sweep settle budget
constexpr double kSlack = 1e-9;              // extra separation after resolution
constexpr double kMaxSpin = 0.2;             // rad per contact resolution
constexpr double kMaxBoundingDiameter = 0.12;
constexpr double kMinContactPatch = 0.002;   // shortest face engagement that can hold

}  // namespace

const std::array<std::array<double, 3>, kPaletteSize>& color_palette() {
    static const std::array<std::array<double, 3>, kPaletteSize> palette = {{
        {0.85, 0.10, 0.10},  // red
        {0.10, 0.65, 0.15},  // green
        {0.15, 0.25, 0.85},  // blue
        {0.90, 0.80, 0.10},  // yellow
        {0.90, 0.50, 0.10},  // orange
        {0.55, 0.15, 0.70},  // purple
        {0.10, 0.75, 0.75},  // cyan
        {0.85, 0.20, 0.60},  // magenta
        {0.55, 0.35, 0.15},  // brown
    }};
    return palette;
}

void require_valid_object(const ObjectSpec& spec) {
    require_valid_shape(spec.shape);
    if (!(spec.height > 0.0) || !std::isfinite(spec.height))
        throw std::invalid_argument("object height must be > 0");
    if (spec.color_id < 0 || spec.color_id >= kPaletteSize)
        throw std::invalid_argument("color_id out of range");
    if (2.0 * shape_bounding_radius(spec.shape) > kMaxBoundingDiameter + 1e-12)
        throw std::invalid_argument("shape exceeds the 0.12 m bounding circle");
}

const std::vector<ObjectSpec>& default_palette() {
    static const std::vector<ObjectSpec> palette = [] {
        std::vector<ObjectSpec> p;
        p.push_back({Disc{0.016}, 0.030, 0, "disc_s"});
        p.push_back({Disc{0.020}, 0.024, 1, "disc_m"});
        p.push_back({Disc{0.024}, 0.020, 2, "disc_l"});
        p.push_back({make_regular_polygon(8, 0.020), 0.028, 3, "oct_s"});
        p.push_back({make_regular_polygon(8, 0.024), 0.022, 4, "oct_m"});
        p.push_back({make_regular_polygon(6, 0.024), 0.032, 5, "hex"});
        p.push_back({make_box(0.034, 0.034), 0.030, 6, "square"});
        p.push_back({make_box(0.048, 0.024), 0.028, 7, "bar"});
        p.push_back({make_box(0.040, 0.016), 0.018, 8, "slab"});
        for (const auto& spec : p) require_valid_object(spec);
        return p;
    }();
    return palette;
}

bool scenes_equal(const Scene& a, const Scene& b) {
    if (a.workspace_side != b.workspace_side || a.rng_seed != b.rng_seed) return false;
    if (a.objects.size() != b.objects.size()) return false;
    for (size_t i = 0; i < a.objects.size(); ++i) {
        const auto& oa = a.objects[i];
        const auto& ob = b.objects[i];
        if (oa.spec.name != ob.spec.name || oa.spec.color_id != ob.spec.color_id ||
            oa.spec.height != ob.spec.height)
            return false;
        if (oa.pose.x != ob.pose.x || oa.pose.y != ob.pose.y || oa.pose.theta != ob.pose.theta)
            return false;
        if (oa.spec.shape.index() != ob.spec.shape.index()) return false;
        if (const auto* da = std::get_if<Disc>(&oa.spec.shape)) {
            if (da->radius != std::get<Disc>(ob.spec.shape).radius) return false;
        } else {
            const auto& va = std::get<ConvexPolygon>(oa.spec.shape).vertices;
            const auto& vb = std::get<ConvexPolygon>(ob.spec.shape).vertices;
            if (va.size() != vb.size()) return false;
            for (size_t j = 0; j < va.size(); ++j)
                if (va[j].x != vb[j].x || va[j].y != vb[j].y) return false;
        }
    }
    return true;
}

int object_count(const Scene& scene) { return static_cast<int>(scene.objects.size()); }

bool is_cleared(const Scene& scene) { return scene.objects.empty(); }

double max_pair_penetration(const Scene& scene) {
    double worst = 0.0;
    for (size_t i = 0; i < scene.objects.size(); ++i) {
        for (size_t j = i + 1; j < scene.objects.size(); ++j) {
            auto pen = penetration(scene.objects[i].spec.shape, scene.objects[i].pose,
                                   scene.objects[j].spec.shape, scene.objects[j].pose);
            if (pen) worst = std::max(worst, pen->depth);
        }
    }
    return worst;
}

Scene spawn_random(int n, const std::vector<ObjectSpec>& palette, uint64_t seed,
                   double workspace_side) {
    if (n < 0) throw std::invalid_argument("object count must be >= 0");
    if (n > 0 && palette.empty()) throw std::invalid_argument("palette is empty");
    Scene scene;
    scene.workspace_side = workspace_side;
    scene.rng_seed = seed;
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 10000; ++attempt) {
            PlacedObject obj;
            obj.spec = palette[rng.below(palette.size())];
            obj.spec.name += "." + std::to_string(i);
            double x = rng.uniform(0.0, workspace_side);
            double y = rng.uniform(0.0, workspace_side);
            double theta = rng.uniform(-M_PI, M_PI);
            obj.pose = Pose2{x, y, theta};
            if (!scene.contains(obj.centroid())) continue;
            bool clash = false;
            for (const auto& other : scene.objects) {
                if (shapes_overlap(obj.spec.shape, obj.pose, other.spec.shape, other.pose)) {
                    clash = true;
                    break;
                }
            }
            if (!clash) {
                scene.objects.push_back(std::move(obj));
                placed = true;
                break;
            }
        }
        if (!placed)
            throw std::runtime_error("spawn_random: placement failed after 10000 attempts");
    }
    return scene;
}

namespace {

// Rotate a placed object about its world centroid, keeping the centroid fixed.
void rotate_about_centroid(PlacedObject& obj, double dtheta) {
    Vec2 world_c = obj.centroid();
    double new_theta = obj.pose.theta + dtheta;
    Vec2 body_c = shape_centroid(obj.spec.shape);
    Vec2 t = world_c - rotate(body_c, new_theta);
    obj.pose = Pose2{t.x, t.y, new_theta};
}

// Translate by the separation vector and apply the lever-arm spin: a contact
// offset perpendicular to the motion turns displacement into rotation about
// the centroid, scaled by the squared radius of gyration.
void displace_object(PlacedObject& obj, Vec2 delta, Vec2 contact_point, bool spin) {
    Vec2 c = obj.centroid();
    obj.pose.x += delta.x;
    obj.pose.y += delta.y;
    if (!spin) return;
    double gyr_sq = shape_gyration_radius_sq(obj.spec.shape);
    double dtheta = std::clamp((contact_point - c).cross(delta) / gyr_sq, -kMaxSpin, kMaxSpin);
    if (dtheta != 0.0) rotate_about_centroid(obj, dtheta);
}

struct ResolveStats {
    bool pusher_contact = false;
};

// One Gauss-Seidel pass over pusher-object and object-object contacts.
// Returns true when anything moved.
bool resolve_pass(std::vector<PlacedObject>& objects, const Shape* pusher,
                  const Pose2* pusher_pose, const std::vector<double>& radii,
                  double pusher_radius, bool spin, ResolveStats* stats) {
    bool moved = false;
    if (pusher) {
        for (size_t i = 0; i < objects.size(); ++i) {
            auto& obj = objects[i];
            double reach = pusher_radius + radii[i];
            if ((obj.centroid() - pusher_pose->translation()).norm_sq() > reach * reach) continue;
            auto pen = penetration(*pusher, *pusher_pose, obj.spec.shape, obj.pose);
            if (!pen) continue;
            Vec2 delta = pen->direction * (pen->depth + kSlack);
            Vec2 contact = pusher_pose->translation() + pen->direction * pusher_radius;
            displace_object(obj, delta, contact, spin);
            if (stats) stats->pusher_contact = true;
            moved = true;
        }
    }
    for (size_t i = 0; i < objects.size(); ++i) {
        for (size_t j = i + 1; j < objects.size(); ++j) {
            Vec2 ci = objects[i].centroid();
            Vec2 cj = objects[j].centroid();
            double reach = radii[i] + radii[j];
            if ((cj - ci).norm_sq() > reach * reach) continue;
            auto pen = penetration(objects[i].spec.shape, objects[i].pose,
                                   objects[j].spec.shape, objects[j].pose);
            if (!pen) continue;
            double half = 0.5 * (pen->depth + kSlack);
            Vec2 contact = 0.5 * (support_point(objects[i].spec.shape, objects[i].pose,
                                                pen->direction) +
                                  support_point(objects[j].spec.shape, objects[j].pose,
                                                -pen->direction));
            displace_object(objects[j], pen->direction * half, contact, spin);
            displace_object(objects[i], pen->direction * -half, contact, spin);
            moved = true;
        }
    }
    return moved;
}

int expel_outside(Scene& scene) {
    int expelled = 0;
    auto& objs = scene.objects;
    for (size_t i = 0; i < objs.size();) {
        if (!scene.contains(objs[i].centroid())) {
            objs.erase(objs.begin() + static_cast<long>(i));
            ++expelled;
        } else {
            ++i;
        }
    }
    return expelled;
}

}  // namespace

StepOutcome step_push(const Scene& scene, const PushCommand& cmd) {
    StepOutcome out;
    out.scene_after = scene;
    auto& objects = out.scene_after.objects;

    Shape pusher = Disc{cmd.pusher_radius};
    Vec2 dir = cmd.direction();
    int substeps = static_cast<int>(std::ceil(cmd.push_length / kSubstep));

    std::vector<double> radii;
    auto refresh_radii = [&] {
        radii.resize(objects.size());
        for (size_t i = 0; i < objects.size(); ++i)
            radii[i] = shape_bounding_radius(objects[i].spec.shape);
    };
    refresh_radii();

    ResolveStats stats;
    for (int s = 0; s <= substeps; ++s) {
        double t = std::min(s * kSubstep, cmd.push_length);
        Pose2 pusher_pose{cmd.start.x + dir.x * t, cmd.start.y + dir.y * t, 0.0};
        for (int iter = 0; iter < kResolveIters; ++iter) {
            if (!resolve_pass(objects, &pusher, &pusher_pose, radii, cmd.pusher_radius,
                              /*spin=*/true, &stats))
                break;
        }
        if (expel_outside(out.scene_after) > 0) refresh_radii();
    }

    // Settle with the pusher parked at the end of the stroke, translations only.
    Pose2 end_pose{cmd.start.x + dir.x * cmd.push_length, cmd.start.y + dir.y * cmd.push_length,
                   0.0};
    for (int iter = 0; iter < kSettleIters; ++iter) {
        if (!resolve_pass(objects, &pusher, &end_pose, radii, cmd.pusher_radius,
                          /*spin=*/false, &stats))
            break;
        expel_outside(out.scene_after);
        refresh_radii();
    }

    out.objects_expelled = object_count(scene) - object_count(out.scene_after);
    out.contact_made = stats.pusher_contact;
    return out;
}

JawPair jaw_rectangles(const GraspCommand& cmd, double gap) {
    JawPair jaws;
    jaws.shape = make_box(cmd.jaw_thickness, cmd.jaw_width);
    Vec2 u = cmd.closing_axis();
    double d = gap / 2.0 + cmd.jaw_thickness / 2.0;
    Vec2 p = Vec2{cmd.center.x, cmd.center.y} + u * d;
    Vec2 m = Vec2{cmd.center.x, cmd.center.y} - u * d;
    jaws.plus = Pose2{p.x, p.y, cmd.angle()};
    jaws.minus = Pose2{m.x, m.y, cmd.angle()};
    return jaws;
}

namespace {

// Extent of a shape along the closing axis, clipped to the closing corridor
// (band |b| <= w/2, slab |a| <= opening/2) in the grasp frame.
struct AxisExtent {
    bool present = false;
    double lo = 0.0, hi = 0.0;
};

AxisExtent corridor_extent(const Shape& shape, const Pose2& pose, const GraspCommand& cmd) {
    AxisExtent ext;
    Vec2 u = cmd.closing_axis();
    Vec2 v = u.perp();
    Vec2 origin{cmd.center.x, cmd.center.y};
    double half_w = cmd.jaw_width / 2.0;
    double half_open = cmd.max_opening / 2.0;

    double lo, hi;
    if (const auto* disc = std::get_if<Disc>(&shape)) {
        Vec2 rel = pose.translation() - origin;
        double a = rel.dot(u), b = rel.dot(v), r = disc->radius;
        double db = std::abs(b);
        if (db >= half_w + r) return ext;
        double reach = db <= half_w ? r : std::sqrt(r * r - (db - half_w) * (db - half_w));
        lo = a - reach;
        hi = a + reach;
    } else {
        // Clip the polygon to the band, then read the extent off the clipped hull.
        const auto& verts = std::get<ConvexPolygon>(shape).vertices;
        std::vector<Vec2> poly;
        poly.reserve(verts.size());
        for (Vec2 p : verts) {
            Vec2 w = transform_point(pose, p) - origin;
            poly.push_back({w.dot(u), w.dot(v)});  // grasp frame (a, b)
        }
        auto clip = [](std::vector<Vec2>& pts, auto inside, auto intersect) {
            std::vector<Vec2> out;
            size_t n = pts.size();
            for (size_t i = 0; i < n; ++i) {
                Vec2 cur = pts[i], nxt = pts[(i + 1) % n];
                bool ci = inside(cur), ni = inside(nxt);
                if (ci) out.push_back(cur);
                if (ci != ni) out.push_back(intersect(cur, nxt));
            }
            pts = std::move(out);
        };
        auto clip_b = [&](double bound, double sign) {
            clip(
                poly, [&](Vec2 p) { return sign * p.y <= bound; },
                [&](Vec2 p, Vec2 q) {
                    double t = (bound - sign * p.y) / (sign * q.y - sign * p.y);
                    return Vec2{p.x + t * (q.x - p.x), bound * sign};
                });
        };
        clip_b(half_w, 1.0);
        if (poly.empty()) return ext;
        clip_b(half_w, -1.0);
        if (poly.empty()) return ext;
        lo = std::numeric_limits<double>::infinity();
        hi = -lo;
        for (Vec2 p : poly) {
            lo = std::min(lo, p.x);
            hi = std::max(hi, p.x);
        }
    }
    // Slab clip along the closing axis.
    lo = std::max(lo, -half_open);
    hi = std::min(hi, half_open);
    if (lo >= hi) return ext;
    ext.present = true;
    ext.lo = lo;
    ext.hi = hi;
    return ext;
}

// Cosine of the best alignment between the closing direction and a surface
// normal over the contact set of the shape at the given extreme (side = +1
// for the jaw closing from +a, -1 from -a).
double contact_alignment(const Shape& shape, const Pose2& pose, const GraspCommand& cmd,
                         int side, double extreme_a) {
    Vec2 u = cmd.closing_axis();
    Vec2 v = u.perp();
    Vec2 origin{cmd.center.x, cmd.center.y};
    double half_w = cmd.jaw_width / 2.0;
    double dir = static_cast<double>(side);
    const double tol = 1e-9;

    if (const auto* disc = std::get_if<Disc>(&shape)) {
        Vec2 rel = pose.translation() - origin;
        double ac = rel.dot(u), bc = rel.dot(v);
        double contact_b = std::clamp(bc, -half_w, half_w);
        double da = extreme_a - ac;
        double db = contact_b - bc;
        // Normal at the contact point is radial.
        return dir * da / std::max(disc->radius, std::hypot(da, db));
    }

    const auto& verts = std::get<ConvexPolygon>(shape).vertices;
    size_t n = verts.size();
    std::vector<Vec2> frame(n);
    for (size_t i = 0; i < n; ++i) {
        Vec2 w = transform_point(pose, verts[i]) - origin;
        frame[i] = {w.dot(u), w.dot(v)};
    }
    double best = -1.0;
    for (size_t i = 0; i < n; ++i) {
        Vec2 p = frame[i];
        Vec2 q = frame[(i + 1) % n];
        // Clip the edge to the jaw band.
        double t0 = 0.0, t1 = 1.0;
        for (double bound : {half_w, -half_w}) {
            double sign = bound > 0 ? 1.0 : -1.0;
            double f0 = sign * p.y - std::abs(bound);
            double f1 = sign * q.y - std::abs(bound);
            if (f0 > 0 && f1 > 0) {
                t0 = 1.0;
                t1 = 0.0;
                break;
            }
            if (f0 > 0 || f1 > 0) {
                double tc = f0 / (f0 - f1);
                if (f0 > 0)
                    t0 = std::max(t0, tc);
                else
                    t1 = std::min(t1, tc);
            }
        }
        if (t0 > t1) continue;  // edge entirely outside the band
        Vec2 e = q - p;
        if ((t1 - t0) * e.norm() < kMinContactPatch) continue;  // patch too small to hold
        double a0 = p.x + t0 * (q.x - p.x);
        double a1 = p.x + t1 * (q.x - p.x);
        double seg_extreme = side > 0 ? std::max(a0, a1) : std::min(a0, a1);
        if (dir * (seg_extreme - extreme_a) < -tol) continue;  // edge misses the contact
        Vec2 outward = Vec2{e.y, -e.x}.normalized();
        best = std::max(best, dir * outward.x);
    }
    return best;
}

}  // namespace

StepOutcome step_grasp(const Scene& scene, const GraspCommand& cmd) {
    StepOutcome out;
    out.scene_after = scene;
    if (!(cmd.max_opening > cmd.min_closure && cmd.min_closure > 0.0))
        throw std::invalid_argument("grasp opening limits out of order");

    // Collision-free descent: neither jaw may land on an object.
    JawPair jaws = jaw_rectangles(cmd, cmd.max_opening);
    for (const auto& obj : scene.objects) {
        if (shapes_overlap(jaws.shape, jaws.plus, obj.spec.shape, obj.pose) ||
            shapes_overlap(jaws.shape, jaws.minus, obj.spec.shape, obj.pose)) {
            out.contact_made = true;
            return out;
        }
    }

    // Symmetric closing sweep: each jaw first meets the object with the most
    // extreme corridor extent on its side.
    int first_plus = -1, first_minus = -1;
    double best_hi = -std::numeric_limits<double>::infinity();
    double best_lo = std::numeric_limits<double>::infinity();
    bool tie_plus = false, tie_minus = false;
    std::vector<AxisExtent> extents(scene.objects.size());
    for (size_t i = 0; i < scene.objects.size(); ++i) {
        extents[i] = corridor_extent(scene.objects[i].spec.shape, scene.objects[i].pose, cmd);
        if (!extents[i].present) continue;
        out.contact_made = true;
        if (extents[i].hi > best_hi) {
            best_hi = extents[i].hi;
            first_plus = static_cast<int>(i);
            tie_plus = false;
        } else if (extents[i].hi == best_hi) {
            tie_plus = true;
        }
        if (extents[i].lo < best_lo) {
            best_lo = extents[i].lo;
            first_minus = static_cast<int>(i);
            tie_minus = false;
        } else if (extents[i].lo == best_lo) {
            tie_minus = true;
        }
    }
    if (first_plus < 0 || first_plus != first_minus || tie_plus || tie_minus) return out;

    double width = extents[first_plus].hi - extents[first_plus].lo;
    if (width < cmd.min_closure || width > cmd.max_opening) return out;

    // Antipodal stability: both contacts need a surface normal within the
    // tolerance of the closing axis.
    const auto& target = scene.objects[static_cast<size_t>(first_plus)];
    double cos_tol = std::cos(cmd.normal_tolerance) - 1e-12;
    if (contact_alignment(target.spec.shape, target.pose, cmd, +1, extents[first_plus].hi) <
            cos_tol ||
        contact_alignment(target.spec.shape, target.pose, cmd, -1, extents[first_plus].lo) <
            cos_tol)
        return out;

    out.grasp_success = true;
    out.objects_removed = 1;
    out.scene_after.objects.erase(out.scene_after.objects.begin() + first_plus);
    return out;
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
    throw std::runtime_error("scenario parse error at line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::string save_scenario(const Scene& scene) {
    std::ostringstream os;
    os << "pushgrasp-scenario 1 " << fmt_double(scene.workspace_side) << " " << scene.rng_seed
       << "\n";
    os << "# name shape-params x y theta color_id height\n";
    for (const auto& obj : scene.objects) {
        os << obj.spec.name << " ";
        if (const auto* disc = std::get_if<Disc>(&obj.spec.shape)) {
            os << "disc " << fmt_double(disc->radius);
        } else {
            const auto& v = std::get<ConvexPolygon>(obj.spec.shape).vertices;
            os << "poly " << v.size();
            for (Vec2 p : v) os << " " << fmt_double(p.x) << " " << fmt_double(p.y);
        }
        os << " " << fmt_double(obj.pose.x) << " " << fmt_double(obj.pose.y) << " "
           << fmt_double(obj.pose.theta) << " " << obj.spec.color_id << " "
           << fmt_double(obj.spec.height) << "\n";
    }
    return os.str();
}

Scene load_scenario(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    Scene scene;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;  // blank or comment-only line
        if (!header_seen) {
            if (tok != "pushgrasp-scenario") parse_fail(line_no, "missing header");
            int version = 0;
            if (!(ls >> version) || version != 1) parse_fail(line_no, "unsupported version");
            if (!(ls >> scene.workspace_side) || !(scene.workspace_side > 0.0))
                parse_fail(line_no, "bad workspace_side");
            if (!(ls >> scene.rng_seed)) parse_fail(line_no, "bad seed");
            header_seen = true;
            continue;
        }
        PlacedObject obj;
        obj.spec.name = tok;
        std::string kind;
        if (!(ls >> kind)) parse_fail(line_no, "missing shape kind");
        if (kind == "disc") {
            double r;
            if (!(ls >> r)) parse_fail(line_no, "bad disc radius");
            obj.spec.shape = Disc{r};
        } else if (kind == "poly") {
            size_t n;
            if (!(ls >> n) || n < 3 || n > 64) parse_fail(line_no, "bad vertex count");
            ConvexPolygon poly;
            poly.vertices.resize(n);
            for (size_t i = 0; i < n; ++i)
                if (!(ls >> poly.vertices[i].x >> poly.vertices[i].y))
                    parse_fail(line_no, "bad vertex");
            obj.spec.shape = std::move(poly);
        } else {
            parse_fail(line_no, "unknown shape kind '" + kind + "'");
        }
        double x, y, theta;
        int color_id;
        double height;
        if (!(ls >> x >> y >> theta >> color_id >> height))
            parse_fail(line_no, "bad pose/color/height fields");
        std::string extra;
        if (ls >> extra) parse_fail(line_no, "trailing fields");
        obj.pose = Pose2{x, y, theta};
        obj.spec.color_id = color_id;
        obj.spec.height = height;
        try {
            require_valid_object(obj.spec);
        } catch (const std::invalid_argument& e) {
            parse_fail(line_no, e.what());
        }
        scene.objects.push_back(std::move(obj));
    }
    if (!header_seen) parse_fail(line_no == 0 ? 1 : line_no, "empty scenario");
    for (size_t i = 0; i < scene.objects.size(); ++i) {
        if (!scene.contains(scene.objects[i].centroid()))
            throw std::runtime_error("scenario invalid: object " + std::to_string(i) +
                                     " centroid outside workspace");
        for (size_t j = i + 1; j < scene.objects.size(); ++j) {
            if (shapes_overlap(scene.objects[i].spec.shape, scene.objects[i].pose,
                               scene.objects[j].spec.shape, scene.objects[j].pose))
                throw std::runtime_error("scenario invalid: objects " + std::to_string(i) +
                                         " and " + std::to_string(j) + " overlap");
        }
    }
    return scene;
}

}  // namespace pg
