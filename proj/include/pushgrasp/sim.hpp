#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pushgrasp/geometry.hpp"

namespace pg {

inline constexpr double kDefaultWorkspaceSide = 0.448;
inline constexpr int kPaletteSize = 9;

/// RGB in [0,1] for each of the 9 block colors.
const std::array<std::array<double, 3>, kPaletteSize>& color_palette();

struct ObjectSpec {
    Shape shape;
    double height{0.03};  // extrusion height, drives the depth channel
    int color_id{0};
    std::string name;
};

/// Throws std::invalid_argument when an invariant fails
/// (height > 0, valid shape, fits a 0.12 m bounding circle).
void require_valid_object(const ObjectSpec& spec);

/// The nine stock toy blocks used for random drops.
const std::vector<ObjectSpec>& default_palette();

struct PlacedObject {
    ObjectSpec spec;
    Pose2 pose;

    Vec2 centroid() const { return transform_point(pose, shape_centroid(spec.shape)); }
};

struct Scene {
    double workspace_side{kDefaultWorkspaceSide};
    std::vector<PlacedObject> objects;
    uint64_t rng_seed{0};

    bool contains(Vec2 p) const {
        return p.x >= 0.0 && p.x <= workspace_side && p.y >= 0.0 && p.y <= workspace_side;
    }
};

bool scenes_equal(const Scene& a, const Scene& b);

int object_count(const Scene& scene);
bool is_cleared(const Scene& scene);

/// Maximum penetration depth over all object pairs; 0 when none overlap.
double max_pair_penetration(const Scene& scene);

struct PushCommand {
    Vec2 start;              // world start of the pusher tip
    int direction_index{0};  // angle = index * 2*pi / num_directions
    int num_directions{16};
    double push_length{0.10};
    double pusher_radius{0.01};

    double angle() const { return 2.0 * M_PI * direction_index / num_directions; }
    Vec2 direction() const { return {std::cos(angle()), std::sin(angle())}; }
};

struct GraspCommand {
    Vec2 center;         // midpoint between the jaws
    int angle_index{0};  // closing axis angle = index * 2*pi / num_angles
    int num_angles{16};
    double max_opening{0.07};
    double min_closure{0.002};
    double jaw_width{0.02};      // extent perpendicular to the closing axis
    double jaw_thickness{0.01};  // extent along the closing axis
    // Antipodal tolerance: each jaw contact needs a surface normal within
    // this angle of the closing axis, or the squeeze is treated as unstable
    // (corner pinches squirt out of frictionless parallel jaws).
    double normal_tolerance{0.5235987755982988};  // 30 degrees

    double angle() const { return 2.0 * M_PI * angle_index / num_angles; }
    Vec2 closing_axis() const { return {std::cos(angle()), std::sin(angle())}; }
};

struct StepOutcome {
    Scene scene_after;
    bool grasp_success{false};
    int objects_removed{0};
    int objects_expelled{0};
    bool contact_made{false};
};

/// Drop n palette objects at uniformly random non-overlapping poses.
/// Throws std::runtime_error after 10,000 failed placement attempts.
Scene spawn_random(int n, const std::vector<ObjectSpec>& palette, uint64_t seed,
                   double workspace_side = kDefaultWorkspaceSide);

/// Sweep the pusher disc along a straight segment, resolving contacts
/// quasi-statically. Objects whose centroid leaves the workspace are expelled.
StepOutcome step_push(const Scene& scene, const PushCommand& cmd);

/// Geometric parallel-jaw grasp test; removes the grasped object on success.
StepOutcome step_grasp(const Scene& scene, const GraspCommand& cmd);

/// Per-jaw rectangles (as posed boxes) at a given gap between the inner faces.
struct JawPair {
    Shape shape;  // one jaw footprint, body frame
    Pose2 plus;
    Pose2 minus;
};
JawPair jaw_rectangles(const GraspCommand& cmd, double gap);

/// Line-oriented text scenario format:
///   header  "pushgrasp-scenario 1 <workspace_side> <seed>"
///   record  "<name> disc <r> <x> <y> <theta> <color_id> <height>"
///   record  "<name> poly <n> <vx1> <vy1> ... <x> <y> <theta> <color_id> <height>"
/// '#' starts a comment. Throws std::runtime_error with a line number on
/// malformed input.
Scene load_scenario(const std::string& text);
std::string save_scenario(const Scene& scene);

}  // namespace pg
