#include "pushgrasp/action.hpp"

#include <cmath>
#include <stdexcept>

namespace pg {

ActionSpace ActionSpace::make(int k, int resolution) {
    ActionSpace space;
    space.k = k;
    space.resolution = resolution;
    space.valid.assign(static_cast<size_t>(k),
                       std::vector<uint8_t>(static_cast<size_t>(resolution) * resolution, 0));
    double c = resolution / 2.0;
    for (int r = 0; r < k; ++r) {
        double theta = 2.0 * M_PI * r / k;
        double ct = std::cos(theta), st = std::sin(theta);
        for (int row = 0; row < resolution; ++row) {
            for (int col = 0; col < resolution; ++col) {
                double dx = (col + 0.5) - c;
                double dy = (row + 0.5) - c;
                double ox = ct * dx + st * dy + c;   // R(-theta)
                double oy = -st * dx + ct * dy + c;
                if (ox >= 0.0 && ox <= resolution && oy >= 0.0 && oy <= resolution) {
                    space.valid[static_cast<size_t>(r)]
                               [static_cast<size_t>(row) * resolution + col] = 1;
                    space.valid_list.push_back({r, row, col});
                }
            }
        }
    }
    return space;
}

Action select_action(const QMaps& maps, double epsilon, Rng& rng, const ActionSpace& space) {
    if (space.valid_list.empty()) throw std::runtime_error("select_action: empty action mask");
    if (epsilon > 0.0 && rng.uniform() < epsilon) {
        size_t n = space.valid_list.size();
        uint64_t draw = rng.below(maps.has_push ? 2 * n : n);
        Action a;
        a.primitive = (maps.has_push && draw < n) ? Primitive::Push : Primitive::Grasp;
        const auto& entry = space.valid_list[static_cast<size_t>(draw % n)];
        a.rotation = entry[0];
        a.row = entry[1];
        a.col = entry[2];
        return a;
    }

    Action best;
    double best_q = -std::numeric_limits<double>::infinity();
    bool found = false;
    auto scan = [&](const Tensor& plane, Primitive prim) {
        int h = maps.resolution;
        for (int r = 0; r < maps.k; ++r) {
            const auto& mask = space.valid[static_cast<size_t>(r)];
            for (int row = 0; row < h; ++row) {
                for (int col = 0; col < h; ++col) {
                    if (!mask[static_cast<size_t>(row) * h + col]) continue;
                    double q = plane.at3(r, row, col);
                    if (!found || q > best_q) {
                        best_q = q;
                        best = Action{prim, r, row, col};
                        found = true;
                    }
                }
            }
        }
    };
    if (maps.has_push) scan(maps.push, Primitive::Push);
    scan(maps.grasp, Primitive::Grasp);
    if (!found) throw std::runtime_error("select_action: empty action mask");
    return best;
}

double max_q_value(const QMaps& maps, const ActionSpace& space) {
    double best = -std::numeric_limits<double>::infinity();
    auto scan = [&](const Tensor& plane) {
        int h = maps.resolution;
        for (int r = 0; r < maps.k; ++r) {
            const auto& mask = space.valid[static_cast<size_t>(r)];
            for (int row = 0; row < h; ++row)
                for (int col = 0; col < h; ++col)
                    if (mask[static_cast<size_t>(row) * h + col])
                        best = std::max(best, plane.at3(r, row, col));
        }
    };
    if (maps.has_push) scan(maps.push);
    scan(maps.grasp);
    return best;
}

namespace {

Vec2 back_rotated_world(const Action& action, const HeightMap& map, int k) {
    double c = map.resolution / 2.0;
    double theta = 2.0 * M_PI * action.rotation / k;
    double ct = std::cos(theta), st = std::sin(theta);
    double dx = (action.col + 0.5) - c;
    double dy = (action.row + 0.5) - c;
    double ox = ct * dx + st * dy + c;
    double oy = -st * dx + ct * dy + c;
    return {ox * map.pixel_size, oy * map.pixel_size};
}

}  // namespace

PushCommand action_to_push(const Action& action, const HeightMap& map, int k,
                           const PushCommand& proto) {
    PushCommand cmd = proto;
    cmd.num_directions = k;
    cmd.start = back_rotated_world(action, map, k);
    cmd.direction_index = (k - action.rotation) % k;  // rightward in the rotated view
    return cmd;
}

GraspCommand action_to_grasp(const Action& action, const HeightMap& map, int k,
                             const GraspCommand& proto) {
    GraspCommand cmd = proto;
    cmd.num_angles = k;
    cmd.center = back_rotated_world(action, map, k);
    cmd.angle_index = (k - action.rotation) % k;
    return cmd;
}

}  // namespace pg
