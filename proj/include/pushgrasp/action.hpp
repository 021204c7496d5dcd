#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pushgrasp/heightmap.hpp"
#include "pushgrasp/rng.hpp"
#include "pushgrasp/tensor.hpp"

namespace pg {

enum class Primitive { Push, Grasp };

/// One executable action: a primitive at a pixel of a rotated heightmap.
struct Action {
    Primitive primitive{Primitive::Push};
    int rotation{0};  // rotated-map index in [0, k)
    int row{0};
    int col{0};
};

/// Dense per-pixel scores for every (primitive, rotation): tensors of shape
/// (k, H, W). has_push is false for grasp-only policies.
struct QMaps {
    Tensor push;
    Tensor grasp;
    int k{0};
    int resolution{0};
    bool has_push{true};
};

/// Valid pixels per rotation: those whose back-rotated center lands inside
/// the workspace square.
struct ActionSpace {
    int k{0};
    int resolution{0};
    std::vector<std::vector<uint8_t>> valid;      // [k][H*W]
    std::vector<std::array<int, 3>> valid_list;   // (rotation, row, col)

    static ActionSpace make(int k, int resolution);
    bool is_valid(int rotation, int row, int col) const {
        return valid[static_cast<size_t>(rotation)]
                    [static_cast<size_t>(row) * resolution + col] != 0;
    }
};

/// Epsilon-greedy over the masked maps. Greedy ties break to push before
/// grasp, then lowest rotation, then row-major pixel order.
/// Throws std::runtime_error when no valid action exists.
Action select_action(const QMaps& maps, double epsilon, Rng& rng, const ActionSpace& space);

/// Largest masked entry across every map (target bootstrapping).
double max_q_value(const QMaps& maps, const ActionSpace& space);

/// World-frame command for an action chosen on rotated map r: the pixel is
/// rotated back about the map center and directions map "rightward in the
/// rotated view" to world angle -r*2*pi/k.
PushCommand action_to_push(const Action& action, const HeightMap& map, int k,
                           const PushCommand& proto);
GraspCommand action_to_grasp(const Action& action, const HeightMap& map, int k,
                             const GraspCommand& proto);

}  // namespace pg
