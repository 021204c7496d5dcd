#pragma once

#include <utility>
#include <vector>

#include "pushgrasp/sim.hpp"
#include "pushgrasp/tensor.hpp"

namespace pg {

/// Orthographic top-down view of a scene. Pixel (row, col) covers the world
/// square centered at ((col+0.5)*pixel_size, (row+0.5)*pixel_size).
struct HeightMap {
    int resolution{0};  // square side in pixels
    double pixel_size{0.0};
    double workspace_side{0.0};
    std::vector<double> color;   // resolution^2 * 3, RGB in [0,1]
    std::vector<double> height;  // resolution^2, meters above the table

    size_t idx(int row, int col) const {
        return static_cast<size_t>(row) * resolution + col;
    }
    bool in_bounds(int row, int col) const {
        return row >= 0 && row < resolution && col >= 0 && col < resolution;
    }
};

struct PixelCoord {
    int row{0};
    int col{0};
};

HeightMap render_heightmap(const Scene& scene, int resolution);

/// Center of the pixel in world coordinates. Throws std::out_of_range.
Vec2 pixel_to_world(PixelCoord p, const HeightMap& map);
/// Pixel containing the world point. Throws std::out_of_range.
PixelCoord world_to_pixel(Vec2 q, const HeightMap& map);

enum class Interp { Bilinear, Nearest };

/// Rotate about the image center by angle_index * 2*pi / k; samples that fall
/// outside the source frame read as zero. angle_index 0 is a bit-exact copy.
HeightMap rotate_heightmap(const HeightMap& map, int angle_index, int k,
                           Interp interp = Interp::Bilinear);

struct RotationStack {
    int k{0};
    std::vector<HeightMap> maps;
    std::vector<double> angles;
};

RotationStack build_rotation_stack(const HeightMap& map, int k);

/// (C, H, W) network input: RGB channels plus, when include_depth, the height
/// channel normalized as (h - depth_mean) / depth_std. Requires depth_std > 0.
Tensor normalize_for_network(const HeightMap& map, double depth_mean, double depth_std,
                             bool include_depth);

/// True iff the summed absolute height difference exceeds tau.
/// Throws std::invalid_argument on resolution mismatch.
bool detect_change(const HeightMap& before, const HeightMap& after, double tau);

/// 1% of pixels changing by 0.1 mm.
inline double default_change_threshold(int resolution) {
    return 0.01 * resolution * resolution * 1e-4;
}

/// Streaming mean/std of height values, frozen after the first 100 maps.
class DepthStats {
public:
    void observe(const HeightMap& map);
    double mean() const { return count_ == 0 ? 0.0 : sum_ / count_; }
    double stddev() const;
    bool frozen() const { return maps_seen_ >= 100; }
    long maps_seen() const { return maps_seen_; }

    void serialize(std::ostream& os) const;
    void deserialize(std::istream& is);

private:
    double sum_ = 0.0;
    double sum_sq_ = 0.0;
    long count_ = 0;
    long maps_seen_ = 0;
};

}  // namespace pg
