#include "pushgrasp/heightmap.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace pg {

HeightMap render_heightmap(const Scene& scene, int resolution) {
    if (resolution < 16) throw std::invalid_argument("resolution must be >= 16");
    HeightMap map;
    map.resolution = resolution;
    map.workspace_side = scene.workspace_side;
    map.pixel_size = scene.workspace_side / resolution;
    map.color.assign(static_cast<size_t>(resolution) * resolution * 3, 0.0);
    map.height.assign(static_cast<size_t>(resolution) * resolution, 0.0);

    const auto& palette = color_palette();
    double ps = map.pixel_size;
    for (const auto& obj : scene.objects) {
        Vec2 c = obj.centroid();
        double r = shape_bounding_radius(obj.spec.shape);
        int row_lo = std::max(0, static_cast<int>(std::floor((c.y - r) / ps - 0.5)));
        int row_hi = std::min(resolution - 1, static_cast<int>(std::ceil((c.y + r) / ps)));
        int col_lo = std::max(0, static_cast<int>(std::floor((c.x - r) / ps - 0.5)));
        int col_hi = std::min(resolution - 1, static_cast<int>(std::ceil((c.x + r) / ps)));
        const auto& rgb = palette[static_cast<size_t>(obj.spec.color_id)];
        for (int row = row_lo; row <= row_hi; ++row) {
            for (int col = col_lo; col <= col_hi; ++col) {
                Vec2 p{(col + 0.5) * ps, (row + 0.5) * ps};
                if (!point_in_shape(obj.spec.shape, obj.pose, p)) continue;
                size_t i = map.idx(row, col);
                if (obj.spec.height > map.height[i]) {
                    map.height[i] = obj.spec.height;
                    map.color[i * 3 + 0] = rgb[0];
                    map.color[i * 3 + 1] = rgb[1];
                    map.color[i * 3 + 2] = rgb[2];
                }
            }
        }
    }
    return map;
}

Vec2 pixel_to_world(PixelCoord p, const HeightMap& map) {
    if (!map.in_bounds(p.row, p.col)) throw std::out_of_range("pixel outside heightmap");
    return {(p.col + 0.5) * map.pixel_size, (p.row + 0.5) * map.pixel_size};
}

PixelCoord world_to_pixel(Vec2 q, const HeightMap& map) {
    int col = static_cast<int>(std::floor(q.x / map.pixel_size));
    int row = static_cast<int>(std::floor(q.y / map.pixel_size));
    if (!map.in_bounds(row, col)) throw std::out_of_range("world point outside heightmap");
    return {row, col};
}

HeightMap rotate_heightmap(const HeightMap& map, int angle_index, int k, Interp interp) {
    if (k <= 0 || angle_index < 0 || angle_index >= k)
        throw std::invalid_argument("angle_index out of range");
    if (angle_index == 0) return map;

    HeightMap out;
    out.resolution = map.resolution;
    out.pixel_size = map.pixel_size;
    out.workspace_side = map.workspace_side;
    int n = map.resolution;
    out.color.assign(static_cast<size_t>(n) * n * 3, 0.0);
    out.height.assign(static_cast<size_t>(n) * n, 0.0);

    double theta = 2.0 * M_PI * angle_index / k;
    double ct = std::cos(theta), st = std::sin(theta);
    double c = n / 2.0;

    for (int row = 0; row < n; ++row) {
        for (int col = 0; col < n; ++col) {
            // Destination pixel center, rotated back into the source frame.
            double dx = (col + 0.5) - c;
            double dy = (row + 0.5) - c;
            double sx = ct * dx + st * dy + c;   // R(-theta) * d
            double sy = -st * dx + ct * dy + c;
            size_t o = out.idx(row, col);
            if (interp == Interp::Nearest) {
                int sc = static_cast<int>(std::floor(sx));
                int sr = static_cast<int>(std::floor(sy));
                if (!map.in_bounds(sr, sc)) continue;
                size_t s = map.idx(sr, sc);
                out.height[o] = map.height[s];
                std::memcpy(&out.color[o * 3], &map.color[s * 3], 3 * sizeof(double));
                continue;
            }
            double fx = sx - 0.5, fy = sy - 0.5;
            int c0 = static_cast<int>(std::floor(fx));
            int r0 = static_cast<int>(std::floor(fy));
            double ax = fx - c0, ay = fy - r0;
            double h = 0.0, rgb[3] = {0.0, 0.0, 0.0};
            for (int dr = 0; dr <= 1; ++dr) {
                for (int dc = 0; dc <= 1; ++dc) {
                    double w = (dr ? ay : 1.0 - ay) * (dc ? ax : 1.0 - ax);
                    if (w == 0.0) continue;
                    int rr = r0 + dr, cc = c0 + dc;
                    if (!map.in_bounds(rr, cc)) continue;  // zero fill
                    size_t s = map.idx(rr, cc);
                    h += w * map.height[s];
                    rgb[0] += w * map.color[s * 3 + 0];
                    rgb[1] += w * map.color[s * 3 + 1];
                    rgb[2] += w * map.color[s * 3 + 2];
                }
            }
            out.height[o] = h;
            out.color[o * 3 + 0] = rgb[0];
            out.color[o * 3 + 1] = rgb[1];
            out.color[o * 3 + 2] = rgb[2];
        }
    }
    return out;
}

RotationStack build_rotation_stack(const HeightMap& map, int k) {
    RotationStack stack;
    stack.k = k;
    stack.maps.reserve(static_cast<size_t>(k));
    stack.angles.reserve(static_cast<size_t>(k));
    for (int r = 0; r < k; ++r) {
        stack.maps.push_back(rotate_heightmap(map, r, k));
        stack.angles.push_back(2.0 * M_PI * r / k);
    }
    return stack;
}

Tensor normalize_for_network(const HeightMap& map, double depth_mean, double depth_std,
                             bool include_depth) {
    if (!(depth_std > 0.0)) throw std::invalid_argument("depth_std must be > 0");
    int n = map.resolution;
    Tensor t({include_depth ? 4 : 3, n, n});
    size_t plane = static_cast<size_t>(n) * n;
    for (size_t i = 0; i < plane; ++i) {
        t.data[0 * plane + i] = map.color[i * 3 + 0];
        t.data[1 * plane + i] = map.color[i * 3 + 1];
        t.data[2 * plane + i] = map.color[i * 3 + 2];
        if (include_depth) t.data[3 * plane + i] = (map.height[i] - depth_mean) / depth_std;
    }
    return t;
}

bool detect_change(const HeightMap& before, const HeightMap& after, double tau) {
    if (before.resolution != after.resolution)
        throw std::invalid_argument("heightmap resolution mismatch");
    double sum = 0.0;
    for (size_t i = 0; i < before.height.size(); ++i)
        sum += std::abs(after.height[i] - before.height[i]);
    return sum > tau;
}

void DepthStats::observe(const HeightMap& map) {
    if (frozen()) return;
    for (double h : map.height) {
        sum_ += h;
        sum_sq_ += h * h;
        ++count_;
    }
    ++maps_seen_;
}

double DepthStats::stddev() const {
    if (count_ == 0) return 1.0;
    double m = sum_ / count_;
    double var = std::max(0.0, sum_sq_ / count_ - m * m);
    return std::max(std::sqrt(var), 1e-6);
}

void DepthStats::serialize(std::ostream& os) const {
    os.write(reinterpret_cast<const char*>(&sum_), sizeof(sum_));
    os.write(reinterpret_cast<const char*>(&sum_sq_), sizeof(sum_sq_));
    os.write(reinterpret_cast<const char*>(&count_), sizeof(count_));
    os.write(reinterpret_cast<const char*>(&maps_seen_), sizeof(maps_seen_));
}

void DepthStats::deserialize(std::istream& is) {
    is.read(reinterpret_cast<char*>(&sum_), sizeof(sum_));
    is.read(reinterpret_cast<char*>(&sum_sq_), sizeof(sum_sq_));
    is.read(reinterpret_cast<char*>(&count_), sizeof(count_));
    is.read(reinterpret_cast<char*>(&maps_seen_), sizeof(maps_seen_));
}

}  // namespace pg
