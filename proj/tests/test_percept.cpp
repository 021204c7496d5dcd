#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pushgrasp/heightmap.hpp"
#include "pushgrasp/rng.hpp"

using namespace pg;

namespace {

Scene one_disc(double r, double h, double x, double y) {
    Scene s;
    PlacedObject obj;
    obj.spec.shape = Disc{r};
    obj.spec.height = h;
    obj.spec.color_id = 0;
    obj.spec.name = "d";
    obj.pose = Pose2{x, y, 0};
    s.objects.push_back(obj);
    return s;
}

Scene rotate_scene(const Scene& scene, double theta) {
    Scene out = scene;
    Vec2 c{scene.workspace_side / 2.0, scene.workspace_side / 2.0};
    for (auto& obj : out.objects) {
        Vec2 rel = obj.pose.translation() - c;
        Vec2 moved = c + rotate(rel, theta);
        obj.pose = Pose2{moved.x, moved.y, obj.pose.theta + theta};
    }
    return out;
}

double interior_max_abs_diff(const HeightMap& a, const HeightMap& b, int margin_from_center) {
    int n = a.resolution;
    double c = n / 2.0;
    double radius = n / 2.0 - margin_from_center;
    double worst = 0.0;
    for (int row = 0; row < n; ++row) {
        for (int col = 0; col < n; ++col) {
            double dx = (col + 0.5) - c, dy = (row + 0.5) - c;
            if (dx * dx + dy * dy > radius * radius) continue;
            worst = std::max(worst, std::abs(a.height[a.idx(row, col)] -
                                             b.height[b.idx(row, col)]));
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("render empty scene is all zero") {
    Scene s;
    HeightMap map = render_heightmap(s, 64);
    for (double h : map.height) CHECK(h == 0.0);
    for (double v : map.color) CHECK(v == 0.0);
    CHECK(map.pixel_size == doctest::Approx(0.448 / 64).epsilon(1e-12));
}

TEST_CASE("rendered disc matches per-pixel membership oracle") {
    Scene s = one_disc(0.05, 0.03, 0.224, 0.224);
    HeightMap map = render_heightmap(s, 64);
    const auto& obj = s.objects[0];
    for (int row = 0; row < 64; ++row) {
        for (int col = 0; col < 64; ++col) {
            Vec2 p = pixel_to_world({row, col}, map);
            double expected = point_in_shape(obj.spec.shape, obj.pose, p) ? 0.03 : 0.0;
            CHECK(map.height[map.idx(row, col)] == expected);
        }
    }
}

TEST_CASE("rendered footprint area approximates the analytic area") {
    Scene s = spawn_random(2, default_palette(), 31);
    HeightMap map = render_heightmap(s, 128);
    int pixels = 0;
    for (double h : map.height)
        if (h > 0.0) ++pixels;
    double analytic = 0.0, perimeter = 0.0;
    for (const auto& obj : s.objects) {
        analytic += shape_area(obj.spec.shape);
        perimeter += 2 * M_PI * shape_bounding_radius(obj.spec.shape);
    }
    double measured = pixels * map.pixel_size * map.pixel_size;
    CHECK(std::abs(measured - analytic) <= 2.0 * map.pixel_size * perimeter);
}

TEST_CASE("pixel/world transforms") {
    Scene s;
    HeightMap map = render_heightmap(s, 224);
    CHECK(map.pixel_size == doctest::Approx(0.002).epsilon(1e-12));

    Vec2 center = pixel_to_world({112, 112}, map);
    CHECK(std::abs(center.x - 0.224) <= map.pixel_size / 2 + 1e-12);
    CHECK(std::abs(center.y - 0.224) <= map.pixel_size / 2 + 1e-12);

    for (int row = 0; row < 224; row += 13) {
        for (int col = 0; col < 224; col += 13) {
            PixelCoord p = world_to_pixel(pixel_to_world({row, col}, map), map);
            CHECK(p.row == row);
            CHECK(p.col == col);
        }
    }
    CHECK_THROWS_AS(pixel_to_world({224, 0}, map), std::out_of_range);
    CHECK_THROWS_AS(world_to_pixel({-0.01, 0.1}, map), std::out_of_range);
}

TEST_CASE("rotation identity and involution") {
    Scene s = spawn_random(4, default_palette(), 5);
    HeightMap map = render_heightmap(s, 64);

    HeightMap r0 = rotate_heightmap(map, 0, 16);
    CHECK(r0.height == map.height);
    CHECK(r0.color == map.color);

    HeightMap r180 = rotate_heightmap(map, 8, 16);
    HeightMap back = rotate_heightmap(r180, 8, 16);
    CHECK(interior_max_abs_diff(map, back, 2) < 1e-6);
}

TEST_CASE("rotate forward then back stays within the frozen interpolation bound") {
    Rng rng(17);
    for (int trial = 0; trial < 8; ++trial) {
        Scene s = spawn_random(5, default_palette(), rng.next_u64());
        HeightMap map = render_heightmap(s, 64);
        int r = 1 + static_cast<int>(rng.below(15));
        HeightMap fwd = rotate_heightmap(map, r, 16);
        HeightMap back = rotate_heightmap(fwd, 16 - r, 16);
        CHECK(interior_max_abs_diff(map, back, 2) < 0.02);
    }
}

TEST_CASE("rotation stack") {
    Scene s = spawn_random(3, default_palette(), 9);
    HeightMap map = render_heightmap(s, 64);
    RotationStack stack = build_rotation_stack(map, 16);
    CHECK(stack.maps.size() == 16);
    CHECK(stack.angles[3] == doctest::Approx(3 * 2 * M_PI / 16));
    CHECK(stack.maps[0].height == map.height);
    RotationStack again = build_rotation_stack(map, 16);
    for (int r = 0; r < 16; ++r) CHECK(stack.maps[r].height == again.maps[r].height);
}

TEST_CASE("scene rotation commutes with heightmap rotation") {
    Scene s = spawn_random(4, default_palette(), 23);
    for (int r : {1, 4, 9}) {
        double theta = 2 * M_PI * r / 16;
        HeightMap rotated_render = render_heightmap(rotate_scene(s, theta), 64);
        HeightMap render_rotated = rotate_heightmap(render_heightmap(s, 64), r, 16);
        CHECK(interior_max_abs_diff(rotated_render, render_rotated, 2) < 0.05);
    }
}

TEST_CASE("normalize_for_network") {
    Scene s;
    HeightMap map = render_heightmap(s, 64);

    Tensor with_depth = normalize_for_network(map, 0.01, 0.03, true);
    CHECK(with_depth.shape == std::vector<int>{4, 64, 64});
    for (int row = 0; row < 64; ++row)
        for (int col = 0; col < 64; ++col)
            CHECK(with_depth.at3(3, row, col) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));

    Tensor color_only = normalize_for_network(map, 0.01, 0.03, false);
    CHECK(color_only.shape == std::vector<int>{3, 64, 64});

    CHECK_THROWS_AS(normalize_for_network(map, 0.0, 0.0, true), std::invalid_argument);
}

TEST_CASE("detect_change") {
    Scene a = one_disc(0.03, 0.04, 0.15, 0.15);
    HeightMap ma = render_heightmap(a, 64);

    SUBCASE("identical maps never change") {
        CHECK_FALSE(detect_change(ma, ma, 1e-9));
        CHECK_FALSE(detect_change(ma, ma, 10.0));
    }
    SUBCASE("displacement to a disjoint spot doubles the footprint mass") {
        Scene b = one_disc(0.03, 0.04, 0.30, 0.30);
        HeightMap mb = render_heightmap(b, 64);
        int footprint = 0;
        for (double h : ma.height)
            if (h > 0) ++footprint;
        double mass = 2.0 * footprint * 0.04;
        CHECK(detect_change(ma, mb, mass * 0.9));
        CHECK_FALSE(detect_change(ma, mb, mass * 1.1));
    }
    SUBCASE("sub-threshold jitter stays quiet") {
        HeightMap mb = ma;
        double tau = default_change_threshold(64);
        mb.height[mb.idx(5, 5)] += tau / 2;
        CHECK_FALSE(detect_change(ma, mb, tau));
    }
    SUBCASE("symmetry") {
        Scene b = one_disc(0.03, 0.04, 0.2, 0.2);
        HeightMap mb = render_heightmap(b, 64);
        double tau = default_change_threshold(64);
        CHECK(detect_change(ma, mb, tau) == detect_change(mb, ma, tau));
    }
    SUBCASE("resolution mismatch throws") {
        HeightMap small = render_heightmap(a, 32);
        CHECK_THROWS_AS(detect_change(ma, small, 0.1), std::invalid_argument);
    }
}

TEST_CASE("render determinism") {
    Scene s = spawn_random(6, default_palette(), 77);
    HeightMap a = render_heightmap(s, 64);
    HeightMap b = render_heightmap(s, 64);
    CHECK(a.height == b.height);
    CHECK(a.color == b.color);
}

TEST_CASE("depth stats freeze after 100 maps") {
    DepthStats stats;
    Scene s = spawn_random(5, default_palette(), 1);
    HeightMap map = render_heightmap(s, 64);
    for (int i = 0; i < 100; ++i) stats.observe(map);
    CHECK(stats.frozen());
    double mean = stats.mean(), sd = stats.stddev();
    Scene other = spawn_random(8, default_palette(), 2);
    stats.observe(render_heightmap(other, 64));
    CHECK(stats.mean() == mean);
    CHECK(stats.stddev() == sd);
    CHECK(sd > 0.0);
}
