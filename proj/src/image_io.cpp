#include "pushgrasp/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace pg {

namespace {

std::ofstream open_binary(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    return os;
}

uint8_t to_byte(double v) {
    return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

double unit_scale(double v, double lo, double hi) {
    if (hi <= lo) return 0.0;
    return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

}  // namespace

void write_ppm(const std::string& path, const std::vector<double>& rgb, int height, int width) {
    auto os = open_binary(path);
    os << "P6\n" << width << " " << height << "\n255\n";
    for (size_t i = 0; i < static_cast<size_t>(height) * width; ++i) {
        uint8_t px[3] = {to_byte(rgb[i * 3]), to_byte(rgb[i * 3 + 1]), to_byte(rgb[i * 3 + 2])};
        os.write(reinterpret_cast<const char*>(px), 3);
    }
}

void write_pgm(const std::string& path, const std::vector<double>& values, int height, int width,
               double lo, double hi) {
    auto os = open_binary(path);
    os << "P5\n" << width << " " << height << "\n255\n";
    for (double v : values) {
        uint8_t b = to_byte(unit_scale(v, lo, hi));
        os.write(reinterpret_cast<const char*>(&b), 1);
    }
}

void write_heat_ppm(const std::string& path, const std::vector<double>& values, int height,
                    int width, double lo, double hi) {
    auto os = open_binary(path);
    os << "P6\n" << width << " " << height << "\n255\n";
    for (double v : values) {
        double t = unit_scale(v, lo, hi);
        // 4-stop ramp: blue -> cyan -> yellow -> red
        double r, g, b;
        if (t < 1.0 / 3.0) {
            double s = t * 3.0;
            r = 0.0, g = s, b = 1.0;
        } else if (t < 2.0 / 3.0) {
            double s = (t - 1.0 / 3.0) * 3.0;
            r = s, g = 1.0, b = 1.0 - s;
        } else {
            double s = (t - 2.0 / 3.0) * 3.0;
            r = 1.0, g = 1.0 - s, b = 0.0;
        }
        uint8_t px[3] = {to_byte(r), to_byte(g), to_byte(b)};
        os.write(reinterpret_cast<const char*>(px), 3);
    }
}

void write_color_ppm(const std::string& path, const HeightMap& map) {
    write_ppm(path, map.color, map.resolution, map.resolution);
}

void write_height_pgm(const std::string& path, const HeightMap& map) {
    double hi = 0.0;
    for (double h : map.height) hi = std::max(hi, h);
    write_pgm(path, map.height, map.resolution, map.resolution, 0.0, hi > 0.0 ? hi : 1.0);
}

}  // namespace pg
