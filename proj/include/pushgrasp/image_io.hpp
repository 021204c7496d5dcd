#pragma once

#include <string>
#include <vector>

#include "pushgrasp/heightmap.hpp"

namespace pg {

/// Binary P6 pixmap from interleaved RGB in [0,1].
void write_ppm(const std::string& path, const std::vector<double>& rgb, int height, int width);

/// Binary P5 graymap; values mapped linearly from [lo, hi] to [0, 255].
void write_pgm(const std::string& path, const std::vector<double>& values, int height, int width,
               double lo, double hi);

/// Heat-map P6 pixmap: values mapped from [lo, hi] through a fixed
/// blue-cyan-yellow-red ramp.
void write_heat_ppm(const std::string& path, const std::vector<double>& values, int height,
                    int width, double lo, double hi);

void write_color_ppm(const std::string& path, const HeightMap& map);
void write_height_pgm(const std::string& path, const HeightMap& map);

}  // namespace pg
