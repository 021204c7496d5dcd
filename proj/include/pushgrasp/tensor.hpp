#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pg {

/// Dense row-major numeric array. Convolutional data is stored as
/// (channels, height, width).
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> shape_) : shape(std::move(shape_)) {
        data.assign(static_cast<size_t>(numel_of(shape)), 0.0);
    }

    static long numel_of(const std::vector<int>& s) {
        long n = 1;
        for (int d : s) {
            if (d < 0) throw std::invalid_argument("negative tensor dimension");
            n *= d;
        }
        return n;
    }

    long numel() const { return static_cast<long>(data.size()); }

    double& operator[](size_t i) { return data[i]; }
    double operator[](size_t i) const { return data[i]; }

    double& at3(int c, int y, int x) {
        return data[(static_cast<size_t>(c) * shape[1] + y) * shape[2] + x];
    }
    const double& at3(int c, int y, int x) const {
        return data[(static_cast<size_t>(c) * shape[1] + y) * shape[2] + x];
    }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

/// Throws std::runtime_error when any element is NaN or infinite.
inline void require_finite(const Tensor& t, const char* what) {
    for (double v : t.data) {
        if (!std::isfinite(v))
            throw std::runtime_error(std::string("non-finite value in ") + what);
    }
}

}  // namespace pg
