#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace pg {

/// mt19937_64 with hand-rolled distributions so draws are identical across
/// standard libraries and across builds.
class Rng {
public:
    Rng() : engine_(0x9e3779b97f4a7c15ull) {}
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Unbiased via rejection.
    uint64_t below(uint64_t n) {
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = engine_();
            if (r >= threshold) return r % n;
        }
    }

    std::string serialize() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    void deserialize(const std::string& text) {
        std::istringstream is(text);
        is >> engine_;
    }

private:
    std::mt19937_64 engine_;
};

inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace pg
