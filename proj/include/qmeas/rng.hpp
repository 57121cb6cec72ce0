#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace qmeas {

// Counter-style generator built on splitmix64. Every consumer derives its own
// stream from (seed, stream name, index), so parallel and serial runs produce
// identical draws and no ambient entropy enters the pipeline.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [a, b)
    double uniform(double a, double b) { return a + (b - a) * next_double(); }

    double normal(double mean, double sd) {
        if (have_cached_) {
            have_cached_ = false;
            return mean + sd * cached_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = next_double();
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925287 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return mean + sd * r * std::cos(a);
    }

  private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

// FNV-1a over the stream name, mixed with the seed and index through one
// splitmix64 round. Stable across platforms.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream,
                                 std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : stream) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    std::uint64_t z = seed ^ (h + 0x9e3779b97f4a7c15ULL * (index + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng substream(std::uint64_t seed, std::string_view stream,
                     std::uint64_t index = 0) {
    return Rng(derive_seed(seed, stream, index));
}

} // namespace qmeas
