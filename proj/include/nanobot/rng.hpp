#pragma once

#include <cstdint>
#include <random>

#include "nanobot/vec3.hpp"

namespace nanobot {

/// SplitMix64 finalizer. Used to derive independent stream seeds from a master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Named randomness consumers. Each draws from its own stream so that, e.g.,
/// changing how many epsilon draws an agent makes never shifts obstacle placement.
enum class Stream : std::uint64_t {
    Episode = 1,
    Placement = 2,
    CellMotion = 3,
    Agent = 4,
    Evaluation = 5,
    World = 6,
};

constexpr std::uint64_t derive_seed(std::uint64_t parent, Stream stream, std::uint64_t index = 0) {
    std::uint64_t h = splitmix64(parent ^ splitmix64(static_cast<std::uint64_t>(stream)));
    return splitmix64(h + splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// Portable generator: std::mt19937_64 has a bit-exact output sequence on every
/// conforming implementation. The standard distributions do not, so all
/// real-valued draws are mapped here by hand.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        // Reject the tail that would bias the modulo.
        const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
        std::uint64_t r = engine_();
        while (r >= limit) r = engine_();
        return r % n;
    }

    /// Uniform point in the closed unit ball (rejection from the enclosing cube).
    Vec3 in_unit_ball() {
        for (;;) {
            Vec3 v{uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0)};
            if (norm_squared(v) <= 1.0) return v;
        }
    }

    /// Uniformly distributed direction.
    Vec3 unit_vector() {
        for (;;) {
            Vec3 v = in_unit_ball();
            double n2 = norm_squared(v);
            if (n2 > 1e-6) return v * (1.0 / std::sqrt(n2));
        }
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace nanobot
