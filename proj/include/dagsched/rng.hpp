#pragma once

#include <cstdint>

namespace dagsched {

// SplitMix64 (Steele/Lea/Flood mixing constants). Pinned so that seeds
// reproduce identical streams on every platform; std::mt19937 distributions
// are not byte-portable across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform draw from [lo, hi], rejection-sampled to avoid modulo bias.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return lo + static_cast<std::int64_t>(next());  // full 64-bit range
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % span + 1) % span;
        std::uint64_t draw = next();
        while (draw > limit) draw = next();
        return lo + static_cast<std::int64_t>(draw % span);
    }

    // True with probability round(p * 1e6) / 1e6; quantized so the draw
    // sequence is independent of floating-point rounding.
    bool bernoulli(double p) {
        const auto threshold = static_cast<std::int64_t>(p * 1e6 + 0.5);
        return uniform_int(0, 999999) < threshold;
    }

  private:
    std::uint64_t state_;
};

}  // namespace dagsched
