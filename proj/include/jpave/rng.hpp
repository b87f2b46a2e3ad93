#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace jpave {

// Deterministic random source. Wraps std::mt19937_64 (whose output sequence
// is pinned by the standard) and maps raw draws to ints/doubles with our own
// arithmetic, so results are bit-identical across platforms and library
// versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n) {
        // Rejection sampling keeps the draw unbiased and fully deterministic.
        const std::uint64_t bound = n;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % bound);
    }

    // Fisher-Yates with our own index draws (std::shuffle is
    // implementation-defined).
    template <typename T>
    void shuffle(std::vector<T>& items) {
        if (items.size() < 2) return;
        for (std::size_t i = items.size() - 1; i > 0; --i) {
            std::size_t j = below(i + 1);
            std::swap(items[i], items[j]);
        }
    }

    std::string state() const;
    void restore(const std::string& state);

    // Derives an independent stream, e.g. one per instance of a file.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t salt);

private:
    std::mt19937_64 engine_;
};

}  // namespace jpave
