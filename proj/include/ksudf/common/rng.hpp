#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace ksudf {

// Seeded generator with distribution code written out explicitly, so that
// streams are identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n);

    /// Standard normal variate (Marsaglia polar method).
    double normal();

    static std::uint64_t splitmix64(std::uint64_t x);

    /// Derive an independent seed for a named sub-stream of `seed`.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ksudf
