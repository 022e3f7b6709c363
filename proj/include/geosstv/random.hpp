#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace geosstv {

/// Seeded generator whose derived draws are identical on every standard library.
///
/// std::mt19937_64 output is fully specified; the std distributions are not,
/// so uniform/normal/integer draws are derived here directly from raw words.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi], unbiased by rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Standard normal via the Marsaglia polar method.
    double normal();

    /// `count` distinct indices from [0, n), in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace geosstv
