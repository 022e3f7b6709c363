#include "geosstv/random.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace geosstv {

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) {
        throw std::invalid_argument("uniform_int: empty range");
    }
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) {
        return static_cast<std::int64_t>(engine_());
    }
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t draw = engine_();
    while (draw >= limit) {
        draw = engine_();
    }
    return lo + static_cast<std::int64_t>(draw % span);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double a = 0.0;
    double b = 0.0;
    double r = 0.0;
    do {
        a = 2.0 * uniform() - 1.0;
        b = 2.0 * uniform() - 1.0;
        r = a * a + b * b;
    } while (r >= 1.0 || r == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(r) / r);
    spare_ = b * scale;
    has_spare_ = true;
    return a * scale;
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t count) {
    if (count > n) {
        throw std::invalid_argument("sample_without_replacement: count exceeds population");
    }
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t k = 0; k < count; ++k) {
        const auto pick = static_cast<std::size_t>(
            uniform_int(static_cast<std::int64_t>(k), static_cast<std::int64_t>(n - 1)));
        std::swap(pool[k], pool[pick]);
    }
    pool.resize(count);
    return pool;
}

} // namespace geosstv
