#include "geosstv/cube.hpp"

#include <limits>

namespace geosstv {

CubeShape::CubeShape(std::size_t n1, std::size_t n2, std::size_t n3)
    : n1_(n1), n2_(n2), n3_(n3) {
    if (n1 < 2 || n2 < 2 || n3 < 1) {
        throw std::invalid_argument("invalid cube shape " + to_string() +
                                    ": need n1 >= 2, n2 >= 2, n3 >= 1");
    }
    const auto max = std::numeric_limits<std::size_t>::max() / 8;
    if (n1 > max / n2 || n1 * n2 > max / n3) {
        throw std::invalid_argument("cube shape " + to_string() + " is too large");
    }
}

std::string CubeShape::to_string() const {
    return "(" + std::to_string(n1_) + "," + std::to_string(n2_) + "," + std::to_string(n3_) + ")";
}

std::size_t voxel_index(const CubeShape& shape, std::size_t i, std::size_t j, std::size_t b) {
    if (i >= shape.n1() || j >= shape.n2() || b >= shape.n3()) {
        throw std::out_of_range("voxel (" + std::to_string(i) + "," + std::to_string(j) + "," +
                                std::to_string(b) + ") outside shape " + shape.to_string());
    }
    return b * shape.band_size() + i * shape.n2() + j;
}

HsCube cube_new(const CubeShape& shape, double fill) { return HsCube(shape, fill); }

double inner_product(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("inner_product: length mismatch " + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()));
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        acc += a[k] * b[k];
    }
    return acc;
}

double norm2(std::span<const double> x) { return std::sqrt(inner_product(x, x)); }

double norm1(std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) {
        acc += std::abs(v);
    }
    return acc;
}

double mean(std::span<const double> x) {
    if (x.empty()) {
        return 0.0;
    }
    double acc = 0.0;
    for (double v : x) {
        acc += v;
    }
    return acc / static_cast<double>(x.size());
}

bool all_finite(std::span<const double> x) {
    for (double v : x) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

void combine(std::span<double> x, double a, std::span<const double> y, double b) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("combine: length mismatch");
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] = a * x[k] + b * y[k];
    }
}

} // namespace geosstv
