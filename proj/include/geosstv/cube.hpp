#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace geosstv {

/// Extent of a hyperspectral cube: n1 rows, n2 columns, n3 bands.
class CubeShape {
public:
    CubeShape() = default;
    CubeShape(std::size_t n1, std::size_t n2, std::size_t n3);

    std::size_t n1() const { return n1_; }
    std::size_t n2() const { return n2_; }
    std::size_t n3() const { return n3_; }

    std::size_t band_size() const { return n1_ * n2_; }
    std::size_t voxels() const { return n1_ * n2_ * n3_; }

    std::string to_string() const;

    friend bool operator==(const CubeShape&, const CubeShape&) = default;

private:
    std::size_t n1_ = 2;
    std::size_t n2_ = 2;
    std::size_t n3_ = 1;
};

/// Flat offset of voxel (i, j, b), 0-based, band-sequential.
std::size_t voxel_index(const CubeShape& shape, std::size_t i, std::size_t j, std::size_t b);

/// A cube-shaped field made of `Blocks` consecutive cube-sized blocks.
///
/// Blocks == 1 is a plain cube, 2 is a (vertical, horizontal) gradient pair
/// per voxel, 6 is three gradient pairs on the up/side/center grids.
template <std::size_t Blocks>
class Field {
public:
    static constexpr std::size_t block_count = Blocks;

    Field() = default;

    explicit Field(const CubeShape& shape, double fill = 0.0)
        : shape_(shape), data_(shape.voxels() * Blocks, fill) {
        if (!std::isfinite(fill)) {
            throw std::invalid_argument("fill value must be finite");
        }
    }

    Field(const CubeShape& shape, std::vector<double> data)
        : shape_(shape), data_(std::move(data)) {
        if (data_.size() != shape_.voxels() * Blocks) {
            throw std::invalid_argument("field data length " + std::to_string(data_.size()) +
                                        " does not match shape " + shape_.to_string());
        }
        for (double x : data_) {
            if (!std::isfinite(x)) {
                throw std::invalid_argument("field data contains non-finite entries");
            }
        }
    }

    const CubeShape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    const std::vector<double>& vector() const { return data_; }

    std::span<double> block(std::size_t k) {
        return std::span<double>(data_).subspan(k * shape_.voxels(), shape_.voxels());
    }
    std::span<const double> block(std::size_t k) const {
        return std::span<const double>(data_).subspan(k * shape_.voxels(), shape_.voxels());
    }

    double& operator[](std::size_t k) { return data_[k]; }
    double operator[](std::size_t k) const { return data_[k]; }

    double& at(std::size_t i, std::size_t j, std::size_t b) requires(Blocks == 1) {
        return data_[voxel_index(shape_, i, j, b)];
    }
    double at(std::size_t i, std::size_t j, std::size_t b) const requires(Blocks == 1) {
        return data_[voxel_index(shape_, i, j, b)];
    }

    friend bool operator==(const Field&, const Field&) = default;

private:
    CubeShape shape_;
    std::vector<double> data_;
};

using HsCube = Field<1>;
using GradientPairField = Field<2>;
using SplitGradientField = Field<6>;

/// Cube of the given shape with every entry equal to `fill`.
HsCube cube_new(const CubeShape& shape, double fill);

double inner_product(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> x);
double norm1(std::span<const double> x);
double mean(std::span<const double> x);
bool all_finite(std::span<const double> x);

template <std::size_t B>
double norm2(const Field<B>& f) { return norm2(f.values()); }
template <std::size_t B>
double norm1(const Field<B>& f) { return norm1(f.values()); }
template <std::size_t B>
double mean(const Field<B>& f) { return mean(f.values()); }

/// x <- a*x + b*y, elementwise.
void combine(std::span<double> x, double a, std::span<const double> y, double b);

template <std::size_t B>
Field<B> operator+(const Field<B>& a, const Field<B>& b) {
    Field<B> out = a;
    combine(out.values(), 1.0, b.values(), 1.0);
    return out;
}

template <std::size_t B>
Field<B> operator-(const Field<B>& a, const Field<B>& b) {
    Field<B> out = a;
    combine(out.values(), 1.0, b.values(), -1.0);
    return out;
}

} // namespace geosstv
