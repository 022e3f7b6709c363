#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "geosstv/cube.hpp"

namespace geosstv {

struct BoxBounds {
    double mu_min = 0.0;
    double mu_max = 1.0;

    /// Throws unless mu_min < mu_max.
    void validate() const;
};

enum class BallKind { L1, L2 };

struct BallSpec {
    BallKind kind = BallKind::L2;
    double radius = 0.0;
    /// L2 only; the L1 ball is always zero-centered.
    std::optional<std::vector<double>> center;

    void validate(std::size_t length) const;
};

/// Group soft-thresholding for the mixed l1,2 norm.
///
/// `x` is a run of (vertical, horizontal) sub-block pairs, each sub-block of
/// length `block_len`; element k of a vertical sub-block is grouped with
/// element k of the horizontal sub-block that follows it.
std::vector<double> prox_l12(std::span<const double> x, double gamma, std::size_t block_len);

GradientPairField prox_l12(const GradientPairField& x, double gamma);
SplitGradientField prox_l12(const SplitGradientField& x, double gamma);

/// Mixed l1,2 norm under the same grouping as prox_l12.
double norm_l12(std::span<const double> x, std::size_t block_len);

template <std::size_t B>
double norm_l12(const Field<B>& f) requires(B % 2 == 0) {
    return norm_l12(f.values(), f.shape().voxels());
}

std::vector<double> project_box(std::span<const double> x, const BoxBounds& bounds);
std::vector<double> project_l2ball(std::span<const double> x, std::span<const double> center,
                                   double radius);
/// Euclidean projection onto {z : ||z||_1 <= radius}.
std::vector<double> project_l1ball(std::span<const double> x, double radius);
std::vector<double> project_zero(std::span<const double> x);
std::vector<double> project_ball(std::span<const double> x, const BallSpec& ball);

/// Signature shared by all proximity operators: (x, gamma) -> prox_{gamma f}(x).
/// Projections ignore gamma.
using ProxFn = std::function<std::vector<double>(std::span<const double>, double)>;

/// prox of gamma f^* via Moreau: x - gamma * prox_{f/gamma}(x / gamma).
std::vector<double> prox_conjugate(const ProxFn& prox_f, std::span<const double> x, double gamma);

} // namespace geosstv
