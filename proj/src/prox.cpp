#include "geosstv/prox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace geosstv {

void BoxBounds::validate() const {
    if (!(mu_min < mu_max)) {
        throw std::invalid_argument("box bounds require mu_min < mu_max");
    }
}

void BallSpec::validate(std::size_t length) const {
    if (!(radius >= 0.0)) {
        throw std::invalid_argument("ball radius must be nonnegative");
    }
    if (kind == BallKind::L2 && (!center || center->size() != length)) {
        throw std::invalid_argument("l2 ball needs a center of matching length");
    }
    if (kind == BallKind::L1 && center) {
        throw std::invalid_argument("the l1 ball is zero-centered; center must be empty");
    }
}

namespace {

void check_groups(std::size_t size, std::size_t block_len) {
    if (block_len == 0 || size % (2 * block_len) != 0) {
        throw std::invalid_argument("prox_l12: length " + std::to_string(size) +
                                    " is not a whole number of pair blocks of " +
                                    std::to_string(block_len));
    }
}

} // namespace

std::vector<double> prox_l12(std::span<const double> x, double gamma, std::size_t block_len) {
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("prox_l12: gamma must be positive");
    }
    check_groups(x.size(), block_len);
    std::vector<double> out(x.size());
    for (std::size_t base = 0; base < x.size(); base += 2 * block_len) {
        for (std::size_t k = 0; k < block_len; ++k) {
            const double a = x[base + k];
            const double b = x[base + block_len + k];
            const double norm = std::hypot(a, b);
            // max{1 - gamma/0, 0} is taken as 0
            const double shrink = norm > gamma ? 1.0 - gamma / norm : 0.0;
            out[base + k] = shrink * a;
            out[base + block_len + k] = shrink * b;
        }
    }
    return out;
}

GradientPairField prox_l12(const GradientPairField& x, double gamma) {
    return {x.shape(), prox_l12(x.values(), gamma, x.shape().voxels())};
}

SplitGradientField prox_l12(const SplitGradientField& x, double gamma) {
    return {x.shape(), prox_l12(x.values(), gamma, x.shape().voxels())};
}

double norm_l12(std::span<const double> x, std::size_t block_len) {
    check_groups(x.size(), block_len);
    double acc = 0.0;
    for (std::size_t base = 0; base < x.size(); base += 2 * block_len) {
        for (std::size_t k = 0; k < block_len; ++k) {
            acc += std::hypot(x[base + k], x[base + block_len + k]);
        }
    }
    return acc;
}

std::vector<double> project_box(std::span<const double> x, const BoxBounds& bounds) {
    bounds.validate();
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        out[k] = std::clamp(x[k], bounds.mu_min, bounds.mu_max);
    }
    return out;
}

std::vector<double> project_l2ball(std::span<const double> x, std::span<const double> center,
                                   double radius) {
    if (!(radius >= 0.0)) {
        throw std::invalid_argument("project_l2ball: radius must be nonnegative");
    }
    if (center.size() != x.size()) {
        throw std::invalid_argument("project_l2ball: center length mismatch");
    }
    double dist_sq = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - center[k];
        dist_sq += d * d;
    }
    const double dist = std::sqrt(dist_sq);
    if (dist <= radius) {
        return {x.begin(), x.end()};
    }
    const double scale = radius / dist;
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        out[k] = center[k] + scale * (x[k] - center[k]);
    }
    return out;
}

std::vector<double> project_l1ball(std::span<const double> x, double radius) {
    if (!(radius >= 0.0)) {
        throw std::invalid_argument("project_l1ball: radius must be nonnegative");
    }
    if (norm1(x) <= radius) {
        return {x.begin(), x.end()};
    }
    std::vector<double> out(x.size(), 0.0);
    if (radius == 0.0) {
        return out;
    }

    // Threshold search on |x| for the simplex of size `radius`: a single
    // forward pass keeps a candidate active set whose running pivot only
    // grows, then a cleanup pass drops entries that fall below the pivot.
    std::vector<double> active;
    std::vector<double> deferred;
    active.reserve(x.size());
    double tau = 0.0;
    bool started = false;
    for (double v : x) {
        const double a = std::abs(v);
        if (!started) {
            active.push_back(a);
            tau = a - radius;
            started = true;
            continue;
        }
        if (a > tau) {
            tau += (a - tau) / static_cast<double>(active.size() + 1);
            if (tau > a - radius) {
                active.push_back(a);
            } else {
                deferred.insert(deferred.end(), active.begin(), active.end());
                active.assign(1, a);
                tau = a - radius;
            }
        }
    }
    for (double a : deferred) {
        if (a > tau) {
            active.push_back(a);
            tau += (a - tau) / static_cast<double>(active.size());
        }
    }
    std::size_t before = 0;
    do {
        before = active.size();
        std::size_t keep = 0;
        for (std::size_t k = 0; k < active.size(); ++k) {
            const double a = active[k];
            if (a <= tau) {
                const auto remaining = static_cast<double>(active.size() - (k - keep) - 1);
                // remaining counts entries not yet dropped after removing this one
                tau += (tau - a) / remaining;
            } else {
                active[keep++] = a;
            }
        }
        active.resize(keep);
    } while (active.size() != before);

    for (std::size_t k = 0; k < x.size(); ++k) {
        const double mag = std::abs(x[k]) - tau;
        if (mag > 0.0) {
            out[k] = std::copysign(mag, x[k]);
        }
    }
    return out;
}

std::vector<double> project_zero(std::span<const double> x) {
    return std::vector<double>(x.size(), 0.0);
}

std::vector<double> project_ball(std::span<const double> x, const BallSpec& ball) {
    ball.validate(x.size());
    if (ball.kind == BallKind::L1) {
        return project_l1ball(x, ball.radius);
    }
    return project_l2ball(x, *ball.center, ball.radius);
}

std::vector<double> prox_conjugate(const ProxFn& prox_f, std::span<const double> x, double gamma) {
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("prox_conjugate: gamma must be positive");
    }
    std::vector<double> scaled(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        scaled[k] = x[k] / gamma;
    }
    const auto inner = prox_f(scaled, 1.0 / gamma);
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        out[k] = x[k] - gamma * inner[k];
    }
    return out;
}

} // namespace geosstv
