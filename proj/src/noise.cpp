#include "geosstv/noise.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

#include "geosstv/random.hpp"

namespace geosstv {

namespace {

bool is_rate(double p) { return p >= 0.0 && p <= 1.0; }

void check_case(int case_id) {
    if (case_id < 1 || case_id > 5) {
        throw std::out_of_range("noise case must be in 1..5, got " + std::to_string(case_id));
    }
}

} // namespace

void NoiseSpec::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("sigma must be finite and nonnegative");
    }
    if (!is_rate(p_sparse) || !is_rate(p_stripe) || !is_rate(p_dead)) {
        throw std::invalid_argument("noise rates must lie in [0, 1]");
    }
    if (!(stripe_lo <= stripe_hi) || !std::isfinite(stripe_lo) || !std::isfinite(stripe_hi)) {
        throw std::invalid_argument("stripe intensity range must satisfy lo <= hi");
    }
    if (dead_width_min < 1 || dead_width_min > dead_width_max) {
        throw std::invalid_argument("deadline widths must satisfy 1 <= min <= max");
    }
}

NoiseSpec case_spec(int case_id) {
    check_case(case_id);
    NoiseSpec spec;
    spec.sigma = 0.1;
    if (case_id == 2 || case_id == 5) {
        spec.p_sparse = 0.05;
    }
    if (case_id == 3 || case_id == 5) {
        spec.p_stripe = 0.05;
    }
    if (case_id == 4 || case_id == 5) {
        spec.p_dead = 0.01;
    }
    return spec;
}

double rho_for_case(int case_id) {
    check_case(case_id);
    if (case_id == 1) {
        return 0.98;
    }
    if (case_id == 5) {
        return 0.90;
    }
    return 0.95;
}

double rho_for_spec(const NoiseSpec& spec) {
    const int nonzero = (spec.sigma > 0.0 ? 1 : 0) + (spec.p_sparse > 0.0 || spec.p_dead > 0.0 ? 1 : 0) +
                        (spec.p_stripe > 0.0 ? 1 : 0);
    if (nonzero >= 3) {
        return 0.90;
    }
    return nonzero == 2 ? 0.95 : 0.98;
}

SimulationOutput simulate(const HsCube& clean, const NoiseSpec& spec) {
    spec.validate();
    const CubeShape& shape = clean.shape();
    const std::size_t n1 = shape.n1();
    const std::size_t n2 = shape.n2();
    const std::size_t n = shape.voxels();
    for (double x : clean.values()) {
        if (x < 0.0 || x > 1.0) {
            std::cerr << "warning: clean cube has values outside [0, 1]\n";
            break;
        }
    }

    Rng rng(spec.seed);
    HsCube gaussian(shape);
    HsCube stripe(shape);
    HsCube sparse(shape);

    if (spec.sigma > 0.0) {
        for (double& x : gaussian.values()) {
            x = spec.sigma * rng.normal();
        }
    }

    if (spec.p_stripe > 0.0) {
        for (std::size_t b = 0; b < shape.n3(); ++b) {
            for (std::size_t j = 0; j < n2; ++j) {
                if (rng.uniform() < spec.p_stripe) {
                    const double offset = rng.uniform(spec.stripe_lo, spec.stripe_hi);
                    for (std::size_t i = 0; i < n1; ++i) {
                        stripe.at(i, j, b) = offset;
                    }
                }
            }
        }
    }

    // Partial observation before sparse offsets; fixed association order.
    std::vector<double> partial(n);
    for (std::size_t k = 0; k < n; ++k) {
        partial[k] = (clean[k] + gaussian[k]) + stripe[k];
    }

    const auto impulses = static_cast<std::size_t>(std::llround(spec.p_sparse * static_cast<double>(n)));
    if (impulses > 0) {
        const auto picks = rng.sample_without_replacement(n, impulses);
        const std::size_t pepper = impulses / 2;
        for (std::size_t k = 0; k < picks.size(); ++k) {
            const double target = k < pepper ? 0.0 : 1.0;
            sparse[picks[k]] = target - partial[picks[k]];
        }
    }

    if (spec.p_dead > 0.0) {
        for (std::size_t b = 0; b < shape.n3(); ++b) {
            for (std::size_t j = 0; j < n2; ++j) {
                if (rng.uniform() < spec.p_dead) {
                    const auto width = static_cast<std::size_t>(
                        rng.uniform_int(spec.dead_width_min, spec.dead_width_max));
                    for (std::size_t c = j; c < std::min(j + width, n2); ++c) {
                        for (std::size_t i = 0; i < n1; ++i) {
                            const std::size_t k = voxel_index(shape, i, c, b);
                            sparse[k] = -partial[k];
                        }
                    }
                }
            }
        }
    }

    HsCube observed(shape);
    for (std::size_t k = 0; k < n; ++k) {
        observed[k] = partial[k] + sparse[k];
    }
    return {std::move(observed), std::move(sparse), std::move(stripe), std::move(gaussian),
            std::nullopt, spec};
}

double deadline_coverage(double mean_width, double p_dead) {
    if (!(mean_width >= 0.0) || !(p_dead >= 0.0)) {
        throw std::invalid_argument("deadline_coverage: inputs must be nonnegative");
    }
    return 1.0 - std::exp(-mean_width * p_dead);
}

RadiusSet compute_radii(double observed_mean, const CubeShape& shape, const NoiseSpec& spec,
                        double rho) {
    if (!(rho > 0.0 && rho <= 1.0)) {
        throw std::invalid_argument("rho must lie in (0, 1]");
    }
    spec.validate();
    const auto n = static_cast<double>(shape.voxels());
    RadiusSet r;
    r.rho = rho;
    r.c_dead = deadline_coverage(spec.mean_dead_width(), spec.p_dead);
    r.alpha = rho * n * (0.5 * spec.p_sparse + observed_mean * r.c_dead);
    r.beta = rho * (0.5 * n * spec.p_stripe * (1.0 - spec.p_sparse) * (1.0 - r.c_dead)) / 2.0;
    r.epsilon = rho * std::sqrt(spec.sigma * spec.sigma * n * (1.0 - spec.p_sparse) * (1.0 - r.c_dead));
    return r;
}

} // namespace geosstv
