#pragma once

#include <cstdint>
#include <optional>

#include "geosstv/cube.hpp"

namespace geosstv {

struct NoiseSpec {
    double sigma = 0.0;      // Gaussian standard deviation
    double p_sparse = 0.0;   // salt-and-pepper rate
    double p_stripe = 0.0;   // per band, per column stripe probability
    double stripe_lo = -0.5;
    double stripe_hi = 0.5;
    double p_dead = 0.0;     // per band, per column deadline start probability
    int dead_width_min = 1;
    int dead_width_max = 3;
    std::uint64_t seed = 0;

    void validate() const;
    double mean_dead_width() const { return 0.5 * (dead_width_min + dead_width_max); }

    friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

struct RadiusSet {
    double alpha = 0.0;
    double beta = 0.0;
    double epsilon = 0.0;
    double rho = 1.0;
    double c_dead = 0.0;

    friend bool operator==(const RadiusSet&, const RadiusSet&) = default;
};

struct SimulationOutput {
    HsCube observed;
    HsCube sparse_truth;    // salt-and-pepper and deadline offsets
    HsCube stripe_truth;
    HsCube gaussian_truth;
    std::optional<int> case_id;  // empty for custom specs
    NoiseSpec spec;
};

/// Noise settings of the five benchmark cases (seed left at 0).
NoiseSpec case_spec(int case_id);

/// 0.98 for one nonzero radius (case 1), 0.95 for two (cases 2-4), 0.90 for three (case 5).
double rho_for_case(int case_id);

/// rho by the number of nonzero radii the spec implies: Gaussian (epsilon),
/// salt-and-pepper or deadline (alpha), stripe (beta). Matches rho_for_case.
double rho_for_spec(const NoiseSpec& spec);

/// Adds Gaussian, stripe, salt-and-pepper and deadline noise to `clean`.
///
/// Components are drawn from one seeded stream in that order. Salt-and-pepper
/// picks exactly round(p_sparse*N) voxels; deadlines then force whole column
/// runs of a band to zero. Both are stored in sparse_truth as the offset that
/// drives the observation to its target, so
/// observed == ((clean + gaussian) + stripe) + sparse exactly.
SimulationOutput simulate(const HsCube& clean, const NoiseSpec& spec);

/// 1 - exp(-mean_width * p_dead).
double deadline_coverage(double mean_width, double p_dead);

RadiusSet compute_radii(double observed_mean, const CubeShape& shape, const NoiseSpec& spec,
                        double rho);

} // namespace geosstv
