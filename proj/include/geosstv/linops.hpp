#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geosstv/cube.hpp"

namespace geosstv {

// Forward differences with Neumann boundary: the trailing row / column / band
// of each output is zero.
HsCube diff_v(const HsCube& u);
HsCube diff_h(const HsCube& u);
HsCube diff_s(const HsCube& u);
HsCube diff_v_adjoint(const HsCube& y);
HsCube diff_h_adjoint(const HsCube& y);
HsCube diff_s_adjoint(const HsCube& y);

/// D u = (Dv u, Dh u).
GradientPairField diff_spatial(const HsCube& u);
HsCube diff_spatial_adjoint(const GradientPairField& y);

/// D Ds u: spatial differences of the spectral difference.
GradientPairField diff_spatial_spectral(const HsCube& u);
HsCube diff_spatial_spectral_adjoint(const GradientPairField& y);

// Realignment of a gradient pair field onto the three half-shifted grids.
// With y_v living at (i+1/2, j) and y_h at (i, j+1/2):
//   up:     y_v kept, y_h is the 4-point average onto (i+1/2, j)
//   side:   y_h kept, y_v is the 4-point average onto (i, j+1/2)
//   center: both components are 2-point averages onto (i, j)
// Samples outside the band contribute zero; divisors stay at 4 and 2.
GradientPairField interp_up(const GradientPairField& y);
GradientPairField interp_side(const GradientPairField& y);
GradientPairField interp_center(const GradientPairField& y);
GradientPairField interp_up_adjoint(const GradientPairField& z);
GradientPairField interp_side_adjoint(const GradientPairField& z);
GradientPairField interp_center_adjoint(const GradientPairField& z);

/// L y = (L_up y, L_side y, L_center y).
SplitGradientField interp_split_forward(const GradientPairField& y);
/// L^T w = L_up^T w_up + L_side^T w_side + L_center^T w_center.
GradientPairField interp_split_adjoint(const SplitGradientField& w);

enum class Operator {
    Identity,
    Dv,
    Dh,
    Ds,
    D,
    DDs,
    Lup,
    Lside,
    Lcenter,
    Lg,  // L on a single band (grayscale); domain 2*n1*n2
    L,
    Lt,  // L^T as an operator in its own right
};

struct LinearOperatorSpec {
    Operator op;
    std::size_t domain_length;
    std::size_t codomain_length;
};

LinearOperatorSpec describe(Operator op, const CubeShape& shape);
std::string_view operator_name(Operator op);
/// Accepts the names printed by operator_name (case sensitive) plus "identity".
Operator parse_operator(std::string_view name);
std::vector<Operator> all_operators();

/// Flat-vector application, for generic tooling (norm estimates, dense checks).
std::vector<double> apply(Operator op, const CubeShape& shape, std::span<const double> x);
std::vector<double> adjoint_of(Operator op, const CubeShape& shape, std::span<const double> y);

/// Power iteration on A^T A from a seeded unit vector. Returns ||A x_k|| for the
/// final unit iterate, a lower bound on ||A||_op that grows with iters.
double estimate_opnorm(Operator op, const CubeShape& shape, int iters = 100,
                       std::uint64_t seed = 0);

/// Worst-case bound on ||A||_op^2 over all shapes.
double opnorm_sq_bound(Operator op);

} // namespace geosstv
