#include "geosstv/linops.hpp"

#include <cmath>
#include <stdexcept>

#include "geosstv/parallel.hpp"
#include "geosstv/random.hpp"

namespace geosstv {

namespace {

using Index = std::ptrdiff_t;

/// Read-only view of one band with zero padding outside [0,n1) x [0,n2).
struct BandView {
    const double* data;
    Index n1;
    Index n2;

    double operator()(Index i, Index j) const {
        if (i < 0 || j < 0 || i >= n1 || j >= n2) {
            return 0.0;
        }
        return data[i * n2 + j];
    }
};

template <typename Kernel>
void for_each_band(const CubeShape& shape, Kernel&& kernel) {
    parallel_for(shape.n3(), [&](std::size_t b) { kernel(b); });
}

// Differences along one axis with stride `step` inside a run of `len` samples.
// Forward: out[k] = x[k+1] - x[k] for k < len-1, out[len-1] = 0.
// Adjoint: the exact transpose, out[0] = -y[0], out[k] = y[k-1] - y[k], out[len-1] = y[len-2].
void diff_run(const double* x, double* out, std::size_t len, std::size_t step) {
    for (std::size_t k = 0; k + 1 < len; ++k) {
        out[k * step] = x[(k + 1) * step] - x[k * step];
    }
    out[(len - 1) * step] = 0.0;
}

void diff_run_adjoint(const double* y, double* out, std::size_t len, std::size_t step) {
    if (len == 1) {
        out[0] = 0.0;
        return;
    }
    out[0] = -y[0];
    for (std::size_t k = 1; k + 1 < len; ++k) {
        out[k * step] = y[(k - 1) * step] - y[k * step];
    }
    out[(len - 1) * step] = y[(len - 2) * step];
}

enum class Axis { Vertical, Horizontal, Spectral };

void diff_kernel(const CubeShape& shape, std::span<const double> in, std::span<double> out,
                 Axis axis, bool adjoint) {
    const auto run = adjoint ? diff_run_adjoint : diff_run;
    const std::size_t n1 = shape.n1();
    const std::size_t n2 = shape.n2();
    const std::size_t n3 = shape.n3();
    const std::size_t plane = shape.band_size();
    switch (axis) {
    case Axis::Vertical:
        for_each_band(shape, [&](std::size_t b) {
            for (std::size_t j = 0; j < n2; ++j) {
                const std::size_t base = b * plane + j;
                run(in.data() + base, out.data() + base, n1, n2);
            }
        });
        break;
    case Axis::Horizontal:
        for_each_band(shape, [&](std::size_t b) {
            for (std::size_t i = 0; i < n1; ++i) {
                const std::size_t base = b * plane + i * n2;
                run(in.data() + base, out.data() + base, n2, 1);
            }
        });
        break;
    case Axis::Spectral:
        parallel_for(n1, [&](std::size_t i) {
            for (std::size_t j = 0; j < n2; ++j) {
                const std::size_t base = i * n2 + j;
                run(in.data() + base, out.data() + base, n3, plane);
            }
        });
        break;
    }
}

HsCube diff(const HsCube& u, Axis axis, bool adjoint) {
    HsCube out(u.shape());
    diff_kernel(u.shape(), u.values(), out.values(), axis, adjoint);
    return out;
}

enum class Grid { Up, Side, Center };

// Realignment per band. Inputs and outputs are (vertical, horizontal) block pairs.
void interp_kernel(const CubeShape& shape, std::span<const double> in, std::span<double> out,
                   Grid grid, bool adjoint) {
    const std::size_t nv = shape.voxels();
    const std::size_t plane = shape.band_size();
    const auto n1 = static_cast<Index>(shape.n1());
    const auto n2 = static_cast<Index>(shape.n2());

    for_each_band(shape, [&](std::size_t b) {
        const BandView yv{in.data() + b * plane, n1, n2};
        const BandView yh{in.data() + nv + b * plane, n1, n2};
        double* ov = out.data() + b * plane;
        double* oh = out.data() + nv + b * plane;
        for (Index i = 0; i < n1; ++i) {
            for (Index j = 0; j < n2; ++j) {
                const Index k = i * n2 + j;
                switch (grid) {
                case Grid::Up:
                    ov[k] = yv(i, j);
                    oh[k] = adjoint
                                ? 0.25 * (yh(i, j) + yh(i, j + 1) + yh(i - 1, j) + yh(i - 1, j + 1))
                                : 0.25 * (yh(i, j - 1) + yh(i, j) + yh(i + 1, j - 1) + yh(i + 1, j));
                    break;
                case Grid::Side:
                    ov[k] = adjoint
                                ? 0.25 * (yv(i, j) + yv(i + 1, j) + yv(i, j - 1) + yv(i + 1, j - 1))
                                : 0.25 * (yv(i - 1, j) + yv(i, j) + yv(i - 1, j + 1) + yv(i, j + 1));
                    oh[k] = yh(i, j);
                    break;
                case Grid::Center:
                    if (adjoint) {
                        ov[k] = 0.5 * (yv(i, j) + yv(i + 1, j));
                        oh[k] = 0.5 * (yh(i, j) + yh(i, j + 1));
                    } else {
                        ov[k] = 0.5 * (yv(i - 1, j) + yv(i, j));
                        oh[k] = 0.5 * (yh(i, j - 1) + yh(i, j));
                    }
                    break;
                }
            }
        }
    });
}

GradientPairField interp(const GradientPairField& y, Grid grid, bool adjoint) {
    GradientPairField out(y.shape());
    interp_kernel(y.shape(), y.values(), out.values(), grid, adjoint);
    return out;
}

void check_length(std::span<const double> x, std::size_t expected, std::string_view what) {
    if (x.size() != expected) {
        throw std::invalid_argument(std::string(what) + ": expected length " +
                                    std::to_string(expected) + ", got " + std::to_string(x.size()));
    }
}

} // namespace

HsCube diff_v(const HsCube& u) { return diff(u, Axis::Vertical, false); }
HsCube diff_h(const HsCube& u) { return diff(u, Axis::Horizontal, false); }
HsCube diff_s(const HsCube& u) { return diff(u, Axis::Spectral, false); }
HsCube diff_v_adjoint(const HsCube& y) { return diff(y, Axis::Vertical, true); }
HsCube diff_h_adjoint(const HsCube& y) { return diff(y, Axis::Horizontal, true); }
HsCube diff_s_adjoint(const HsCube& y) { return diff(y, Axis::Spectral, true); }

GradientPairField diff_spatial(const HsCube& u) {
    GradientPairField out(u.shape());
    diff_kernel(u.shape(), u.values(), out.block(0), Axis::Vertical, false);
    diff_kernel(u.shape(), u.values(), out.block(1), Axis::Horizontal, false);
    return out;
}

HsCube diff_spatial_adjoint(const GradientPairField& y) {
    HsCube out(y.shape());
    HsCube tmp(y.shape());
    diff_kernel(y.shape(), y.block(0), out.values(), Axis::Vertical, true);
    diff_kernel(y.shape(), y.block(1), tmp.values(), Axis::Horizontal, true);
    combine(out.values(), 1.0, tmp.values(), 1.0);
    return out;
}

GradientPairField diff_spatial_spectral(const HsCube& u) { return diff_spatial(diff_s(u)); }

HsCube diff_spatial_spectral_adjoint(const GradientPairField& y) {
    return diff_s_adjoint(diff_spatial_adjoint(y));
}

GradientPairField interp_up(const GradientPairField& y) { return interp(y, Grid::Up, false); }
GradientPairField interp_side(const GradientPairField& y) { return interp(y, Grid::Side, false); }
GradientPairField interp_center(const GradientPairField& y) { return interp(y, Grid::Center, false); }
GradientPairField interp_up_adjoint(const GradientPairField& z) { return interp(z, Grid::Up, true); }
GradientPairField interp_side_adjoint(const GradientPairField& z) { return interp(z, Grid::Side, true); }
GradientPairField interp_center_adjoint(const GradientPairField& z) {
    return interp(z, Grid::Center, true);
}

SplitGradientField interp_split_forward(const GradientPairField& y) {
    const std::size_t pair = 2 * y.shape().voxels();
    SplitGradientField out(y.shape());
    const Grid grids[] = {Grid::Up, Grid::Side, Grid::Center};
    for (std::size_t g = 0; g < 3; ++g) {
        interp_kernel(y.shape(), y.values(), out.values().subspan(g * pair, pair), grids[g], false);
    }
    return out;
}

GradientPairField interp_split_adjoint(const SplitGradientField& w) {
    const std::size_t pair = 2 * w.shape().voxels();
    GradientPairField out(w.shape());
    GradientPairField tmp(w.shape());
    const Grid grids[] = {Grid::Up, Grid::Side, Grid::Center};
    for (std::size_t g = 0; g < 3; ++g) {
        interp_kernel(w.shape(), w.values().subspan(g * pair, pair), tmp.values(), grids[g], true);
        combine(out.values(), 1.0, tmp.values(), 1.0);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Generic operator dispatch

std::string_view operator_name(Operator op) {
    switch (op) {
    case Operator::Identity: return "identity";
    case Operator::Dv: return "Dv";
    case Operator::Dh: return "Dh";
    case Operator::Ds: return "Ds";
    case Operator::D: return "D";
    case Operator::DDs: return "DDs";
    case Operator::Lup: return "Lup";
    case Operator::Lside: return "Lside";
    case Operator::Lcenter: return "Lcenter";
    case Operator::Lg: return "Lg";
    case Operator::L: return "L";
    case Operator::Lt: return "Lt";
    }
    return "?";
}

std::vector<Operator> all_operators() {
    return {Operator::Identity, Operator::Dv,    Operator::Dh,      Operator::Ds,
            Operator::D,        Operator::DDs,   Operator::Lup,     Operator::Lside,
            Operator::Lcenter,  Operator::Lg,    Operator::L,       Operator::Lt};
}

Operator parse_operator(std::string_view name) {
    for (Operator op : all_operators()) {
        if (operator_name(op) == name) {
            return op;
        }
    }
    throw std::invalid_argument("unknown operator '" + std::string(name) + "'");
}

LinearOperatorSpec describe(Operator op, const CubeShape& shape) {
    const std::size_t n = shape.voxels();
    switch (op) {
    case Operator::Identity:
    case Operator::Dv:
    case Operator::Dh:
    case Operator::Ds:
        return {op, n, n};
    case Operator::D:
    case Operator::DDs:
        return {op, n, 2 * n};
    case Operator::Lup:
    case Operator::Lside:
    case Operator::Lcenter:
        return {op, 2 * n, 2 * n};
    case Operator::Lg:
        return {op, 2 * shape.band_size(), 6 * shape.band_size()};
    case Operator::L:
        return {op, 2 * n, 6 * n};
    case Operator::Lt:
        return {op, 6 * n, 2 * n};
    }
    throw std::logic_error("unhandled operator");
}

namespace {

template <std::size_t InBlocks, typename F>
std::vector<double> lift(F&& fn, const CubeShape& shape, std::span<const double> x) {
    const Field<InBlocks> in(shape, std::vector<double>(x.begin(), x.end()));
    return fn(in).vector();
}

std::vector<double> dispatch(Operator op, const CubeShape& shape, std::span<const double> x,
                             bool adjoint) {
    switch (op) {
    case Operator::Identity:
        return {x.begin(), x.end()};
    case Operator::Dv:
        return lift<1>(adjoint ? diff_v_adjoint : diff_v, shape, x);
    case Operator::Dh:
        return lift<1>(adjoint ? diff_h_adjoint : diff_h, shape, x);
    case Operator::Ds:
        return lift<1>(adjoint ? diff_s_adjoint : diff_s, shape, x);
    case Operator::D:
        return adjoint ? lift<2>(diff_spatial_adjoint, shape, x) : lift<1>(diff_spatial, shape, x);
    case Operator::DDs:
        return adjoint ? lift<2>(diff_spatial_spectral_adjoint, shape, x)
                       : lift<1>(diff_spatial_spectral, shape, x);
    case Operator::Lup:
        return lift<2>(adjoint ? interp_up_adjoint : interp_up, shape, x);
    case Operator::Lside:
        return lift<2>(adjoint ? interp_side_adjoint : interp_side, shape, x);
    case Operator::Lcenter:
        return lift<2>(adjoint ? interp_center_adjoint : interp_center, shape, x);
    case Operator::Lg:
        return dispatch(Operator::L, CubeShape(shape.n1(), shape.n2(), 1), x, adjoint);
    case Operator::L:
        return adjoint ? lift<6>(interp_split_adjoint, shape, x)
                       : lift<2>(interp_split_forward, shape, x);
    case Operator::Lt:
        return dispatch(Operator::L, shape, x, !adjoint);
    }
    throw std::logic_error("unhandled operator");
}

} // namespace

std::vector<double> apply(Operator op, const CubeShape& shape, std::span<const double> x) {
    check_length(x, describe(op, shape).domain_length, operator_name(op));
    return dispatch(op, shape, x, false);
}

std::vector<double> adjoint_of(Operator op, const CubeShape& shape, std::span<const double> y) {
    check_length(y, describe(op, shape).codomain_length, operator_name(op));
    return dispatch(op, shape, y, true);
}

double estimate_opnorm(Operator op, const CubeShape& shape, int iters, std::uint64_t seed) {
    if (iters < 1) {
        throw std::invalid_argument("estimate_opnorm: iters must be >= 1");
    }
    const auto spec = describe(op, shape);
    if (spec.domain_length == 0 || spec.codomain_length == 0) {
        throw std::invalid_argument("estimate_opnorm: zero-dimensional operator");
    }
    Rng rng(seed);
    std::vector<double> x(spec.domain_length);
    for (double& v : x) {
        v = rng.uniform(-1.0, 1.0);
    }
    double scale = norm2(x);
    for (double& v : x) {
        v /= scale;
    }

    double estimate = 0.0;
    for (int it = 0; it < iters; ++it) {
        const auto ax = apply(op, shape, x);
        estimate = norm2(ax);
        auto next = adjoint_of(op, shape, ax);
        scale = norm2(next);
        if (scale == 0.0) {
            break;
        }
        for (std::size_t k = 0; k < next.size(); ++k) {
            x[k] = next[k] / scale;
        }
    }
    return estimate;
}

double opnorm_sq_bound(Operator op) {
    switch (op) {
    case Operator::Identity: return 1.0;
    case Operator::Dv:
    case Operator::Dh:
    case Operator::Ds: return 4.0;
    case Operator::D: return 8.0;
    case Operator::DDs: return 32.0;
    case Operator::Lup:
    case Operator::Lside:
    case Operator::Lcenter: return 1.0;
    case Operator::Lg:
    case Operator::L:
    case Operator::Lt: return 3.0;
    }
    throw std::logic_error("unhandled operator");
}

} // namespace geosstv
