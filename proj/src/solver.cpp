#include "geosstv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "geosstv/linops.hpp"

namespace geosstv {

namespace {

constexpr double kMachineFloor = 1e-30;

bool finite_and_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

template <std::size_t B>
Field<B> extrapolate(const Field<B>& next, const Field<B>& prev) {
    Field<B> out = next;
    combine(out.values(), 2.0, prev.values(), -1.0);
    return out;
}

template <std::size_t B>
Field<B> scaled_sum(const Field<B>& x, double a, const Field<B>& y) {
    Field<B> out = x;
    combine(out.values(), 1.0, y.values(), a);
    return out;
}

} // namespace

void ProblemParams::validate() const {
    if (!finite_and_nonneg(omega)) {
        throw std::invalid_argument("omega must be finite and nonnegative");
    }
    if (!finite_and_nonneg(alpha) || !finite_and_nonneg(beta) || !finite_and_nonneg(epsilon)) {
        throw std::invalid_argument("radii alpha, beta, epsilon must be finite and nonnegative");
    }
    bounds.validate();
    if (observed.size() == 0) {
        throw std::invalid_argument("observed cube is empty");
    }
}

void StepSizes::validate() const {
    for (double g : {u, w1, w2, s, t, y1, y2, y3, y4}) {
        if (!(g > 0.0) || !std::isfinite(g)) {
            throw std::invalid_argument("step sizes must be positive and finite");
        }
    }
}

StepSizes default_step_sizes() {
    return {1.0 / 13.0, 1.0 / 4.0, 1.0 / 4.0, 1.0, 1.0 / 3.0, 1.0 / 5.0, 1.0 / 5.0, 1.0 / 5.0, 1.0 / 5.0};
}

RuleSteps step_sizes_from_rule(const CouplingNorms& couplings) {
    if (couplings.primal_count == 0) {
        throw std::invalid_argument("step_sizes_from_rule: no primal variables");
    }
    std::vector<Rational> row_sum(couplings.primal_count, Rational(0));
    for (const auto& [key, norm_sq] : couplings.opnorm_sq) {
        const auto [dual, primal] = key;
        if (primal >= couplings.primal_count || dual >= couplings.dual_count) {
            throw std::invalid_argument("step_sizes_from_rule: coupling index out of range");
        }
        if (norm_sq < Rational(0)) {
            throw std::invalid_argument("step_sizes_from_rule: negative squared norm");
        }
        row_sum[primal] += norm_sq;
    }
    RuleSteps steps;
    for (std::size_t i = 0; i < couplings.primal_count; ++i) {
        if (row_sum[i] == Rational(0)) {
            throw std::invalid_argument("step_sizes_from_rule: primal variable " + std::to_string(i) +
                                        " has no coupling");
        }
        steps.primal.push_back(Rational(1) / row_sum[i]);
    }
    steps.dual.assign(couplings.dual_count,
                      Rational(1, static_cast<std::int64_t>(couplings.primal_count)));
    return steps;
}

CouplingNorms geosstv_coupling_bounds() {
    enum { U, W1, W2, S, T };
    enum { Y1, Y2, Y3, Y4 };
    CouplingNorms c;
    c.primal_count = 5;
    c.dual_count = 4;
    c.opnorm_sq = {
        {{Y1, U}, Rational(4)},   // D
        {{Y1, W1}, Rational(4)},  // -L^T
        {{Y2, U}, Rational(8)},   // D Ds
        {{Y2, W2}, Rational(4)},  // -L^T
        {{Y3, T}, Rational(2)},   // Dv
        {{Y4, U}, Rational(1)},
        {{Y4, S}, Rational(1)},
        {{Y4, T}, Rational(1)},
    };
    return c;
}

std::optional<Rational> step_rule_opnorm_sq(Operator op) {
    switch (op) {
    case Operator::Identity: return Rational(1);
    case Operator::Dv: return Rational(2);
    case Operator::D: return Rational(4);
    case Operator::DDs: return Rational(8);
    case Operator::L:
    case Operator::Lt: return Rational(4);
    default: return std::nullopt;
    }
}

StepSizes to_step_sizes(const RuleSteps& steps) {
    if (steps.primal.size() != 5 || steps.dual.size() != 4) {
        throw std::invalid_argument("to_step_sizes: expected 5 primal and 4 dual steps");
    }
    const auto d = [](const Rational& r) { return boost::rational_cast<double>(r); };
    return {d(steps.primal[0]), d(steps.primal[1]), d(steps.primal[2]),
            d(steps.primal[3]), d(steps.primal[4]), d(steps.dual[0]),
            d(steps.dual[1]),   d(steps.dual[2]),   d(steps.dual[3])};
}

SolverState SolverState::zeros(const CubeShape& shape) {
    return {HsCube(shape), SplitGradientField(shape), SplitGradientField(shape), HsCube(shape),
            HsCube(shape), GradientPairField(shape), GradientPairField(shape), HsCube(shape),
            HsCube(shape), 0, 0.0};
}

SolverState SolverState::initial(const ProblemParams& params) {
    SolverState state = zeros(params.observed.shape());
    state.u = HsCube(params.observed.shape(), project_box(params.observed.values(), params.bounds));
    return state;
}

void SolverState::check_consistent() const {
    const CubeShape& sh = u.shape();
    if (!(w1.shape() == sh && w2.shape() == sh && s.shape() == sh && t.shape() == sh &&
          y1.shape() == sh && y2.shape() == sh && y3.shape() == sh && y4.shape() == sh)) {
        throw std::invalid_argument("solver state fields disagree on shape");
    }
}

SolverState iterate_once(const SolverState& state, const ProblemParams& params,
                         const StepSizes& steps) {
    state.check_consistent();
    if (!(params.observed.shape() == state.shape())) {
        throw std::invalid_argument("observed cube shape " + params.observed.shape().to_string() +
                                    " does not match state shape " + state.shape().to_string());
    }
    const CubeShape& shape = state.shape();

    // primal
    HsCube grad_u = diff_spatial_adjoint(state.y1);
    combine(grad_u.values(), 1.0, diff_spatial_spectral_adjoint(state.y2).values(), 1.0);
    combine(grad_u.values(), 1.0, state.y4.values(), 1.0);
    HsCube u = scaled_sum(state.u, -steps.u, grad_u);
    u = HsCube(shape, project_box(u.values(), params.bounds));

    SplitGradientField w1 = scaled_sum(state.w1, steps.w1, interp_split_forward(state.y1));
    if (params.omega > 0.0) {
        w1 = prox_l12(w1, steps.w1 * params.omega);
    }
    SplitGradientField w2 =
        prox_l12(scaled_sum(state.w2, steps.w2, interp_split_forward(state.y2)), steps.w2);

    const HsCube s_arg = scaled_sum(state.s, -steps.s, state.y4);
    HsCube s(shape, project_l1ball(s_arg.values(), params.alpha));

    HsCube grad_t = diff_v_adjoint(state.y3);
    combine(grad_t.values(), 1.0, state.y4.values(), 1.0);
    const HsCube t_arg = scaled_sum(state.t, -steps.t, grad_t);
    HsCube t(shape, project_l1ball(t_arg.values(), params.beta));

    // extrapolation
    const HsCube u_bar = extrapolate(u, state.u);
    const SplitGradientField w1_bar = extrapolate(w1, state.w1);
    const SplitGradientField w2_bar = extrapolate(w2, state.w2);
    const HsCube s_bar = extrapolate(s, state.s);
    const HsCube t_bar = extrapolate(t, state.t);

    // dual; rows 1-3 are indicators of {0}, whose conjugate prox is the identity
    GradientPairField y1 = state.y1;
    {
        GradientPairField r = diff_spatial(u_bar);
        combine(r.values(), 1.0, interp_split_adjoint(w1_bar).values(), -1.0);
        combine(y1.values(), 1.0, r.values(), steps.y1);
    }
    GradientPairField y2 = state.y2;
    {
        GradientPairField r = diff_spatial_spectral(u_bar);
        combine(r.values(), 1.0, interp_split_adjoint(w2_bar).values(), -1.0);
        combine(y2.values(), 1.0, r.values(), steps.y2);
    }
    HsCube y3 = scaled_sum(state.y3, steps.y3, diff_v(t_bar));

    HsCube y4_arg = u_bar + s_bar + t_bar;
    combine(y4_arg.values(), steps.y4, state.y4.values(), 1.0);
    const std::span<const double> center = params.observed.values();
    const double eps = params.epsilon;
    HsCube y4(shape, prox_conjugate(
                         [center, eps](std::span<const double> x, double) {
                             return project_l2ball(x, center, eps);
                         },
                         y4_arg.values(), steps.y4));

    const double change = norm2(u - state.u);
    const double base = std::max(norm2(state.u), kMachineFloor);

    return {std::move(u), std::move(w1), std::move(w2), std::move(s),  std::move(t),
            std::move(y1), std::move(y2), std::move(y3), std::move(y4), state.iteration + 1,
            change / base};
}

const std::vector<std::string>& residual_names() {
    static const std::vector<std::string> names = {
        "sparse_l1_excess",   "stripe_l1_excess",  "stripe_vertical",    "fidelity_excess",
        "box_violation",      "split_first_order", "split_second_order",
    };
    return names;
}

std::map<std::string, double> constraint_residuals(const SolverState& state,
                                                   const ProblemParams& params) {
    std::map<std::string, double> out;
    out["sparse_l1_excess"] = norm1(state.s.values()) - params.alpha;
    out["stripe_l1_excess"] = norm1(state.t.values()) - params.beta;
    out["stripe_vertical"] = norm2(diff_v(state.t));
    out["fidelity_excess"] = norm2(state.u + state.s + state.t - params.observed) - params.epsilon;
    double box = 0.0;
    for (double x : state.u.values()) {
        box = std::max({box, params.bounds.mu_min - x, x - params.bounds.mu_max});
    }
    out["box_violation"] = box;
    out["split_first_order"] = norm2(interp_split_adjoint(state.w1) - diff_spatial(state.u));
    out["split_second_order"] =
        norm2(interp_split_adjoint(state.w2) - diff_spatial_spectral(state.u));
    return out;
}

double objective_value(const SolverState& state, double omega) {
    return omega * norm_l12(state.w1) + norm_l12(state.w2);
}

namespace {

HsCube column_means(const HsCube& t) {
    const CubeShape& sh = t.shape();
    HsCube out(sh);
    for (std::size_t b = 0; b < sh.n3(); ++b) {
        for (std::size_t j = 0; j < sh.n2(); ++j) {
            double sum = 0.0;
            for (std::size_t i = 0; i < sh.n1(); ++i) {
                sum += t.at(i, j, b);
            }
            const double m = sum / static_cast<double>(sh.n1());
            for (std::size_t i = 0; i < sh.n1(); ++i) {
                out.at(i, j, b) = m;
            }
        }
    }
    return out;
}

// argmin ||x - u|| over box ∩ {||x - c|| <= eps}. The minimizer is
// clip((1-θ)u + θc) for the smallest feasible θ in [0, 1].
HsCube nearest_in_box_ball(const HsCube& u, const HsCube& c, double eps, const BoxBounds& box) {
    const auto at = [&](double theta) {
        HsCube x = u;
        combine(x.values(), 1.0 - theta, c.values(), theta);
        return HsCube(u.shape(), project_box(x.values(), box));
    };
    const auto fits = [&](const HsCube& x) { return norm2(x - c) <= eps; };
    HsCube best = at(0.0);
    if (fits(best)) {
        return best;
    }
    double lo = 0.0, hi = 1.0;
    best = at(hi);
    if (!fits(best)) {
        return best;  // empty intersection; closest the box allows
    }
    for (int k = 0; k < 200 && hi - lo > 0.0; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        HsCube x = at(mid);
        if (fits(x)) {
            hi = mid;
            best = std::move(x);
        } else {
            lo = mid;
        }
    }
    return best;
}

// w - L (L^T L)^{-1} (L^T w - target). L^T L lies between I and 3I, so plain CG is quick.
SplitGradientField nearest_split(const SplitGradientField& w, const GradientPairField& target) {
    GradientPairField r = interp_split_adjoint(w) - target;
    const double scale = std::max(norm2(target), 1.0);
    GradientPairField z(w.shape());
    GradientPairField p = r;
    double rr = inner_product(r.values(), r.values());
    for (int k = 0; k < 500 && std::sqrt(rr) > 1e-15 * scale; ++k) {
        const GradientPairField q = interp_split_adjoint(interp_split_forward(p));
        const double a = rr / inner_product(p.values(), q.values());
        combine(z.values(), 1.0, p.values(), a);
        combine(r.values(), 1.0, q.values(), -a);
        const double rr_next = inner_product(r.values(), r.values());
        combine(p.values(), rr_next / rr, r.values(), 1.0);
        rr = rr_next;
    }
    return w - interp_split_forward(z);
}

} // namespace

SolverState restore_feasibility(const SolverState& state, const ProblemParams& params) {
    params.validate();
    state.check_consistent();
    SolverState out = state;
    out.t = column_means(state.t);
    const HsCube center = params.observed - out.s - out.t;
    out.u = nearest_in_box_ball(state.u, center, params.epsilon, params.bounds);
    out.w1 = nearest_split(state.w1, diff_spatial(out.u));
    out.w2 = nearest_split(state.w2, diff_spatial_spectral(out.u));
    return out;
}

SolveResult solve(const ProblemParams& params, const StepSizes& steps, const SolveOptions& options) {
    params.validate();
    steps.validate();
    if (!(options.tol > 0.0)) {
        throw std::invalid_argument("solve: tol must be positive");
    }
    if (options.max_iter < 1) {
        throw std::invalid_argument("solve: max_iter must be at least 1");
    }
    const std::size_t stride = std::max<std::size_t>(options.residual_stride, 1);

    SolverState state = options.init ? *options.init : SolverState::initial(params);
    SolveReport report;
    const auto sample = [&] {
        ConvergenceSample row{state.iteration, state.last_rel_change,
                              objective_value(state, params.omega),
                              constraint_residuals(state, params)};
        report.objective_history.push_back(row.objective);
        report.samples.push_back(std::move(row));
    };

    for (std::size_t k = 0; k < options.max_iter; ++k) {
        try {
            state = iterate_once(state, params, steps);
        } catch (const std::invalid_argument& e) {
            // Field construction rejects NaN/Inf
            throw DivergenceError(state.iteration + 1,
                                  "non-finite iterate at iteration " +
                                      std::to_string(state.iteration + 1) + ": " + e.what());
        }
        if (!std::isfinite(state.last_rel_change)) {
            throw DivergenceError(state.iteration,
                                  "non-finite relative change at iteration " +
                                      std::to_string(state.iteration));
        }
        report.rel_change_history.push_back(state.last_rel_change);
        report.iterations = k + 1;
        const bool done = (k + 1 >= options.min_iter || k + 1 == options.max_iter) &&
                          state.last_rel_change < options.tol;
        if ((k + 1) % stride == 0 || done || k + 1 == options.max_iter) {
            sample();
        }
        if (done) {
            report.converged = true;
            break;
        }
    }
    if (options.restore_feasibility) {
        report.raw_constraint_residuals = constraint_residuals(state, params);
        state = restore_feasibility(state, params);
    }
    report.constraint_residuals = constraint_residuals(state, params);

    SolveResult result{state.u, state.s, state.t, std::move(report), std::move(state)};
    return result;
}

std::string convergence_csv(const SolveReport& report) {
    std::ostringstream out;
    out << "iteration,rel_change,objective";
    for (const auto& name : residual_names()) {
        out << ',' << name;
    }
    out << '\n' << std::setprecision(17);
    for (const auto& row : report.samples) {
        out << row.iteration << ',' << row.rel_change << ',' << row.objective;
        for (const auto& name : residual_names()) {
            const auto it = row.residuals.find(name);
            out << ',' << (it == row.residuals.end() ? 0.0 : it->second);
        }
        out << '\n';
    }
    return out.str();
}

GeoSSTVValue geosstv_value(const HsCube& u, double omega, double inner_tol,
                           std::size_t inner_max_iter) {
    if (!finite_and_nonneg(omega)) {
        throw std::invalid_argument("geosstv_value: omega must be finite and nonnegative");
    }
    if (!(inner_tol > 0.0) || inner_max_iter < 1) {
        throw std::invalid_argument("geosstv_value: need inner_tol > 0 and inner_max_iter >= 1");
    }
    const CubeShape& shape = u.shape();
    const GradientPairField target1 = diff_spatial(u);
    const GradientPairField target2 = diff_spatial_spectral(u);
    const double scale = std::max(1.0, norm2(target1) + norm2(target2));

    // Two primal blocks (w1, w2), each coupled to one dual row through -L^T.
    const double gw = 1.0 / 4.0;
    const double gz = 1.0 / 2.0;

    SplitGradientField w1(shape);
    SplitGradientField w2(shape);
    GradientPairField z1(shape);
    GradientPairField z2(shape);
    GeoSSTVValue out;
    const auto residual = [&] {
        return norm2(interp_split_adjoint(w1) - target1) + norm2(interp_split_adjoint(w2) - target2);
    };

    for (std::size_t it = 1; it <= inner_max_iter; ++it) {
        SplitGradientField w1_next = scaled_sum(w1, -gw, interp_split_forward(z1));
        if (omega > 0.0) {
            w1_next = prox_l12(w1_next, gw * omega);
        }
        SplitGradientField w2_next = prox_l12(scaled_sum(w2, -gw, interp_split_forward(z2)), gw);

        const double change = norm2(w1_next - w1) + norm2(w2_next - w2);
        const double size = std::max(1.0, norm2(w1_next) + norm2(w2_next));

        const SplitGradientField w1_bar = extrapolate(w1_next, w1);
        const SplitGradientField w2_bar = extrapolate(w2_next, w2);
        // conjugate prox of the indicator of {target}: x - gamma * target
        combine(z1.values(), 1.0, (interp_split_adjoint(w1_bar) - target1).values(), gz);
        combine(z2.values(), 1.0, (interp_split_adjoint(w2_bar) - target2).values(), gz);
        w1 = std::move(w1_next);
        w2 = std::move(w2_next);

        out.iterations = it;
        if (change <= inner_tol * size && residual() <= inner_tol * scale) {
            out.converged = true;
            break;
        }
    }
    out.value = omega * norm_l12(w1) + norm_l12(w2);
    out.residual = residual();
    return out;
}

} // namespace geosstv
