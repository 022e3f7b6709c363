#include <gtest/gtest.h>

#include <random>

#include "geosstv/linops.hpp"
#include "geosstv/solver.hpp"
#include "phantom.hpp"
#include "random_fields.hpp"
#include "reference.hpp"

namespace geosstv {
namespace {

using testing::random_field;

// Frozen from tests/oracles/geosstv_ramp_oracle.py (conic solver on the same primal form).
constexpr double kRampOracleValue = 2.944962977407;

HsCube ramp4x4() {
    HsCube u(CubeShape(4, 4, 1));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) u.at(i, j, 0) = (i + 2.0 * j) / 10.0;
    return u;
}

TEST(StepSizes, Defaults) {
    const StepSizes g = default_step_sizes();
    EXPECT_EQ(g.u, 1.0 / 13.0);
    EXPECT_EQ(g.w1, 1.0 / 4.0);
    EXPECT_EQ(g.w2, 1.0 / 4.0);
    EXPECT_EQ(g.s, 1.0);
    EXPECT_EQ(g.t, 1.0 / 3.0);
    for (double d : {g.y1, g.y2, g.y3, g.y4}) EXPECT_EQ(d, 1.0 / 5.0);
    EXPECT_NO_THROW(g.validate());
    StepSizes bad = g;
    bad.t = 0.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(StepSizes, RuleSingleCoupling) {
    CouplingNorms c{1, 1, {{{0, 0}, Rational(4)}}};
    const RuleSteps r = step_sizes_from_rule(c);
    EXPECT_EQ(r.primal[0], Rational(1, 4));
    EXPECT_EQ(r.dual[0], Rational(1));
}

TEST(StepSizes, RuleReproducesDefaultsExactly) {
    const RuleSteps r = step_sizes_from_rule(geosstv_coupling_bounds());
    const std::vector<Rational> primal{Rational(1, 13), Rational(1, 4), Rational(1, 4), Rational(1),
                                       Rational(1, 3)};
    EXPECT_EQ(r.primal, primal);
    EXPECT_EQ(r.dual, std::vector<Rational>(4, Rational(1, 5)));
    EXPECT_EQ(to_step_sizes(r), default_step_sizes());
}

TEST(StepSizes, RuleBoundsDominateColumnSumsOrNorms) {
    // difference and identity blocks are charged their largest column absolute sum,
    // the realignment block its squared spectral norm
    const CubeShape s(6, 6, 3);
    for (Operator op : {Operator::Identity, Operator::Dv, Operator::D, Operator::DDs}) {
        const Eigen::MatrixXd m = testing::definition_matrix(op, s);
        const double col_sum = m.cwiseAbs().colwise().sum().maxCoeff();
        EXPECT_EQ(boost::rational_cast<double>(*step_rule_opnorm_sq(op)), col_sum) << operator_name(op);
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(testing::definition_matrix(Operator::Lt, s));
    const double sq = svd.singularValues()(0) * svd.singularValues()(0);
    EXPECT_LE(sq, boost::rational_cast<double>(*step_rule_opnorm_sq(Operator::Lt)));
    EXPECT_FALSE(step_rule_opnorm_sq(Operator::Lup).has_value());
}

TEST(StepSizes, RuleErrors) {
    EXPECT_THROW(step_sizes_from_rule(CouplingNorms{}), std::invalid_argument);
    CouplingNorms orphan{2, 1, {{{0, 0}, Rational(1)}}};
    EXPECT_THROW(step_sizes_from_rule(orphan), std::invalid_argument);
    CouplingNorms range{1, 1, {{{3, 0}, Rational(1)}}};
    EXPECT_THROW(step_sizes_from_rule(range), std::invalid_argument);
}

ProblemParams params_for(const HsCube& v, double alpha, double beta, double eps, double omega = 0.03) {
    ProblemParams p;
    p.omega = omega;
    p.alpha = alpha;
    p.beta = beta;
    p.epsilon = eps;
    p.observed = v;
    return p;
}

TEST(IterateOnce, ZeroIsAFixedPoint) {
    const CubeShape s(3, 3, 2);
    const auto p = params_for(HsCube(s), 1.0, 1.0, 1.0);
    const auto next = iterate_once(SolverState::zeros(s), p, default_step_sizes());
    for (double x : next.u.values()) EXPECT_EQ(x, 0.0);
    for (double x : next.w1.values()) EXPECT_EQ(x, 0.0);
    for (double x : next.w2.values()) EXPECT_EQ(x, 0.0);
    for (double x : next.y1.values()) EXPECT_EQ(x, 0.0);
    for (double x : next.y4.values()) EXPECT_EQ(x, 0.0);
    EXPECT_EQ(next.iteration, 1u);
}

SolverState random_state(const CubeShape& s, std::mt19937_64& gen) {
    return {random_field<1>(s, gen, -0.2, 1.2), random_field<6>(s, gen), random_field<6>(s, gen),
            random_field<1>(s, gen),            random_field<1>(s, gen), random_field<2>(s, gen),
            random_field<2>(s, gen),            random_field<1>(s, gen), random_field<1>(s, gen),
            0,                                  0.0};
}

void compare_with_reference(std::uint64_t seed, double omega) {
    std::mt19937_64 gen(seed);
    const CubeShape s(2, 2, 2);
    const auto v = random_field<1>(s, gen, 0.0, 1.0);
    const auto p = params_for(v, 0.6, 0.5, 0.4, omega);
    const auto g = default_step_sizes();
    const SolverState st = random_state(s, gen);

    const SolverState got = iterate_once(st, p, g);

    std::vector<Eigen::VectorXd> x{testing::to_eigen(st.u.values()), testing::to_eigen(st.w1.values()),
                                   testing::to_eigen(st.w2.values()), testing::to_eigen(st.s.values()),
                                   testing::to_eigen(st.t.values())};
    std::vector<Eigen::VectorXd> y{testing::to_eigen(st.y1.values()), testing::to_eigen(st.y2.values()),
                                   testing::to_eigen(st.y3.values()), testing::to_eigen(st.y4.values())};
    testing::denoise_sweep(s, p, g).run(x, y);

    const auto check = [](std::span<const double> a, const Eigen::VectorXd& b, const char* name) {
        ASSERT_EQ(a.size(), static_cast<std::size_t>(b.size())) << name;
        for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12) << name << "[" << k << "]";
    };
    check(got.u.values(), x[0], "u");
    check(got.w1.values(), x[1], "w1");
    check(got.w2.values(), x[2], "w2");
    check(got.s.values(), x[3], "s");
    check(got.t.values(), x[4], "t");
    check(got.y1.values(), y[0], "y1");
    check(got.y2.values(), y[1], "y2");
    check(got.y3.values(), y[2], "y3");
    check(got.y4.values(), y[3], "y4");
}

TEST(IterateOnce, MatchesDenseReferenceSweep) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        SCOPED_TRACE(seed);
        compare_with_reference(seed, 0.03);
    }
}

TEST(IterateOnce, MatchesDenseReferenceSweepWithoutFirstOrderTerm) {
    compare_with_reference(9, 0.0);
}

TEST(IterateOnce, RejectsShapeMismatch) {
    const auto p = params_for(HsCube(CubeShape(3, 3, 1)), 1, 1, 1);
    EXPECT_THROW(iterate_once(SolverState::zeros(CubeShape(2, 2, 1)), p, default_step_sizes()),
                 std::invalid_argument);
}

TEST(Params, Validation) {
    auto p = params_for(HsCube(CubeShape(2, 2, 1)), 1, 1, 1);
    EXPECT_NO_THROW(p.validate());
    p.alpha = -1;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.alpha = 1;
    p.omega = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(p.validate(), std::invalid_argument);
    EXPECT_THROW(params_for(HsCube(), 1, 1, 1).validate(), std::invalid_argument);
}

TEST(Solve, CleanObservationWithLargeBallIsFeasible) {
    const auto clean = testing::phantom_cube(8, 8, 4);
    const auto p = params_for(clean, 0.5, 0.5, 1.0);
    const auto r = solve(p, default_step_sizes(), {});
    EXPECT_TRUE(r.report.converged);
    EXPECT_LE(norm2(r.u + r.s + r.t - clean), 1.0 * (1 + 1e-6));
    const auto& res = r.report.constraint_residuals;
    EXPECT_LE(res.at("sparse_l1_excess"), 0.5 * 1e-6);
    EXPECT_LE(res.at("stripe_l1_excess"), 0.5 * 1e-6);
    EXPECT_LE(res.at("fidelity_excess"), 1e-6);
    EXPECT_LE(res.at("box_violation"), 0.0);
    EXPECT_LE(res.at("stripe_vertical"), 1e-12);
    EXPECT_LE(res.at("split_first_order"), 1e-6 * norm2(diff_spatial(r.u)));
    EXPECT_LE(res.at("split_second_order"), 1e-6 * std::max(1e-12, norm2(diff_spatial_spectral(r.u))));
    EXPECT_FALSE(r.report.raw_constraint_residuals.empty());
}

TEST(Solve, SingleSweepContract) {
    const auto clean = testing::phantom_cube(4, 4, 2);
    const auto p = params_for(clean, 0.1, 0.1, 0.1);
    SolveOptions o;
    o.max_iter = 1;
    o.tol = 1e10;
    const auto r = solve(p, default_step_sizes(), o);
    EXPECT_EQ(r.report.iterations, 1u);
    EXPECT_TRUE(r.report.converged);
    EXPECT_EQ(r.report.rel_change_history.size(), 1u);
    ASSERT_EQ(r.report.samples.size(), 1u);
    EXPECT_EQ(r.state.iteration, 1u);
}

TEST(Solve, FirstSweepDoesNotStopTheLoop) {
    const auto clean = testing::phantom_cube(4, 4, 2);
    SolveOptions o;
    o.max_iter = 5;
    o.tol = 1e-300;
    const auto r = solve(params_for(clean, 0.1, 0.1, 0.1), default_step_sizes(), o);
    EXPECT_EQ(r.report.rel_change_history.front(), 0.0);
    EXPECT_EQ(r.report.iterations, 5u);
    EXPECT_FALSE(r.report.converged);
}

TEST(Solve, SamplesFollowStride) {
    const auto clean = testing::phantom_cube(4, 4, 2);
    SolveOptions o;
    o.max_iter = 25;
    o.tol = 1e-300;
    o.residual_stride = 10;
    const auto r = solve(params_for(clean, 0.1, 0.1, 0.1), default_step_sizes(), o);
    ASSERT_EQ(r.report.samples.size(), 3u);
    EXPECT_EQ(r.report.samples[0].iteration, 10u);
    EXPECT_EQ(r.report.samples[2].iteration, 25u);
    EXPECT_EQ(r.report.objective_history.size(), 3u);
    const auto csv = convergence_csv(r.report);
    EXPECT_EQ(csv.rfind("iteration,rel_change,objective,sparse_l1_excess", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Solve, DivergenceIsReported) {
    const auto clean = testing::phantom_cube(4, 4, 2);
    StepSizes g = default_step_sizes();
    g.y1 = g.y2 = 1e300;
    g.u = 1e300;
    SolveOptions o;
    o.max_iter = 50;
    o.tol = 1e-300;
    EXPECT_THROW(solve(params_for(clean, 0.1, 0.1, 0.1), g, o), DivergenceError);
}

TEST(Solve, OptionValidation) {
    const auto p = params_for(testing::phantom_cube(4, 4, 1), 0.1, 0.1, 0.1);
    SolveOptions o;
    o.tol = 0.0;
    EXPECT_THROW(solve(p, default_step_sizes(), o), std::invalid_argument);
    o.tol = 1e-5;
    o.max_iter = 0;
    EXPECT_THROW(solve(p, default_step_sizes(), o), std::invalid_argument);
}

TEST(Solve, DeterministicReport) {
    const auto p = params_for(testing::phantom_cube(6, 6, 2), 0.1, 0.1, 0.2);
    SolveOptions o;
    o.max_iter = 60;
    const auto a = solve(p, default_step_sizes(), o);
    const auto b = solve(p, default_step_sizes(), o);
    EXPECT_EQ(a.report, b.report);
    EXPECT_EQ(a.u, b.u);
}

TEST(RestoreFeasibility, ProjectsOntoConstraints) {
    std::mt19937_64 gen(5);
    const CubeShape s(5, 4, 3);
    const auto v = random_field<1>(s, gen, 0.0, 1.0);
    const auto p = params_for(v, 2.0, 3.0, 0.5);
    SolverState st = random_state(s, gen);
    st.s = HsCube(s, project_l1ball(st.s.values(), 2.0));
    st.t = HsCube(s, project_l1ball(st.t.values(), 3.0));
    const auto out = restore_feasibility(st, p);
    EXPECT_EQ(norm2(diff_v(out.t)), 0.0);
    EXPECT_LE(norm1(out.t), 3.0 * (1 + 1e-12));
    EXPECT_EQ(out.s, st.s);
    EXPECT_LE(norm2(out.u + out.s + out.t - v), 0.5 * (1 + 1e-12));
    for (double x : out.u.values()) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
    }
    EXPECT_LE(norm2(interp_split_adjoint(out.w1) - diff_spatial(out.u)), 1e-12);
    EXPECT_LE(norm2(interp_split_adjoint(out.w2) - diff_spatial_spectral(out.u)), 1e-12);
}

TEST(RestoreFeasibility, LeavesFeasiblePointsAlone) {
    const auto clean = testing::phantom_cube(4, 4, 2);
    const auto p = params_for(clean, 1.0, 1.0, 0.1);
    SolverState st = SolverState::initial(p);
    const auto out = restore_feasibility(st, p);
    EXPECT_EQ(out.u, st.u);
    EXPECT_EQ(out.t, st.t);
}

TEST(Objective, WeightedGroupNorms) {
    const CubeShape s(2, 2, 1);
    SolverState st = SolverState::zeros(s);
    st.w1.block(0)[0] = 3;
    st.w1.block(1)[0] = 4;
    st.w2.block(2)[3] = 1;
    EXPECT_DOUBLE_EQ(objective_value(st, 0.5), 3.5);
}

TEST(GeoSSTVValue, ConstantCubeIsZero) {
    const auto v = geosstv_value(cube_new(CubeShape(4, 4, 3), 0.42), 1.0);
    EXPECT_EQ(v.value, 0.0);
    EXPECT_TRUE(v.converged);
}

TEST(GeoSSTVValue, SpectrallyFlatCubeWithoutFirstOrderWeight) {
    HsCube u(CubeShape(4, 4, 3));
    for (std::size_t b = 0; b < 3; ++b)
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) u.at(i, j, b) = 0.1 * i * j;
    EXPECT_EQ(geosstv_value(u, 0.0).value, 0.0);
}

TEST(GeoSSTVValue, RampMatchesConicSolver) {
    const auto v = geosstv_value(ramp4x4(), 1.0);
    EXPECT_TRUE(v.converged);
    EXPECT_NEAR(v.value, kRampOracleValue, 1e-3 * kRampOracleValue);
    EXPECT_LE(v.residual, 1e-6);
}

TEST(GeoSSTVValue, Errors) {
    EXPECT_THROW(geosstv_value(ramp4x4(), -1.0), std::invalid_argument);
    EXPECT_THROW(geosstv_value(ramp4x4(), 1.0, 0.0), std::invalid_argument);
}

} // namespace
} // namespace geosstv
