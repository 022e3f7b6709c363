#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "geosstv/cube.hpp"
#include "geosstv/linops.hpp"
#include "geosstv/prox.hpp"

namespace geosstv {

/// Constrained GeoSSTV denoising problem:
///   min  omega*||w1||_{1,2} + ||w2||_{1,2}
///   s.t. ||s||_1 <= alpha, ||t||_1 <= beta, Dv t = 0, ||u+s+t-v||_2 <= epsilon,
///        mu_min <= u <= mu_max, L^T w1 = D u, L^T w2 = D Ds u.
struct ProblemParams {
    double omega = 0.03;
    double alpha = 0.0;
    double beta = 0.0;
    double epsilon = 0.0;
    BoxBounds bounds{};
    HsCube observed;

    void validate() const;
};

struct StepSizes {
    double u = 0.0;
    double w1 = 0.0;
    double w2 = 0.0;
    double s = 0.0;
    double t = 0.0;
    double y1 = 0.0;
    double y2 = 0.0;
    double y3 = 0.0;
    double y4 = 0.0;

    void validate() const;
    friend bool operator==(const StepSizes&, const StepSizes&) = default;
};

/// 1/13, 1/4, 1/4, 1, 1/3 for (u, w1, w2, s, t) and 1/5 for every dual.
StepSizes default_step_sizes();

using Rational = boost::rational<std::int64_t>;

/// Squared operator norms of the blocks A_{j,i} coupling dual row j to primal
/// variable i. Missing entries mean the block is zero.
struct CouplingNorms {
    std::size_t primal_count = 0;
    std::size_t dual_count = 0;
    std::map<std::pair<std::size_t, std::size_t>, Rational> opnorm_sq;  // (dual row, primal var)
};

struct RuleSteps {
    std::vector<Rational> primal;
    std::vector<Rational> dual;
};

/// primal_i = 1 / sum_j ||A_{j,i}||^2, dual_j = 1 / primal_count.
RuleSteps step_sizes_from_rule(const CouplingNorms& couplings);

/// Coupling table of the denoising problem (primal order u, w1, w2, s, t;
/// dual rows y1..y4) with the bound set that reproduces default_step_sizes:
/// each first-order difference counts 2 (its column absolute sum), so
/// ||Dv||^2 -> 2, ||D||^2 -> 4, ||D Ds||^2 -> 8, ||L^T||^2 -> 4, identity -> 1.
CouplingNorms geosstv_coupling_bounds();

StepSizes to_step_sizes(const RuleSteps& steps);

/// The squared norm geosstv_coupling_bounds assigns to an operator, if it is one of the couplings.
std::optional<Rational> step_rule_opnorm_sq(Operator op);

struct SolverState {
    HsCube u;
    SplitGradientField w1;
    SplitGradientField w2;
    HsCube s;
    HsCube t;
    GradientPairField y1;
    GradientPairField y2;
    HsCube y3;
    HsCube y4;
    std::size_t iteration = 0;
    double last_rel_change = 0.0;

    /// u = clip(v) to the box, everything else zero.
    static SolverState initial(const ProblemParams& params);
    /// All variables zero.
    static SolverState zeros(const CubeShape& shape);

    const CubeShape& shape() const { return u.shape(); }
    void check_consistent() const;
};

/// One preconditioned primal-dual sweep on the denoising problem.
SolverState iterate_once(const SolverState& state, const ProblemParams& params,
                         const StepSizes& steps);

/// Names of the residuals reported by constraint_residuals, in CSV column order.
const std::vector<std::string>& residual_names();

/// Evaluates every constraint of the problem at the given iterate.
std::map<std::string, double> constraint_residuals(const SolverState& state,
                                                   const ProblemParams& params);

/// ω||w1||_{1,2} + ||w2||_{1,2}.
double objective_value(const SolverState& state, double omega);

struct ConvergenceSample {
    std::size_t iteration = 0;
    double rel_change = 0.0;
    double objective = 0.0;
    std::map<std::string, double> residuals;

    friend bool operator==(const ConvergenceSample&, const ConvergenceSample&) = default;
};

struct SolveReport {
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> rel_change_history;   // one entry per iteration
    std::vector<double> objective_history;    // one entry per sample
    std::vector<ConvergenceSample> samples;   // every residual_stride iterations and at exit
    std::map<std::string, double> constraint_residuals;  // at the returned point
    /// Residuals of the last iterate before restore_feasibility; empty when it is off.
    std::map<std::string, double> raw_constraint_residuals;

    friend bool operator==(const SolveReport&, const SolveReport&) = default;
};

struct SolveOptions {
    double tol = 1e-5;
    std::size_t max_iter = 20000;
    std::size_t residual_stride = 50;
    /// The stopping test is skipped before this many sweeps (except at max_iter).
    /// From zero duals the first sweep leaves u unchanged.
    std::size_t min_iter = 2;
    /// Run restore_feasibility on the final iterate.
    bool restore_feasibility = true;
    std::optional<SolverState> init;
};

struct SolveResult {
    HsCube u;
    HsCube s;
    HsCube t;
    SolveReport report;
    SolverState state;
};

/// Thrown when an iterate stops being finite.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t iteration, const std::string& what)
        : std::runtime_error(what), iteration_(iteration) {}
    std::size_t iteration() const { return iteration_; }

private:
    std::size_t iteration_;
};

/// Moves an iterate onto the constraint set with small corrections:
///   t <- per band, per column mean (so Dv t = 0; ||t||_1 cannot grow)
///   u <- nearest point of the box within epsilon of v - s - t
///   w1, w2 <- nearest fields with L^T w1 = D u and L^T w2 = D Ds u
/// The constraints these enforce hold only in the limit for the raw iterates.
SolverState restore_feasibility(const SolverState& state, const ProblemParams& params);

/// Iterates until ||u_new - u_old|| / ||u_old|| < tol or max_iter sweeps.
SolveResult solve(const ProblemParams& params, const StepSizes& steps, const SolveOptions& options);

/// Writes the sampled convergence log: iteration, rel_change, objective, residuals.
std::string convergence_csv(const SolveReport& report);

struct GeoSSTVValue {
    double value = 0.0;
    /// ||L^T w1 - D u|| + ||L^T w2 - D Ds u|| at the returned iterate.
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Evaluates the regularizer by solving its inner minimization over (w1, w2).
GeoSSTVValue geosstv_value(const HsCube& u, double omega, double inner_tol = 1e-9,
                           std::size_t inner_max_iter = 200000);

} // namespace geosstv
