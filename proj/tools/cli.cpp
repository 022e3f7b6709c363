#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "geosstv/io.hpp"
#include "geosstv/linops.hpp"
#include "geosstv/metrics.hpp"
#include "geosstv/noise.hpp"
#include "geosstv/parallel.hpp"
#include "geosstv/solver.hpp"

namespace geosstv::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class LogLevel { Error, Warn, Info, Debug };

struct Globals {
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string log_level = "warn";
    std::string command_line;

    LogLevel level() const {
        if (log_level == "error") return LogLevel::Error;
        if (log_level == "info") return LogLevel::Info;
        if (log_level == "debug") return LogLevel::Debug;
        return LogLevel::Warn;
    }
};

struct SimulateArgs {
    std::string clean;
    std::optional<int> case_id;
    std::optional<double> sigma;
    std::optional<double> p_sparse;
    std::optional<double> p_stripe;
    std::optional<double> p_dead;
    std::vector<int> widths;
    std::vector<double> stripe_range;
    std::optional<double> rho;
    std::string out_dir;
};

struct DenoiseArgs {
    std::string observed;
    std::string manifest;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<double> epsilon;
    double omega = 0.03;
    double mu_min = 0.0;
    double mu_max = 1.0;
    double tol = 1e-5;
    std::size_t max_iter = 20000;
    std::size_t residual_stride = 50;
    bool no_restore = false;
    std::string out_dir;
};

struct EvaluateArgs {
    std::string estimate;
    std::string truth;
    std::string out;
    std::string csv;
};

struct ExportArgs {
    std::string cube;
    std::size_t band = 0;
    std::string out;
    double lo = 0.0;
    double hi = 1.0;
};

struct OpnormArgs {
    std::string op;
    std::vector<std::size_t> shape{16, 16, 1};
    int iters = 100;
};

Provenance provenance(const Globals& g, std::map<std::string, std::string> hashes) {
    return {std::string(version()), g.command_line, std::move(hashes)};
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError(IoError::Kind::Io, "cannot create directory '" + dir.string() + "': " + ec.message());
    }
}

int cmd_simulate(const SimulateArgs& a, const Globals& g, const CLI::App& sub, std::ostream& out,
                 std::ostream& err) {
    const bool custom = sub.count("--sigma") + sub.count("--psp") + sub.count("--pstripe") +
                            sub.count("--pdead") + sub.count("--widths") + sub.count("--stripe-range") >
                        0;
    if (a.case_id && custom) {
        throw UsageError("--case cannot be combined with custom noise flags");
    }
    if (!a.case_id && !custom) {
        throw UsageError("give either --case or custom noise flags");
    }
    if (a.case_id && (*a.case_id < 1 || *a.case_id > 5)) {
        throw UsageError("--case must be in 1..5");
    }
    if (!a.widths.empty() && a.widths.size() != 2) {
        throw UsageError("--widths takes two integers: min,max");
    }
    if (!a.stripe_range.empty() && a.stripe_range.size() != 2) {
        throw UsageError("--stripe-range takes two numbers: lo,hi");
    }

    NoiseSpec spec;
    if (a.case_id) {
        spec = case_spec(*a.case_id);
    } else {
        spec.sigma = a.sigma.value_or(0.0);
        spec.p_sparse = a.p_sparse.value_or(0.0);
        spec.p_stripe = a.p_stripe.value_or(0.0);
        spec.p_dead = a.p_dead.value_or(0.0);
        if (!a.widths.empty()) {
            spec.dead_width_min = a.widths[0];
            spec.dead_width_max = a.widths[1];
        }
        if (!a.stripe_range.empty()) {
            spec.stripe_lo = a.stripe_range[0];
            spec.stripe_hi = a.stripe_range[1];
        }
    }
    spec.seed = g.seed.value_or(0);
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const double rho = a.rho ? *a.rho : (a.case_id ? rho_for_case(*a.case_id) : rho_for_spec(spec));
    if (!(rho > 0.0 && rho <= 1.0)) {
        throw UsageError("--rho must lie in (0, 1]");
    }

    const HsCube clean = read_cube(a.clean);
    SimulationOutput sim = simulate(clean, spec);
    sim.case_id = a.case_id;

    const fs::path dir(a.out_dir);
    ensure_dir(dir);
    write_cube(dir / "observed.hsc", sim.observed);
    write_cube(dir / "sparse.hsc", sim.sparse_truth);
    write_cube(dir / "stripe.hsc", sim.stripe_truth);
    write_cube(dir / "gaussian.hsc", sim.gaussian_truth);

    Manifest m;
    m.case_id = a.case_id;
    m.seed = spec.seed;
    m.noise = spec;
    m.observed_mean = mean(sim.observed.values());
    m.radii = compute_radii(m.observed_mean, clean.shape(), spec, rho);
    m.n1 = clean.shape().n1();
    m.n2 = clean.shape().n2();
    m.n3 = clean.shape().n3();
    m.provenance = provenance(g, {{"clean", file_sha256(a.clean)}});
    write_manifest(dir / "manifest.json", m);

    out << std::setprecision(17) << "alpha " << m.radii.alpha << "\nbeta " << m.radii.beta
        << "\nepsilon " << m.radii.epsilon << "\nrho " << m.radii.rho << "\n";
    if (g.level() >= LogLevel::Info) {
        err << "simulate: wrote " << dir.string() << "\n";
    }
    return kSuccess;
}

int cmd_denoise(const DenoiseArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
    const bool explicit_radii = a.alpha && a.beta && a.epsilon;
    if (a.manifest.empty() && !explicit_radii) {
        throw UsageError("denoise needs --manifest or all of --alpha, --beta, --epsilon");
    }
    if (!(a.mu_min < a.mu_max)) {
        throw UsageError("--mu-min must be below --mu-max");
    }
    if (!(a.tol > 0.0) || a.max_iter < 1 || !(a.omega >= 0.0)) {
        throw UsageError("need --tol > 0, --max-iter >= 1, --omega >= 0");
    }

    ProblemParams params;
    params.omega = a.omega;
    params.bounds = {a.mu_min, a.mu_max};
    std::map<std::string, std::string> hashes{{"observed", file_sha256(a.observed)}};
    params.observed = read_cube(a.observed);
    if (!a.manifest.empty()) {
        const Manifest m = read_manifest(a.manifest);
        hashes["manifest"] = file_sha256(a.manifest);
        const CubeShape& sh = params.observed.shape();
        if (m.n1 != sh.n1() || m.n2 != sh.n2() || m.n3 != sh.n3()) {
            throw std::runtime_error("manifest shape does not match observed cube " + sh.to_string());
        }
        params.alpha = m.radii.alpha;
        params.beta = m.radii.beta;
        params.epsilon = m.radii.epsilon;
    }
    if (a.alpha) params.alpha = *a.alpha;
    if (a.beta) params.beta = *a.beta;
    if (a.epsilon) params.epsilon = *a.epsilon;
    if (params.alpha < 0.0 || params.beta < 0.0 || params.epsilon < 0.0) {
        throw UsageError("radii must be nonnegative");
    }

    SolveOptions options;
    options.tol = a.tol;
    options.max_iter = a.max_iter;
    options.residual_stride = a.residual_stride;
    options.restore_feasibility = !a.no_restore;
    const StepSizes steps = default_step_sizes();
    const SolveResult result = solve(params, steps, options);

    const fs::path dir(a.out_dir);
    ensure_dir(dir);
    write_cube(dir / "restored.hsc", result.u);
    write_cube(dir / "sparse_est.hsc", result.s);
    write_cube(dir / "stripe_est.hsc", result.t);
    write_text(dir / "convergence.csv", convergence_csv(result.report));
    const DenoiseRecord record{params, steps, a.tol, a.max_iter, provenance(g, hashes)};
    write_text(dir / "report.json", solve_report_json(result.report, record));

    out << "iterations " << result.report.iterations << "\nconverged "
        << (result.report.converged ? "true" : "false") << "\n";
    if (!result.report.converged) {
        if (g.level() >= LogLevel::Warn) {
            err << "denoise: stopped at max-iter " << a.max_iter << " without reaching tol " << a.tol
                << "\n";
        }
        return kNotConverged;
    }
    return kSuccess;
}

int cmd_evaluate(const EvaluateArgs& a, const Globals& g, std::ostream& out) {
    const HsCube estimate = read_cube(a.estimate);
    const HsCube truth = read_cube(a.truth);
    const QualityReport report = evaluate_quality(estimate, truth);
    const fs::path json_path(a.out);
    fs::path csv_path = a.csv.empty() ? fs::path(a.out).replace_extension(".csv") : fs::path(a.csv);
    if (csv_path == json_path) {
        csv_path += ".csv";
    }
    write_text(json_path, quality_report_json(
                              report, provenance(g, {{"estimate", file_sha256(a.estimate)},
                                                     {"truth", file_sha256(a.truth)}})));
    write_text(csv_path, quality_report_csv(report));
    out << std::setprecision(10) << "mpsnr_db " << report.mpsnr_db << "\nmssim " << report.mssim
        << "\n";
    return kSuccess;
}

int cmd_export_band(const ExportArgs& a, std::ostream& out) {
    if (!(a.lo < a.hi)) {
        throw UsageError("--lo must be below --hi");
    }
    const HsCube cube = read_cube(a.cube);
    export_band_pgm(cube, a.band, a.out, a.lo, a.hi);
    out << "wrote " << a.out << "\n";
    return kSuccess;
}

int cmd_opnorm(const OpnormArgs& a, const Globals& g, std::ostream& out) {
    Operator op{};
    try {
        op = parse_operator(a.op);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (a.shape.size() != 3) {
        throw UsageError("--shape takes three integers n1,n2,n3");
    }
    if (a.iters < 1) {
        throw UsageError("--iters must be at least 1");
    }
    CubeShape shape;
    try {
        shape = CubeShape(a.shape[0], a.shape[1], a.shape[2]);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const double estimate = estimate_opnorm(op, shape, a.iters, g.seed.value_or(0));
    out << std::setprecision(12) << "operator " << operator_name(op) << "\nshape "
        << shape.to_string() << "\nestimate " << estimate << "\nbound "
        << std::sqrt(opnorm_sq_bound(op)) << "\n";
    if (const auto rule = step_rule_opnorm_sq(op)) {
        out << "step_rule_norm " << std::sqrt(boost::rational_cast<double>(*rule)) << "\n";
    }
    return kSuccess;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"GeoSSTV hyperspectral denoising and destriping"};
    app.name(args.empty() ? "geosstv" : fs::path(args[0]).filename().string());
    app.require_subcommand(1, 1);
    app.fallthrough();

    Globals g;
    for (std::size_t k = 1; k < args.size(); ++k) {
        g.command_line += (k > 1 ? " " : "") + args[k];
    }
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Random seed");
    app.add_option("--threads", g.threads, "Operator worker threads (0 = serial, deterministic)");
    app.add_option("--log-level", g.log_level, "error|warn|info|debug")
        ->check(CLI::IsMember({"error", "warn", "info", "debug"}));

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Add benchmark noise to a clean cube");
    sim_cmd->add_option("--clean", sim.clean, "Clean cube (HSC1)")->required();
    sim_cmd->add_option("--case", sim.case_id, "Noise case 1..5");
    sim_cmd->add_option("--sigma", sim.sigma, "Gaussian standard deviation");
    sim_cmd->add_option("--psp", sim.p_sparse, "Salt-and-pepper rate");
    sim_cmd->add_option("--pstripe", sim.p_stripe, "Stripe rate");
    sim_cmd->add_option("--pdead", sim.p_dead, "Deadline rate");
    sim_cmd->add_option("--widths", sim.widths, "Deadline width range min,max")->delimiter(',');
    sim_cmd->add_option("--stripe-range", sim.stripe_range, "Stripe intensity range lo,hi")
        ->delimiter(',');
    sim_cmd->add_option("--rho", sim.rho, "Radius scale (default from the number of constraints)");
    sim_cmd->add_option("--out-dir", sim.out_dir, "Output directory")->required();

    DenoiseArgs den;
    auto* den_cmd = app.add_subcommand("denoise", "Restore an observed cube");
    den_cmd->add_option("--observed", den.observed, "Observed cube (HSC1)")->required();
    den_cmd->add_option("--manifest", den.manifest, "Manifest with radii");
    den_cmd->add_option("--alpha", den.alpha, "Sparse-noise l1 radius");
    den_cmd->add_option("--beta", den.beta, "Stripe-noise l1 radius");
    den_cmd->add_option("--epsilon", den.epsilon, "Fidelity l2 radius");
    den_cmd->add_option("--omega", den.omega, "Weight of the first-order term")->capture_default_str();
    den_cmd->add_option("--mu-min", den.mu_min, "Lower intensity bound")->capture_default_str();
    den_cmd->add_option("--mu-max", den.mu_max, "Upper intensity bound")->capture_default_str();
    den_cmd->add_option("--tol", den.tol, "Relative-change stopping tolerance")->capture_default_str();
    den_cmd->add_option("--max-iter", den.max_iter, "Iteration cap")->capture_default_str();
    den_cmd->add_flag("--no-restore", den.no_restore, "Return the raw final iterate");
    den_cmd->add_option("--residual-stride", den.residual_stride, "Convergence log stride")
        ->capture_default_str();
    den_cmd->add_option("--out-dir", den.out_dir, "Output directory")->required();

    EvaluateArgs ev;
    auto* ev_cmd = app.add_subcommand("evaluate", "MPSNR / MSSIM of an estimate against truth");
    ev_cmd->add_option("--estimate", ev.estimate, "Estimated cube")->required();
    ev_cmd->add_option("--truth", ev.truth, "Reference cube")->required();
    ev_cmd->add_option("--out", ev.out, "JSON report path")->required();
    ev_cmd->add_option("--csv", ev.csv, "Per-band CSV path (default: JSON path with .csv)");

    ExportArgs ex;
    auto* ex_cmd = app.add_subcommand("export-band", "Write one band as 16-bit PGM");
    ex_cmd->add_option("--cube", ex.cube, "Cube (HSC1)")->required();
    ex_cmd->add_option("--band", ex.band, "0-based band index")->required();
    ex_cmd->add_option("--out", ex.out, "PGM path")->required();
    ex_cmd->add_option("--lo", ex.lo, "Value mapped to 0")->capture_default_str();
    ex_cmd->add_option("--hi", ex.hi, "Value mapped to 65535")->capture_default_str();

    OpnormArgs on;
    auto* on_cmd = app.add_subcommand("opnorm", "Estimate an operator norm by power iteration");
    on_cmd->add_option("--op", on.op, "Operator name")->required();
    on_cmd->add_option("--shape", on.shape, "n1,n2,n3")->delimiter(',')->capture_default_str();
    on_cmd->add_option("--iters", on.iters, "Power iterations")->capture_default_str();

    std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rest.begin(), rest.end());
    try {
        app.parse(rest);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsage;
    }
    if (app.count("--seed") > 0) {
        g.seed = seed;
    }
    set_thread_count(g.threads);

    try {
        if (*sim_cmd) return cmd_simulate(sim, g, *sim_cmd, out, err);
        if (*den_cmd) return cmd_denoise(den, g, out, err);
        if (*ev_cmd) return cmd_evaluate(ev, g, out);
        if (*ex_cmd) return cmd_export_band(ex, out);
        if (*on_cmd) return cmd_opnorm(on, g, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntime;
    }
    return kUsage;
}

} // namespace geosstv::cli
