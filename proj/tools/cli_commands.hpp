#pragma once

// Command implementations for the grainflow executable. run() takes the
// argument vector and output streams so the whole CLI can be driven from
// tests without a subprocess.

#include "verify_suites.hpp"

#include <grainflow/grainflow.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace grainflow::cli {

inline constexpr const char* tool_version = "0.1.0";

enum ExitCode : int { exit_ok = 0, exit_property_failure = 1, exit_usage = 2, exit_violation = 3 };

namespace detail {

inline std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// "2,4,8" and "2..32" (inclusive), mixed freely.
inline std::vector<std::size_t> parse_n_list(const std::string& spec)
{
    std::vector<std::size_t> out;
    std::stringstream ss(spec);
    std::string item;
    auto to_n = [&](const std::string& s) {
        std::size_t pos = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(s, &pos);
        } catch (const std::exception&) {
            throw DomainError("cannot parse n value '" + s + "'");
        }
        if (pos != s.size()) throw DomainError("cannot parse n value '" + s + "'");
        return static_cast<std::size_t>(v);
    };
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(to_n(item));
        } else {
            const std::size_t lo = to_n(item.substr(0, dots));
            const std::size_t hi = to_n(item.substr(dots + 2));
            if (hi < lo) throw DomainError("empty range '" + item + "'");
            for (std::size_t n = lo; n <= hi; ++n) out.push_back(n);
        }
    }
    if (out.empty()) throw DomainError("empty n list");
    return out;
}

inline std::vector<double> parse_double_list(const std::string& spec, const char* what)
{
    std::vector<double> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &pos);
        } catch (const std::exception&) {
            throw DomainError(std::string("cannot parse ") + what + " value '" + item + "'");
        }
        if (pos != item.size()) throw DomainError(std::string("cannot parse ") + what + " value '" + item + "'");
        out.push_back(v);
    }
    return out;
}

/// Output bookkeeping for one invocation; the manifest sits next to the
/// first output file.
struct Run {
    std::string command_line;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> outputs;

    std::string manifest_path() const { return outputs.empty() ? std::string() : outputs.front() + ".manifest.json"; }

    void write_text(const std::string& path, const std::string& text)
    {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw Error("cannot open " + path + " for writing");
        os << text;
        if (!os) throw Error("failed writing " + path);
    }

    void write_manifest() const
    {
        if (outputs.empty()) return;
        Json j = {{"command_line", command_line},
                  {"tool_version", tool_version},
                  {"timestamp", utc_timestamp()},
                  {"outputs", outputs},
                  {"rng", std::string(rng_algorithm)}};
        j["seed"] = seed ? Json(*seed) : Json(nullptr);
        std::ofstream os(manifest_path(), std::ios::binary);
        if (!os) throw Error("cannot open " + manifest_path() + " for writing");
        os << j.dump(2) << '\n';
    }
};

inline Json with_manifest(Json j, const Run& run)
{
    if (!run.outputs.empty()) j["manifest"] = run.manifest_path();
    return j;
}

} // namespace detail

struct KernelArgs {
    double alpha = 1.0, x = 0.0, y = 0.0, t = 0.0, beta = 0.0;
    std::string method = "closed";
    std::optional<std::size_t> terms;
    double k1_max = 200.0;
    std::size_t k2_max = 64;
    std::size_t quad_points = 200'000;
};

inline int cmd_kernel(const KernelArgs& a, std::ostream& out)
{
    const Displacement d{a.x, a.y};
    if (!(a.beta >= 0.0)) throw DomainError("beta must be >= 0");
    if (!(a.t >= 0.0)) throw DomainError("t must be >= 0");
    const double field = a.beta * std::abs(a.x);
    Json j = {{"method", a.method}, {"alpha", a.alpha}, {"x", a.x}, {"y", a.y}, {"t", a.t}, {"beta", a.beta}};
    double value = 0.0;
    if (a.method == "closed") {
        value = (a.t > 0.0 ? w_smoothed(d, a.alpha, a.t) : w_alpha(d, a.alpha)) + field;
        j["error"] = nullptr;
    } else if (a.method == "series") {
        const auto tv = a.terms ? w_series(d, a.alpha, a.t, *a.terms) : w_series(d, a.alpha, a.t);
        value = tv.value + field;
        j["error"] = tv.error;
        j["terms"] = tv.terms;
    } else {
        if (a.t != 0.0) throw DomainError("the fourier method evaluates the unsmoothed kernel; t must be 0");
        const auto tv = fourier_w(d, a.alpha, FourierCutoffs{a.k1_max, a.k2_max}, a.quad_points);
        value = tv.value + field;
        j["error"] = tv.error;
        j["k1_max"] = a.k1_max;
        j["k2_max"] = a.k2_max;
        j["quad_points"] = a.quad_points;
    }
    j["value"] = value;
    out << format_double(value) << '\n' << j.dump() << '\n';
    return exit_ok;
}

struct GenerateArgs {
    std::string kind = "equispaced";
    std::size_t n = 0;
    std::optional<std::uint64_t> seed;
    double x0 = 0.0, phase = 0.0, x_spread = 1.0, eps = 0.05;
    std::string out;
};

inline int cmd_generate(const GenerateArgs& a, detail::Run& run, std::ostream& out)
{
    if (a.kind != "equispaced" && !a.seed) throw DomainError("--seed is required for kind '" + a.kind + "'");
    std::optional<Configuration> c;
    if (a.kind == "equispaced")
        c = equispaced(a.n, a.x0, a.phase);
    else if (a.kind == "random")
        c = random_config(a.n, a.x_spread, *a.seed);
    else
        c = perturb(equispaced(a.n, a.x0, a.phase), a.eps, *a.seed);
    run.seed = a.seed;
    run.outputs = {a.out, sidecar_path(a.out).string()};
    save_csv(*c, a.out);
    run.write_manifest();
    out << "wrote " << c->size() << " points to " << a.out << '\n';
    return exit_ok;
}

struct EnergyArgs {
    std::string config;
    double alpha = 1.0, beta = 0.0, t = 0.0;
    bool certificate = false;
    std::string out;
};

inline int cmd_energy(const EnergyArgs& a, detail::Run& run, std::ostream& out, std::ostream& err)
{
    std::vector<std::string> warnings;
    const Configuration c = load_csv(a.config, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    const KernelParams p{a.alpha, a.t, a.beta};
    Json j = to_json(make_energy_report(c, p));
    if (a.certificate) j["certificate"] = to_json(lower_bound_certificate(c, a.alpha));
    if (!a.out.empty()) {
        run.outputs = {a.out};
        j = detail::with_manifest(j, run);
        run.write_text(a.out, j.dump(2) + "\n");
        run.write_manifest();
    }
    out << j.dump(2) << '\n';
    return exit_ok;
}

struct MinimizeArgs {
    std::size_t n = 0;
    std::string n_list;
    double alpha = 1.0, beta = 0.0;
    std::size_t restarts = 1, max_iters = 20000;
    double grad_tol = 1e-8, step_init = 1e-2;
    std::uint64_t seed = 0;
    std::string init = "random";
    double x_spread = 1.0, eps = 0.05;
    std::string start;
    std::string out;
    std::string config_out;
    std::string fit_out;
    std::string violation_dir = ".";
};

namespace detail {

inline MinimizeOptions minimize_options(const MinimizeArgs& a, std::ostream& err)
{
    MinimizeOptions o;
    o.restarts = a.restarts;
    o.max_iters = a.max_iters;
    o.grad_tol = a.grad_tol;
    o.step_init = a.step_init;
    o.seed = a.seed;
    o.x_spread = a.x_spread;
    o.eps = a.eps;
    if (a.init == "random") {
        o.init = InitKind::random;
    } else if (a.init == "perturbed") {
        o.init = InitKind::perturbed_equispaced;
    } else {
        if (a.start.empty()) throw DomainError("--init file needs --start <csv>");
        std::vector<std::string> warnings;
        o.start = load_csv(a.start, &warnings);
        for (const auto& w : warnings) err << "warning: " << w << '\n';
        o.init = InitKind::from_file;
    }
    return o;
}

inline std::string violation_file(const MinimizeArgs& a, const MinimizeReport& r)
{
    const auto path = std::filesystem::path(a.violation_dir) /
                      ("violation_N" + std::to_string(r.n) + "_seed" + std::to_string(a.seed) + ".csv");
    return path.string();
}

} // namespace detail

inline int cmd_minimize(const MinimizeArgs& a, detail::Run& run, std::ostream& out, std::ostream& err)
{
    run.seed = a.seed;
    const auto opts = detail::minimize_options(a, err);
    const auto rep = minimize(a.n, KernelParams{a.alpha, 0.0, a.beta}, opts);
    if (!a.out.empty()) run.outputs.push_back(a.out);
    if (!a.config_out.empty()) run.outputs.push_back(a.config_out);
    std::string violation_path;
    if (rep.violation) {
        violation_path = detail::violation_file(a, rep);
        run.outputs.push_back(violation_path);
    }
    Json j = detail::with_manifest(to_json(rep), run);
    if (!a.out.empty()) run.write_text(a.out, j.dump(2) + "\n");
    if (!a.config_out.empty()) save_csv(*rep.best, a.config_out);
    if (rep.violation) {
        save_csv(*rep.best_raw, violation_path);
        err << "conjecture violation: energy " << format_double(rep.best_energy) << " below -N log N = "
            << format_double(equispaced_energy(rep.n)) << "; configuration written to " << violation_path << '\n';
    }
    run.write_manifest();
    out << j.dump(2) << '\n';
    return rep.violation ? exit_violation : exit_ok;
}

inline int cmd_scan(const MinimizeArgs& a, detail::Run& run, std::ostream& out, std::ostream& err)
{
    run.seed = a.seed;
    const auto opts = detail::minimize_options(a, err);
    const auto result = scan(detail::parse_n_list(a.n_list), KernelParams{a.alpha, 0.0, a.beta}, opts);

    std::vector<ScanRow> converged;
    for (const auto& r : result.rows)
        if (r.converged) converged.push_back(r);
        else err << "warning: n = " << r.n << " did not converge; excluded from the fit\n";
    Json fit = nullptr;
    if (converged.size() >= 2) {
        fit = to_json(fit_residual(converged));
        fit["alpha"] = a.alpha;
        fit["beta"] = a.beta;
    } else {
        err << "warning: fewer than 2 converged rows; no fit\n";
    }

    if (!a.out.empty()) run.outputs.push_back(a.out);
    if (!a.fit_out.empty()) run.outputs.push_back(a.fit_out);
    bool violation = false;
    for (const auto& rep : result.reports) {
        if (!rep.violation) continue;
        violation = true;
        const auto path = detail::violation_file(a, rep);
        run.outputs.push_back(path);
        save_csv(*rep.best_raw, path);
        err << "conjecture violation at n = " << rep.n << "; configuration written to " << path << '\n';
    }
    std::ostringstream csv;
    write_scan_csv(csv, result.rows);
    if (!a.out.empty()) run.write_text(a.out, csv.str());
    if (!a.fit_out.empty()) run.write_text(a.fit_out, detail::with_manifest(fit, run).dump(2) + "\n");
    run.write_manifest();
    out << csv.str() << fit.dump() << '\n';
    return violation ? exit_violation : exit_ok;
}

struct VerifyArgs {
    std::string suite;
    std::size_t samples = 1000;
    std::uint64_t seed = 0;
};

inline int cmd_verify(const VerifyArgs& a, std::ostream& out)
{
    std::vector<PropertyResult> results;
    if (a.suite == "identities") results = suite_identities(a.samples, a.seed);
    else if (a.suite == "bounds") results = suite_bounds(a.samples, a.seed);
    else if (a.suite == "pd") results = suite_pd(a.samples, a.seed);
    else results = suite_gradient(a.samples, a.seed);
    bool ok = true;
    out << std::left << std::setw(30) << "property" << std::setw(10) << "samples" << std::setw(26) << "worst_margin"
        << "status\n";
    for (const auto& r : results) {
        ok = ok && r.pass();
        out << std::setw(30) << r.name << std::setw(10) << r.samples << std::setw(26) << format_double(r.worst_margin)
            << (r.pass() ? "pass" : "FAIL") << '\n';
    }
    return ok ? exit_ok : exit_property_failure;
}

struct ContinuumArgs {
    std::string family;
    double a = 0.0, A = 1.0, x0 = 0.0;
    std::string atoms, weights;
    double alpha = 0.0, beta = 0.0;
    std::string coupling = "external";
    std::size_t samples = 1'000'000;
    std::optional<std::uint64_t> seed;
    bool iid = false;
    std::string grid = "21x21";
    std::string mode = "external";
    double beta_min = 0.0, beta_max = 1.0;
    std::optional<double> theta;
    std::optional<std::size_t> n;
    double b = 1.0, h = 1.0, gamma0 = 1.0;
    std::string out;
};

namespace detail {

inline MeasureFamily family_from_args(const ContinuumArgs& a)
{
    if (a.family == "delta-ring") return DeltaRing{a.x0};
    if (a.family == "uniform-strip") return UniformStrip{a.A};
    if (a.family == "product-power") return PowerDensity{a.a, a.A};
    if (a.family == "planar-ellipse") return PlanarEllipse{a.alpha};
    Product p{parse_double_list(a.atoms, "atom"), {}};
    p.weights = a.weights.empty() ? std::vector<double>(p.atoms.size(), 1.0) : parse_double_list(a.weights, "weight");
    return p;
}

inline void emit(const std::string& text, const ContinuumArgs& a, Run& run, std::ostream& out)
{
    if (!a.out.empty()) {
        run.outputs = {a.out};
        run.write_text(a.out, text);
        run.write_manifest();
    }
    out << text;
}

} // namespace detail

inline int cmd_continuum_mc(const ContinuumArgs& a, detail::Run& run, std::ostream& out)
{
    if (!a.seed) throw DomainError("--seed is required");
    run.seed = a.seed;
    const MeasureFamily mu = detail::family_from_args(a);
    const Coupling coupling = a.coupling == "kernel" ? Coupling::kernel_repulsion : Coupling::external_field;
    McOptions o;
    o.samples = a.samples;
    o.seed = *a.seed;
    o.stratified = !a.iid;
    const auto r = continuum_energy_mc(mu, a.alpha, a.beta, coupling, o);
    Json j = {{"family", family_json(mu)}, {"coupling", coupling_name(coupling)}, {"alpha", a.alpha},
              {"beta", a.beta},           {"estimate", r.estimate},              {"stderr", r.stderr_},
              {"samples", r.samples},     {"batches", r.batches},                {"seed", *a.seed}};
    const auto closed = family_closed_energy(mu, a.alpha, a.beta, coupling);
    j["closed_form"] = closed ? Json(*closed) : Json(nullptr);
    if (!a.out.empty()) {
        run.outputs = {a.out};
        j = detail::with_manifest(j, run);
    }
    detail::emit(j.dump(2) + "\n", a, run, out);
    return exit_ok;
}

inline int cmd_continuum_phase(const ContinuumArgs& a, detail::Run& run, std::ostream& out)
{
    const auto x = a.grid.find('x');
    if (x == std::string::npos) throw DomainError("--grid must look like 21x21");
    const auto na = detail::parse_n_list(a.grid.substr(0, x)).front();
    const auto nb = detail::parse_n_list(a.grid.substr(x + 1)).front();
    if (na < 2 || nb < 2) throw DomainError("--grid needs at least 2 points per axis");
    if (!(a.beta_max > a.beta_min)) throw DomainError("--beta-max must exceed --beta-min");
    const PhaseMode mode = a.mode == "kernel" ? PhaseMode::kernel_repulsion : PhaseMode::external_field;
    std::ostringstream csv;
    csv << "alpha,beta,verdict\n";
    for (std::size_t i = 0; i < na; ++i) {
        const double alpha = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(na - 1);
        for (std::size_t k = 0; k < nb; ++k) {
            const double beta =
                a.beta_min + (a.beta_max - a.beta_min) * static_cast<double>(k) / static_cast<double>(nb - 1);
            csv << format_double(alpha) << ',' << format_double(beta) << ','
                << verdict_name(phase_classify(alpha, beta, mode).verdict) << '\n';
        }
    }
    detail::emit(csv.str(), a, run, out);
    return exit_ok;
}

inline int cmd_continuum_ellipse(const ContinuumArgs& a, detail::Run& run, std::ostream& out)
{
    if (!a.seed) throw DomainError("--seed is required");
    run.seed = a.seed;
    const auto r = ellipse_energy_mc(a.alpha, a.samples, *a.seed);
    Json j = {{"family", "planar_ellipse"},
              {"alpha", a.alpha},
              {"estimate", r.estimate},
              {"stderr", r.stderr_},
              {"second_moment", r.second_moment},
              {"second_moment_stderr", r.second_moment_stderr},
              {"c_alpha", ellipse_c_alpha(a.alpha)},
              {"j_min", ellipse_j_min(a.alpha)},
              {"j_at_minimizer", ellipse_j_at_minimizer(a.alpha)},
              {"samples", r.samples},
              {"seed", *a.seed}};
    if (!a.out.empty()) {
        run.outputs = {a.out};
        j = detail::with_manifest(j, run);
    }
    detail::emit(j.dump(2) + "\n", a, run, out);
    return exit_ok;
}

inline int cmd_continuum_units(const ContinuumArgs& a, detail::Run& run, std::ostream& out)
{
    RsUnits u;
    if (a.theta) {
        u = rs_units(*a.theta, a.gamma0);
    } else {
        if (!a.n) throw DomainError("units needs --theta or --n with --b and --h");
        u = rs_units(*a.n, PhysicalScale{a.b, a.h, a.gamma0});
    }
    Json j = {{"theta", u.theta}, {"gamma0", a.gamma0}, {"gamma_leading", u.gamma_leading}};
    detail::emit(j.dump(2) + "\n", a, run, out);
    return exit_ok;
}

/// Parses `args` (without the program name) and runs one command.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Read-Shockley dislocation energies on the cylinder", "grainflow"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    KernelArgs ka;
    auto* kernel = app.add_subcommand("kernel", "evaluate the kernel at one displacement");
    kernel->add_option("--alpha", ka.alpha, "anisotropy in [-1, 1]")->required();
    kernel->add_option("--x", ka.x, "horizontal displacement")->required();
    kernel->add_option("--y", ka.y, "angular displacement")->required();
    kernel->add_option("--t", ka.t, "smoothing length (>= 0)");
    kernel->add_option("--beta", ka.beta, "extra |x| repulsion (>= 0)");
    kernel->add_option("--method", ka.method)->check(CLI::IsMember({"closed", "series", "fourier"}));
    kernel->add_option("--terms", ka.terms, "series terms (default: from the error bound)");
    kernel->add_option("--k1-max", ka.k1_max);
    kernel->add_option("--k2-max", ka.k2_max);
    kernel->add_option("--quad-points", ka.quad_points);

    GenerateArgs ga;
    auto* generate = app.add_subcommand("generate", "write a configuration CSV");
    generate->add_option("--kind", ga.kind)->check(CLI::IsMember({"equispaced", "random", "perturbed"}));
    generate->add_option("--n", ga.n)->required()->check(CLI::PositiveNumber);
    generate->add_option("--seed", ga.seed);
    generate->add_option("--x0", ga.x0);
    generate->add_option("--phase", ga.phase);
    generate->add_option("--x-spread", ga.x_spread);
    generate->add_option("--eps", ga.eps);
    generate->add_option("--out", ga.out)->required();

    EnergyArgs ea;
    auto* energy = app.add_subcommand("energy", "energy report for a configuration CSV");
    energy->add_option("--config", ea.config)->required();
    energy->add_option("--alpha", ea.alpha)->required();
    energy->add_option("--beta", ea.beta);
    energy->add_option("--t", ea.t);
    energy->add_flag("--certificate", ea.certificate, "include the lower-bound certificate at t = 2/N");
    energy->add_option("--out", ea.out);

    MinimizeArgs ma;
    auto add_opt_flags = [&](CLI::App* sub) {
        sub->add_option("--alpha", ma.alpha)->required();
        sub->add_option("--beta", ma.beta);
        sub->add_option("--restarts", ma.restarts);
        sub->add_option("--seed", ma.seed)->required();
        sub->add_option("--max-iters", ma.max_iters);
        sub->add_option("--grad-tol", ma.grad_tol);
        sub->add_option("--step-init", ma.step_init);
        sub->add_option("--init", ma.init)->check(CLI::IsMember({"random", "perturbed", "file"}));
        sub->add_option("--x-spread", ma.x_spread);
        sub->add_option("--eps", ma.eps);
        sub->add_option("--start", ma.start);
        sub->add_option("--violation-dir", ma.violation_dir);
    };
    auto* minimize_cmd = app.add_subcommand("minimize", "minimise the N-point energy");
    minimize_cmd->add_option("--n", ma.n)->required();
    add_opt_flags(minimize_cmd);
    minimize_cmd->add_option("--out", ma.out, "report JSON");
    minimize_cmd->add_option("--config-out", ma.config_out, "best configuration CSV");

    auto* scan_cmd = app.add_subcommand("scan", "minimise over a list of N and fit the O(N) residual");
    scan_cmd->add_option("--n", ma.n_list, "e.g. 2,4,8 or 2..32")->required();
    add_opt_flags(scan_cmd);
    scan_cmd->add_option("--out", ma.out, "scan CSV");
    scan_cmd->add_option("--fit-out", ma.fit_out, "fit JSON");

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "run a property suite");
    verify->add_option("--suite", va.suite)->required()->check(CLI::IsMember({"identities", "bounds", "pd", "gradient"}));
    verify->add_option("--samples", va.samples);
    verify->add_option("--seed", va.seed)->required();

    ContinuumArgs ca;
    auto* continuum = app.add_subcommand("continuum", "continuum energies and constants");
    continuum->require_subcommand(1);
    auto* mc = continuum->add_subcommand("mc", "Monte Carlo energy of a measure family");
    mc->add_option("--family", ca.family)
        ->required()
        ->check(CLI::IsMember({"delta-ring", "uniform-strip", "product-power", "product-atoms", "planar-ellipse"}));
    mc->add_option("--a", ca.a);
    mc->add_option("--A", ca.A);
    mc->add_option("--x0", ca.x0);
    mc->add_option("--atoms", ca.atoms, "comma-separated atom positions");
    mc->add_option("--weights", ca.weights, "comma-separated weights (default: equal)");
    mc->add_option("--alpha", ca.alpha)->required();
    mc->add_option("--beta", ca.beta);
    mc->add_option("--coupling", ca.coupling)->check(CLI::IsMember({"external", "kernel"}));
    mc->add_option("--samples", ca.samples);
    mc->add_option("--seed", ca.seed);
    mc->add_flag("--iid", ca.iid, "plain independent sampling instead of strata");
    mc->add_option("--out", ca.out);
    auto* phase = continuum->add_subcommand("phase", "phase diagram CSV over (alpha, beta)");
    phase->add_option("--grid", ca.grid);
    phase->add_option("--mode", ca.mode)->check(CLI::IsMember({"external", "kernel"}));
    phase->add_option("--beta-min", ca.beta_min);
    phase->add_option("--beta-max", ca.beta_max);
    phase->add_option("--out", ca.out);
    auto* ellipse = continuum->add_subcommand("ellipse", "Monte Carlo ellipse-law energy");
    ellipse->add_option("--alpha", ca.alpha)->required();
    ellipse->add_option("--samples", ca.samples);
    ellipse->add_option("--seed", ca.seed);
    ellipse->add_option("--out", ca.out);
    auto* units = continuum->add_subcommand("units", "tilt angle and leading grain-boundary energy");
    units->set_help_flag("--help", "print this help message and exit");
    units->add_option("--theta", ca.theta);
    units->add_option("--n", ca.n);
    units->add_option("--b", ca.b);
    units->add_option("--h", ca.h);
    units->add_option("--gamma0", ca.gamma0);
    units->add_option("--out", ca.out);

    std::vector<const char*> argv{"grainflow"};
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForVersion&) {
        out << tool_version << '\n';
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }

    detail::Run run;
    for (std::size_t i = 0; i < argv.size(); ++i) run.command_line += (i ? " " : "") + std::string(argv[i]);
    try {
        if (*kernel) return cmd_kernel(ka, out);
        if (*generate) return cmd_generate(ga, run, out);
        if (*energy) return cmd_energy(ea, run, out, err);
        if (*minimize_cmd) return cmd_minimize(ma, run, out, err);
        if (*scan_cmd) return cmd_scan(ma, run, out, err);
        if (*verify) return cmd_verify(va, out);
        if (*mc) return cmd_continuum_mc(ca, run, out);
        if (*phase) return cmd_continuum_phase(ca, run, out);
        if (*ellipse) return cmd_continuum_ellipse(ca, run, out);
        if (*units) return cmd_continuum_units(ca, run, out);
    } catch (const InvariantViolation& e) {
        err << "invariant violated: " << e.what() << '\n';
        return exit_property_failure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}

} // namespace grainflow::cli
