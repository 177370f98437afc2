#pragma once

#include <grainflow/configuration.hpp>
#include <grainflow/energy.hpp>
#include <grainflow/error.hpp>
#include <grainflow/kernel.hpp>
#include <grainflow/parallel.hpp>
#include <grainflow/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace grainflow {

enum class InitKind { random, perturbed_equispaced, from_file };

struct MinimizeOptions {
    std::size_t restarts = 1;
    std::size_t max_iters = 20000;
    double grad_tol = 1e-8;  ///< stop when max |dE/dz| drops below this
    double step_init = 1e-2; ///< first trial step of every restart
    std::uint64_t seed = 0;
    InitKind init = InitKind::random;
    double x_spread = 1.0;   ///< random init: x uniform on [-x_spread, x_spread]
    double eps = 0.05;       ///< perturbed inits: offset half-width
    std::optional<Configuration> start; ///< from_file init

    void validate() const
    {
        if (restarts < 1) throw DomainError("restarts must be >= 1");
        if (max_iters < 1) throw DomainError("max_iters must be >= 1");
        if (!(grad_tol > 0.0)) throw DomainError("grad_tol must be > 0");
        if (!(step_init > 0.0)) throw DomainError("step_init must be > 0");
        if (!(x_spread >= 0.0) || !(eps >= 0.0)) throw DomainError("x_spread and eps must be >= 0");
        if (init == InitKind::from_file && !start) throw DomainError("from_file init needs a start configuration");
    }
};

struct RestartRecord {
    std::uint64_t seed = 0;
    double initial_energy = 0.0;
    double final_energy = 0.0;
    std::size_t iterations = 0;
    double grad_max = 0.0;
    bool converged = false;
};

struct MinimizeReport {
    std::size_t n = 0;
    double alpha = 0.0;
    double beta = 0.0;
    double best_energy = std::numeric_limits<double>::infinity();
    double gap = 0.0; ///< best_energy + N log N; negative would beat the equispaced line
    std::size_t best_restart = 0;
    bool converged = false;
    /// best_energy < -N log N - 1e-6 N.
    bool violation = false;
    std::vector<RestartRecord> restarts;
    /// Best configuration, recentred (mean x = 0, first y = 0) for display.
    std::optional<Configuration> best;
    /// The same points before recentring, as dumped for violation events.
    std::optional<Configuration> best_raw;
};

/// Relative size of a negative gap that counts as a conjecture violation.
inline constexpr double violation_tolerance = 1e-6;
/// Trial steps that bring two points closer than this are rejected.
inline constexpr double collision_guard = 1e-8;

namespace detail {

/// Coefficient of |x_i - x_j| per ordered pair: (1 - alpha)/2 + beta. It is
/// >= 0 on the parameter domain and 0 only for alpha = 1, beta = 0.
inline double kink_strength(double alpha, double beta) { return 0.5 * (1.0 - alpha) + beta; }

/// Smooth part S = E - kappa sum_{i != j} |x_i - x_j| of the ordered-pair
/// energy (t = 0) and its gradient. S is differentiable wherever no two
/// points coincide, including at dx = 0.
inline double smooth_energy_and_gradient(std::span<const CylPoint> pts, double alpha, std::vector<Gradient>& grad)
{
    const std::size_t n = pts.size();
    const double kink0 = 0.5 * (1.0 - alpha);
    grad.assign(n, Gradient{});
    CompensatedSum energy;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = pts[i].x - pts[j].x;
            const double s = std::abs(dx);
            const double y = wrap_angle(pts[i].y - pts[j].y);
            const auto vg = core_value_and_gradient(alpha, s, y);
            const double sign = dx > 0.0 ? 1.0 : (dx < 0.0 ? -1.0 : 0.0);
            const double gx = 2.0 * sign * (vg.ds - kink0);
            const double gy = 2.0 * vg.dy;
            energy += vg.value - kink0 * s;
            grad[i].dx += gx;
            grad[i].dy += gy;
            grad[j].dx -= gx;
            grad[j].dy -= gy;
        }
    }
    return 2.0 * energy.value();
}

/// Indices sorted by x, ties in index order.
inline std::vector<std::size_t> x_order(std::span<const double> x)
{
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    return order;
}

/// kappa sum_{i != j} |x_i - x_j|, via sum_{i<j} |x_i - x_j| = sum_k x_(k) (2k - n + 1).
inline double kink_penalty(std::span<const CylPoint> pts, double kappa)
{
    if (kappa == 0.0) return 0.0;
    std::vector<double> x(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) x[i] = pts[i].x;
    const auto order = x_order(x);
    const double n = static_cast<double>(x.size());
    CompensatedSum acc;
    for (std::size_t k = 0; k < order.size(); ++k) acc += x[order[k]] * (2.0 * static_cast<double>(k) - n + 1.0);
    return 2.0 * kappa * acc.value();
}

/// Least-squares non-decreasing fit of u, in place (pool adjacent violators).
inline void isotonic_fit(std::vector<double>& u)
{
    std::vector<double> sum;
    std::vector<std::size_t> count;
    for (double v : u) {
        sum.push_back(v);
        count.push_back(1);
        while (sum.size() > 1 &&
               sum[sum.size() - 2] / static_cast<double>(count[count.size() - 2]) >
                   sum.back() / static_cast<double>(count.back())) {
            sum[sum.size() - 2] += sum.back();
            count[count.size() - 2] += count.back();
            sum.pop_back();
            count.pop_back();
        }
    }
    std::size_t k = 0;
    for (std::size_t b = 0; b < sum.size(); ++b) {
        const double mean = sum[b] / static_cast<double>(count[b]);
        for (std::size_t c = 0; c < count[b]; ++c) u[k++] = mean;
    }
}

/// argmin_x 1/2 |x - v|^2 + lambda sum_{i<j} |x_i - x_j|. The minimiser keeps
/// the order of v, so in that order the penalty is linear and the problem is
/// an isotonic fit of v_(k) - lambda (2k - n + 1).
inline std::vector<double> prox_pairwise_abs(std::span<const double> v, double lambda)
{
    const auto order = x_order(v);
    const double n = static_cast<double>(v.size());
    std::vector<double> u(v.size());
    for (std::size_t k = 0; k < order.size(); ++k)
        u[k] = v[order[k]] - lambda * (2.0 * static_cast<double>(k) - n + 1.0);
    isotonic_fit(u);
    std::vector<double> x(v.size());
    for (std::size_t k = 0; k < order.size(); ++k) x[order[k]] = u[k];
    return x;
}

/// x-components of the minimal-norm subgradient of S + kappa sum |x_i - x_j|.
/// Points with exactly equal x form a cluster; inside it the kink forces are
/// chosen to cancel as far as they can, which is a prox with lambda = 2 kappa
/// on the velocities. Without ties this is the plain gradient.
inline std::vector<double> min_norm_x_subgradient(std::span<const CylPoint> pts, const std::vector<Gradient>& g_smooth,
                                                  double kappa)
{
    const std::size_t n = pts.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = g_smooth[i].dx;
    if (kappa == 0.0) return out;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = pts[i].x;
    const auto order = x_order(x);
    for (std::size_t a = 0; a < n;) {
        std::size_t b = a + 1;
        while (b < n && x[order[b]] == x[order[a]]) ++b;
        const double outside = 2.0 * kappa * (static_cast<double>(a) - static_cast<double>(n - b));
        std::vector<double> minus_h(b - a);
        for (std::size_t k = a; k < b; ++k) minus_h[k - a] = -(g_smooth[order[k]].dx + outside);
        const auto velocity = prox_pairwise_abs(minus_h, 2.0 * kappa);
        for (std::size_t k = a; k < b; ++k) out[order[k]] = -velocity[k - a];
        a = b;
    }
    return out;
}

/// Ordered-pair energy, or +inf if any pair is closer than `guard`.
inline double guarded_energy(std::span<const CylPoint> pts, double alpha, double beta, double guard)
{
    const double guard2 = guard * guard;
    CompensatedSum energy;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            if (cylinder_distance2(pts[i], pts[j]) < guard2) return std::numeric_limits<double>::infinity();
            const double s = std::abs(pts[i].x - pts[j].x);
            const double y = wrap_angle(pts[i].y - pts[j].y);
            const double w = s == 0.0 ? -std::log(2.0 * std::abs(std::sin(0.5 * y))) : core_value(alpha * s, s, y);
            energy += w + beta * s;
        }
    }
    return 2.0 * energy.value();
}

/// max over points of |subgradient x| and |dS/dy|.
inline double stationarity(const std::vector<double>& sub_x, const std::vector<Gradient>& g)
{
    double m = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) m = std::max({m, std::abs(sub_x[i]), std::abs(g[i].dy)});
    return m;
}

struct DescentResult {
    std::vector<CylPoint> points;
    RestartRecord record;
};

/// Proximal gradient descent on E = S + kappa sum_{i != j} |x_i - x_j| with
/// Armijo backtracking (halving, sufficient decrease 1e-4 of the model
/// decrease grad S . d + R(x + d) - R(x)). The kink term is handled exactly by
/// its prox, so points can land on a common x; for kappa = 0 the iteration is
/// plain gradient descent. The first trial step of each iteration is the
/// Barzilai-Borwein step from the previous pair of iterates; accepted steps
/// never increase the energy.
inline DescentResult descend(std::vector<CylPoint> x, double alpha, double beta, const MinimizeOptions& opts)
{
    constexpr double armijo_c = 1e-4;
    constexpr double min_step = 1e-20;
    constexpr double max_step = 1e3;
    const double kappa = kink_strength(alpha, beta);
    const std::size_t n = x.size();

    DescentResult out;
    std::vector<Gradient> g, g_new;
    smooth_energy_and_gradient(x, alpha, g);
    double energy = guarded_energy(x, alpha, beta, 0.0);
    double penalty = kink_penalty(x, kappa);
    out.record.initial_energy = energy;
    double step = opts.step_init;
    std::vector<CylPoint> trial(n);
    std::vector<double> vx(n), dx(n), dy(n);
    double gmax = stationarity(min_norm_x_subgradient(x, g, kappa), g);

    std::size_t iter = 0;
    for (; iter < opts.max_iters; ++iter) {
        if (gmax < opts.grad_tol) break;

        bool accepted = false;
        double trial_energy = energy, trial_penalty = penalty;
        while (step >= min_step) {
            for (std::size_t i = 0; i < n; ++i) vx[i] = x[i].x - step * g[i].dx;
            const auto px = kappa > 0.0 ? prox_pairwise_abs(vx, 2.0 * kappa * step) : vx;
            double model = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dx[i] = px[i] - x[i].x;
                dy[i] = -step * g[i].dy;
                trial[i] = {px[i], wrap_angle(x[i].y + dy[i])};
                model += g[i].dx * dx[i] + g[i].dy * dy[i];
            }
            trial_penalty = kink_penalty(trial, kappa);
            model += trial_penalty - penalty;
            // model <= -|d|^2/step < 0 unless the prox step is a fixed point.
            if (!(model < 0.0)) break;
            trial_energy = guarded_energy(trial, alpha, beta, collision_guard);
            if (trial_energy <= energy + armijo_c * model) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break; // stalled: no decrease at any representable step

        if (trial_energy > energy)
            throw InvariantViolation("accepted optimizer step increased the energy");
        smooth_energy_and_gradient(trial, alpha, g_new);
        // BB1 step s.s / s.y with s the step taken and y the change of grad S.
        double sy = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sy += dx[i] * (g_new[i].dx - g[i].dx) + dy[i] * (g_new[i].dy - g[i].dy);
            ss += dx[i] * dx[i] + dy[i] * dy[i];
        }
        const double bb = sy > 0.0 ? ss / sy : 2.0 * step;
        step = std::clamp(bb, 1e-12, max_step);

        x.swap(trial);
        g.swap(g_new);
        energy = trial_energy;
        penalty = trial_penalty;
        gmax = stationarity(min_norm_x_subgradient(x, g, kappa), g);
    }
    out.record.iterations = iter;
    out.record.grad_max = gmax;
    out.record.converged = gmax < opts.grad_tol;
    out.record.final_energy = energy;
    out.points = std::move(x);
    return out;
}

inline Configuration initial_configuration(std::size_t n, const MinimizeOptions& opts, std::uint64_t seed)
{
    switch (opts.init) {
    case InitKind::random:
        return random_config(n, opts.x_spread, seed);
    case InitKind::perturbed_equispaced:
        return perturb(equispaced(n), opts.eps, seed);
    case InitKind::from_file:
        if (opts.start->size() != n)
            throw DomainError("start configuration has " + std::to_string(opts.start->size()) + " points, expected " +
                              std::to_string(n));
        return perturb(*opts.start, opts.eps, seed);
    }
    throw DomainError("unknown init kind");
}

} // namespace detail

/// Minimises sum_{i != j} W~_{alpha,beta}(z_i - z_j) over N-point
/// configurations from `restarts` independent starts and returns the best.
/// Restart r is seeded with derive_seed(opts.seed, r).
inline MinimizeReport minimize(std::size_t n, const KernelParams& params, const MinimizeOptions& opts)
{
    params.validate();
    opts.validate();
    if (n < 2) throw DomainError("minimize needs n >= 2");
    if (params.t != 0.0) throw DomainError("minimize works on the unsmoothed kernel; t must be 0");

    std::vector<detail::DescentResult> runs(opts.restarts);
    parallel_for(opts.restarts, [&](std::size_t r) {
        const std::uint64_t seed = derive_seed(opts.seed, r);
        const Configuration start = detail::initial_configuration(n, opts, seed);
        std::vector<CylPoint> pts(start.points().begin(), start.points().end());
        runs[r] = detail::descend(std::move(pts), params.alpha, params.beta, opts);
        runs[r].record.seed = seed;
    });

    MinimizeReport rep;
    rep.n = n;
    rep.alpha = params.alpha;
    rep.beta = params.beta;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        rep.restarts.push_back(runs[r].record);
        if (runs[r].record.final_energy < rep.best_energy) {
            rep.best_energy = runs[r].record.final_energy;
            rep.best_restart = r;
        }
    }
    const auto& winner = runs[rep.best_restart];
    Provenance prov{"minimize", winner.record.seed, {{"n", double(n)}, {"alpha", params.alpha}, {"beta", params.beta}}};
    Configuration best(winner.points, prov);
    // Report the energy of the returned configuration through the public path.
    rep.best_energy = interaction_energy(best, params);
    rep.converged = winner.record.converged;
    rep.gap = rep.best_energy - equispaced_energy(n);
    const double nd = static_cast<double>(n);
    rep.violation = rep.best_energy < equispaced_energy(n) - violation_tolerance * nd;
    if (rep.best_energy < lower_bound(n) - 1e-9 * nd)
        throw InvariantViolation("optimizer found energy " + std::to_string(rep.best_energy) + " below the lower bound " +
                                 std::to_string(lower_bound(n)));
    rep.best = best.recentered();
    rep.best_raw = std::move(best);
    return rep;
}

struct ScanRow {
    std::size_t n = 0;
    double best_energy = 0.0;
    double residual_per_n = 0.0; ///< (best_energy + n log n) / n
    bool converged = false;
    bool violation = false;
};

struct ScanFit {
    double c_hat = 0.0;            ///< least-squares c in best_energy = -n log n + c n
    double residual_stddev = 0.0;  ///< scatter of (best_energy + n log n) about c_hat n
    std::size_t rows = 0;
};

struct ScanResult {
    std::vector<ScanRow> rows;
    std::vector<MinimizeReport> reports; ///< same order as rows
};

/// Runs minimize for every n (sorted ascending, duplicates dropped).
inline ScanResult scan(std::vector<std::size_t> n_list, const KernelParams& params, const MinimizeOptions& opts)
{
    std::sort(n_list.begin(), n_list.end());
    n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());
    ScanResult out;
    for (std::size_t n : n_list) {
        if (n < 2) throw DomainError("scan needs every n >= 2");
        auto rep = minimize(n, params, opts);
        const double nd = static_cast<double>(n);
        out.rows.push_back({n, rep.best_energy, (rep.best_energy + nd * std::log(nd)) / nd, rep.converged, rep.violation});
        out.reports.push_back(std::move(rep));
    }
    return out;
}

inline ScanFit fit_residual(std::span<const ScanRow> rows)
{
    if (rows.size() < 2) throw InsufficientDataError("fit_residual needs at least 2 rows, got " + std::to_string(rows.size()));
    for (const auto& r : rows)
        if (!r.converged) throw DomainError("fit_residual needs converged rows; n = " + std::to_string(r.n) + " did not converge");
    // r_n = E_n + n log n = c n  =>  c = sum n r_n / sum n^2.
    CompensatedSum num, den;
    for (const auto& r : rows) {
        const double nd = static_cast<double>(r.n);
        num += nd * (r.best_energy + nd * std::log(nd));
        den += nd * nd;
    }
    ScanFit fit;
    fit.rows = rows.size();
    fit.c_hat = num.value() / den.value();
    CompensatedSum sq;
    for (const auto& r : rows) {
        const double nd = static_cast<double>(r.n);
        const double e = r.best_energy + nd * std::log(nd) - fit.c_hat * nd;
        sq += e * e;
    }
    fit.residual_stddev = std::sqrt(sq.value() / static_cast<double>(rows.size() - 1));
    return fit;
}

} // namespace grainflow
