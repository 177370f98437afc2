#pragma once

// Discrete pair energies on the cylinder. Every pair sum here runs over
// ORDERED pairs, sum_{i != j} W(z_i - z_j), i.e. twice the sum over i < j.

#include <grainflow/configuration.hpp>
#include <grainflow/error.hpp>
#include <grainflow/kernel.hpp>
#include <grainflow/numeric.hpp>
#include <grainflow/parallel.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace grainflow {

/// 1 - log 2, the O(N) constant of the lower bound.
inline const double lower_bound_constant = 1.0 - std::log(2.0);

/// -N(log N + 1 - log 2).
inline double lower_bound(std::size_t n)
{
    if (n == 0) throw DomainError("lower_bound needs N >= 1");
    const double nd = static_cast<double>(n);
    return -nd * (std::log(nd) + lower_bound_constant);
}

/// -N log N, the energy of any equispaced vertical configuration.
inline double equispaced_energy(std::size_t n)
{
    if (n == 0) throw DomainError("equispaced_energy needs N >= 1");
    const double nd = static_cast<double>(n);
    return -nd * std::log(nd);
}

/// prod_{j=1}^{N-1} 2 sin(pi j/N), which equals N. The running product is
/// kept as mantissa/exponent so that it neither underflows nor overflows.
inline double sine_product_check(std::size_t n)
{
    if (n < 2) throw DomainError("sine_product_check needs N >= 2");
    double mant = 1.0;
    long exp2 = 0;
    for (std::size_t j = 1; j < n; ++j) {
        mant *= 2.0 * std::sin(pi * static_cast<double>(j) / static_cast<double>(n));
        int e = 0;
        mant = std::frexp(mant, &e);
        exp2 += e;
    }
    return std::ldexp(mant, static_cast<int>(exp2));
}

namespace detail {

// Rows are farmed out to threads only when there is enough work.
inline constexpr std::size_t parallel_rows_threshold = 512;

/// Ordered-pair sum of f(i, j) over i != j, assuming f symmetric: 2 sum_{i<j}.
/// Row totals are compensated and reduced in index order, so the result does
/// not depend on the thread count.
template <typename PairFn>
double symmetric_pair_sum(std::size_t n, PairFn&& f)
{
    std::vector<double> rows(n, 0.0);
    auto row = [&](std::size_t i) {
        CompensatedSum acc;
        for (std::size_t j = i + 1; j < n; ++j) acc += f(i, j);
        rows[i] = acc.value();
    };
    if (n >= parallel_rows_threshold)
        parallel_for(n, row);
    else
        for (std::size_t i = 0; i < n; ++i) row(i);
    CompensatedSum total;
    for (double r : rows) total += r;
    return 2.0 * total.value();
}

inline void check_distinct(std::span<const CylPoint> pts, std::size_t i, std::size_t j)
{
    const double tol2 = min_point_distance * min_point_distance;
    if (cylinder_distance2(pts[i], pts[j]) < tol2) throw CoincidentPointsError(i, j);
}

} // namespace detail

/// sum_{i != j} [W_alpha + beta |dx|](z_i - z_j). When p.t > 0 the smoothed
/// kernel W_{alpha,t} replaces W_alpha.
inline double interaction_energy(std::span<const CylPoint> pts, const KernelParams& p)
{
    p.validate();
    return detail::symmetric_pair_sum(pts.size(), [&](std::size_t i, std::size_t j) {
        const Displacement d{pts[i].x - pts[j].x, pts[i].y - pts[j].y};
        try {
            const double w = p.t > 0.0 ? w_smoothed(d, p.alpha, p.t) : w_alpha(d, p);
            return w + p.beta * std::abs(d.dx);
        } catch (const SingularPointError&) {
            throw CoincidentPointsError(i, j);
        }
    });
}

inline double interaction_energy(const Configuration& c, const KernelParams& p)
{
    return interaction_energy(c.points(), p);
}

/// d/dz_i of the ordered pair sum: sum_{j != i} 2 grad_w(z_i - z_j).
/// Requires p.t == 0.
inline std::vector<Gradient> energy_gradient(std::span<const CylPoint> pts, const KernelParams& p)
{
    p.validate();
    if (p.t != 0.0) throw DomainError("energy_gradient is defined for the unsmoothed kernel (t = 0)");
    const std::size_t n = pts.size();
    std::vector<Gradient> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            detail::check_distinct(pts, i, j);
            const Gradient gij = grad_w({pts[i].x - pts[j].x, pts[i].y - pts[j].y}, p);
            g[i].dx += 2.0 * gij.dx;
            g[i].dy += 2.0 * gij.dy;
            g[j].dx -= 2.0 * gij.dx;
            g[j].dy -= 2.0 * gij.dy;
        }
    }
    return g;
}

inline std::vector<Gradient> energy_gradient(const Configuration& c, const KernelParams& p)
{
    return energy_gradient(c.points(), p);
}

/// sum over all ordered pairs including i = j of W_{alpha,t}(z_i - z_j).
/// Non-negative up to rounding, since W_{alpha,t} is positive definite.
inline double smoothed_quadratic_form(std::span<const CylPoint> pts, double alpha, double t)
{
    if (!(t > 0.0)) throw DomainError("smoothed_quadratic_form needs t > 0");
    const double diag = static_cast<double>(pts.size()) * w_smoothed({0.0, 0.0}, alpha, t);
    const double off = detail::symmetric_pair_sum(pts.size(), [&](std::size_t i, std::size_t j) {
        return w_smoothed({pts[i].x - pts[j].x, pts[i].y - pts[j].y}, alpha, t);
    });
    return diag + off;
}

inline double smoothed_quadratic_form(const Configuration& c, double alpha, double t)
{
    return smoothed_quadratic_form(c.points(), alpha, t);
}

/// Every intermediate quantity of the smoothing argument for the lower bound
/// at t = 2/N:
///   (a) sum_{i!=j} W_a >= sum_{i,j} W_{a,t} - (t/2) N(N-1) - N W_{a,t}(0)
///   (b) W_{a,t}(0) <= log(1/t)
///   (c) -(t/2) N(N-1) - N W_{a,t}(0) >= -N(log N + 1 - log 2)
/// plus positive semidefiniteness of the smoothed form, which joins (a) and
/// (c). W_{a,t}(0) is -log(1 - e^{-t}); the closed expression
/// -log(2 sinh(t/2)) misses its t/2 term, so (b) as written fails for every
/// t > 0. `link_b_repaired` checks W_{a,t}(0) <= log(1/t) + t/2 instead, and
/// (c) holds either way.
struct CertificateReport {
    std::size_t n = 0;
    double alpha = 0.0;
    double t = 0.0;
    double interaction = 0.0;     ///< sum_{i != j} W_alpha
    double quadratic_form = 0.0;  ///< sum_{i,j} W_{alpha,t}
    double w0 = 0.0;              ///< W_{alpha,t}(0) from the closed form
    double w0_stated = 0.0;       ///< -log(2 sinh(t/2))
    double log_inv_t = 0.0;       ///< log(1/t)
    double chain_rhs = 0.0;       ///< right-hand side of (a)
    double final_bound = 0.0;     ///< -(t/2) N(N-1) - N W_{alpha,t}(0)
    double lower = 0.0;           ///< -N(log N + 1 - log 2)
    bool link_a = false;
    bool link_b = false;
    bool link_b_repaired = false;
    bool link_c = false;
    bool positive_semidefinite = false;

    bool all_links_hold() const { return link_a && link_b && link_c && positive_semidefinite; }
    bool repaired_chain_holds() const { return link_a && link_b_repaired && link_c && positive_semidefinite; }
};

inline CertificateReport lower_bound_certificate(std::span<const CylPoint> pts, double alpha)
{
    if (pts.empty()) throw DomainError("certificate needs N >= 1");
    CertificateReport r;
    r.n = pts.size();
    r.alpha = alpha;
    const double nd = static_cast<double>(r.n);
    r.t = 2.0 / nd;
    r.interaction = interaction_energy(pts, KernelParams{alpha, 0.0, 0.0});
    r.quadratic_form = smoothed_quadratic_form(pts, alpha, r.t);
    r.w0 = w_smoothed({0.0, 0.0}, alpha, r.t);
    r.w0_stated = -std::log(2.0 * std::sinh(0.5 * r.t));
    r.log_inv_t = std::log(1.0 / r.t);
    const double half_t_pairs = 0.5 * r.t * nd * (nd - 1.0);
    r.chain_rhs = r.quadratic_form - half_t_pairs - nd * r.w0;
    r.final_bound = -half_t_pairs - nd * r.w0;
    r.lower = lower_bound(r.n);

    const double scale = 1e-9 * (nd + std::abs(r.interaction) + std::abs(r.quadratic_form));
    r.link_a = r.interaction >= r.chain_rhs - scale;
    r.link_b = r.w0 <= r.log_inv_t;
    r.link_b_repaired = r.w0 <= r.log_inv_t + 0.5 * r.t;
    r.link_c = r.final_bound >= r.lower - 1e-12 * (nd + std::abs(r.lower));
    r.positive_semidefinite = r.quadratic_form >= -1e-9 * nd;
    return r;
}

inline CertificateReport lower_bound_certificate(const Configuration& c, double alpha)
{
    return lower_bound_certificate(c.points(), alpha);
}

struct EnergyReport {
    std::size_t n = 0;
    double alpha = 0.0;
    double beta = 0.0;
    double t = 0.0;
    double interaction = 0.0;
    /// sqrt(sum_i |grad_i|^2 / N); empty when t > 0.
    std::optional<double> gradient_norm;
    double lower = 0.0;
    double equispaced = 0.0;
};

inline EnergyReport make_energy_report(const Configuration& c, const KernelParams& p)
{
    EnergyReport r;
    r.n = c.size();
    r.alpha = p.alpha;
    r.beta = p.beta;
    r.t = p.t;
    r.interaction = interaction_energy(c, p);
    if (p.t == 0.0) {
        CompensatedSum sq;
        for (const auto& g : energy_gradient(c, p)) sq += g.dx * g.dx + g.dy * g.dy;
        r.gradient_norm = std::sqrt(sq.value() / static_cast<double>(r.n));
    }
    r.lower = lower_bound(r.n);
    r.equispaced = equispaced_energy(r.n);
    return r;
}

} // namespace grainflow
