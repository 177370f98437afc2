#pragma once

// Property suites behind `grainflow verify`. Each property reports its worst
// margin over the sample; a property passes iff that margin is >= 0.

#include <grainflow/grainflow.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace grainflow::cli {

struct PropertyResult {
    std::string name;
    std::size_t samples = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    bool pass() const { return worst_margin >= 0.0; }
};

namespace detail {

inline void record(PropertyResult& r, double margin)
{
    ++r.samples;
    if (std::isnan(margin)) margin = -std::numeric_limits<double>::infinity();
    r.worst_margin = std::min(r.worst_margin, margin);
}

/// Random configuration in which every pair has |dx| >= min_dx, so finite
/// differences never straddle the |x| kink.
inline Configuration kink_free_config(std::size_t n, double spread, double min_dx, Rng& rng)
{
    for (;;) {
        const Configuration c = random_config(n, spread, rng.next());
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i)
            for (std::size_t j = i + 1; j < n && ok; ++j)
                if (std::abs(c[i].x - c[j].x) < min_dx) ok = false;
        if (ok) return c;
    }
}

} // namespace detail

/// Periodization identities, closed form against the exponential series and
/// closed form against Fourier quadrature.
inline std::vector<PropertyResult> suite_identities(std::size_t samples, std::uint64_t seed)
{
    Rng rng(seed);
    PropertyResult inv{"perid_inverse_square"}, logp{"perid_log"}, series{"series_agreement"},
        fourier{"fourier_agreement"};
    constexpr std::size_t M = 2000;
    for (std::size_t k = 0; k < samples; ++k) {
        const double x = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.05, 3.0);
        const double y = rng.uniform(-pi, pi);
        // Tail of the inverse-square sum is at most 1/(pi^2 (2M - 1)).
        const auto a = perid_inverse_square(x, y, M);
        detail::record(inv, 1.0 / (pi * pi * (2.0 * M - 1.0)) + 1e-12 - std::abs(a.partial - a.closed));
        // Paired log terms are (2r^2 - 4y^2)/c^2 + O(c^-4), so the tail is below this.
        const auto b = perid_log(x, y, M);
        const double tol = (x * x + 3.0 * y * y + 1.0) / (pi * pi * M);
        detail::record(logp, tol - std::abs(b.partial - b.closed));

        const double alpha = rng.uniform(-1.0, 1.0);
        const double sx = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.02, 12.0);
        const double closed = w_alpha({sx, y}, alpha);
        const auto tv = w_series({sx, y}, alpha);
        detail::record(series, 1e-10 - std::abs(closed - tv.value));
    }
    // Fourier quadrature is expensive; a bounded subsample is enough here.
    const std::size_t nf = std::min<std::size_t>(samples, 40);
    for (std::size_t k = 0; k < nf; ++k) {
        const double alpha = rng.uniform(-1.0, 1.0);
        const double x = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.1, 3.0);
        const double y = rng.uniform(-pi, pi);
        const auto cut = fourier_cutoffs_for(std::abs(x), 1e-6);
        const auto f = fourier_w({x, y}, alpha, cut, 8000);
        detail::record(fourier, 1e-4 - std::abs(f.value - w_alpha({x, y}, alpha)));
    }
    return {inv, logp, series, fourier};
}

/// Smoothing bound, lower bound on random configurations and the certificate
/// chain link by link.
inline std::vector<PropertyResult> suite_bounds(std::size_t samples, std::uint64_t seed)
{
    Rng rng(seed);
    PropertyResult smooth{"smoothing_bound"}, lower{"lower_bound"}, la{"certificate_link_a"},
        lb{"certificate_link_b"}, lbr{"certificate_link_b_repaired"}, lc{"certificate_link_c"},
        psd{"certificate_psd"};
    for (std::size_t k = 0; k < samples; ++k) {
        const double x = rng.uniform(-3.0, 3.0);
        const double y = rng.uniform(-pi, pi);
        const double alpha = rng.uniform(-1.0, 1.0);
        const double t = std::exp(rng.uniform(std::log(1e-3), 0.0));
        if (x == 0.0 && y == 0.0) continue;
        detail::record(smooth, w_alpha({x, y}, alpha) - (w_smoothed({x, y}, alpha, t) - 0.5 * t) + 1e-12);
    }
    const std::size_t sizes[] = {2, 4, 8, 16, 32};
    const double alphas[] = {-1.0, 0.0, 1.0};
    for (std::size_t k = 0; k < samples; ++k) {
        const std::size_t n = sizes[k % 5];
        const double alpha = alphas[(k / 5) % 3];
        const Configuration c = random_config(n, rng.uniform(0.1, 3.0), rng.next());
        const double nd = static_cast<double>(n);
        const double e = interaction_energy(c, KernelParams{alpha, 0.0, 0.0});
        detail::record(lower, e - lower_bound(n) + 1e-9 * nd);
        const auto cert = lower_bound_certificate(c, alpha);
        detail::record(la, cert.interaction - cert.chain_rhs + 1e-9 * (nd + std::abs(cert.interaction)));
        detail::record(lb, cert.log_inv_t - cert.w0);
        detail::record(lbr, cert.log_inv_t + 0.5 * cert.t - cert.w0);
        detail::record(lc, cert.final_bound - cert.lower + 1e-12 * (nd + std::abs(cert.lower)));
        detail::record(psd, cert.quadratic_form + 1e-9 * nd);
    }
    return {smooth, lower, la, lb, lbr, lc, psd};
}

/// Positive semidefiniteness of the smoothed quadratic form on 32-point sets.
inline std::vector<PropertyResult> suite_pd(std::size_t samples, std::uint64_t seed)
{
    Rng rng(seed);
    PropertyResult pd{"smoothed_form_psd"};
    const double ts[] = {0.01, 0.1, 1.0};
    const double alphas[] = {-1.0, 0.0, 1.0};
    for (std::size_t k = 0; k < samples; ++k) {
        const Configuration c = random_config(32, rng.uniform(0.0, 3.0), rng.next());
        const double q = smoothed_quadratic_form(c, alphas[k % 3], ts[(k / 3) % 3]);
        detail::record(pd, q + 1e-9 * 32.0);
    }
    return {pd};
}

/// Analytic energy gradient against central differences (step 1e-6) on
/// 8-point configurations whose pairs stay away from the |x| kink.
inline std::vector<PropertyResult> suite_gradient(std::size_t samples, std::uint64_t seed)
{
    Rng rng(seed);
    PropertyResult grad{"energy_gradient_fd"};
    constexpr double h = 1e-6;
    for (std::size_t k = 0; k < samples; ++k) {
        const KernelParams p{rng.uniform(-1.0, 1.0), 0.0, rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.0, 1.0)};
        const Configuration c = detail::kink_free_config(8, 1.5, 1e-3, rng);
        const auto g = energy_gradient(c, p);
        std::vector<CylPoint> pts(c.points().begin(), c.points().end());
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (int axis = 0; axis < 2; ++axis) {
                double& coord = axis == 0 ? pts[i].x : pts[i].y;
                const double saved = coord;
                coord = saved + h;
                const double ep = interaction_energy(pts, p);
                coord = saved - h;
                const double em = interaction_energy(pts, p);
                coord = saved;
                const double fd = (ep - em) / (2.0 * h);
                const double an = axis == 0 ? g[i].dx : g[i].dy;
                worst = std::min(worst, 1e-5 * std::max(1.0, std::abs(an)) - std::abs(an - fd));
            }
        }
        detail::record(grad, worst);
    }
    return {grad};
}

} // namespace grainflow::cli
