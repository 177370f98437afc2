#pragma once

// Read-Shockley pair kernel on the cylinder R x T, its Poisson-smoothed
// family, independent series/Fourier evaluations and the planar Volterra
// potential it is periodized from.
//
//   W_a(x,y)   = 1/2 [ a x sinh x / (cosh x - cos y) - log(2(cosh x - cos y)) + (1-a)|x| ]
//              = sum_{n>=1} (1/n)(1 + a n|x|) e^{-n|x|} cos(n y)
//   W_a,t(x,y) = sum_{n>=1} (1/n)(1 + a n|x|) e^{-n(|x|+t)} cos(n y)
//
// All entry points reduce dy into (-pi, pi] first.

#include <grainflow/error.hpp>
#include <grainflow/numeric.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

namespace grainflow {

struct KernelParams {
    double alpha = 1.0; ///< anisotropy, must lie in [-1, 1]
    double t = 0.0;     ///< Poisson smoothing length, >= 0
    double beta = 0.0;  ///< extra beta|x| repulsion, >= 0

    void validate() const
    {
        if (!(alpha >= -1.0 && alpha <= 1.0))
            throw DomainError("alpha must lie in [-1, 1], got " + std::to_string(alpha));
        if (!(t >= 0.0)) throw DomainError("smoothing t must be >= 0, got " + std::to_string(t));
        if (!(beta >= 0.0)) throw DomainError("beta must be >= 0, got " + std::to_string(beta));
    }
};

struct Displacement {
    double dx = 0.0;
    double dy = 0.0;
};

struct Gradient {
    double dx = 0.0;
    double dy = 0.0;
};

/// A truncated evaluation together with a bound (or estimate) on what was
/// left out.
struct TruncatedValue {
    double value = 0.0;
    double error = 0.0;
    std::size_t terms = 0;
};

namespace detail {

// Beyond this |x| the exponential series converges in a couple of terms and
// the hyperbolic closed form would eventually overflow.
inline constexpr double large_x = 30.0;
// Below this the log is taken of the stable denominator directly; above it
// log1p of e^{-s}(e^{-s} - 2cos y) keeps full precision in the tail.
inline constexpr double small_s = 0.5;

inline void check_alpha(double alpha)
{
    if (!(alpha >= -1.0 && alpha <= 1.0))
        throw DomainError("alpha must lie in [-1, 1], got " + std::to_string(alpha));
}

[[noreturn]] inline void singular(double dx, double dy)
{
    throw SingularPointError("kernel is singular at (" + std::to_string(dx) + ", " + std::to_string(dy) +
                             "); the singular set is (0, 2 pi k)");
}

/// sum_{n=1..K} (1/n)(1 + ax n) e^{-n s} cos(n y) with ax = alpha*|x|.
inline double series_sum(double ax, double s, double y, std::size_t terms) noexcept
{
    // Summed from the smallest term up.
    double acc = 0.0;
    for (std::size_t n = terms; n >= 1; --n) {
        const double nd = static_cast<double>(n);
        acc += (1.0 / nd + ax) * std::exp(-nd * s) * std::cos(nd * y);
    }
    return acc;
}

/// Terms needed so that (1 + n|x|) e^{-n s} drops below tol.
inline std::size_t series_terms_for(double abs_x, double s, double tol = 1e-14)
{
    if (!(s > 0.0)) return 0;
    std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(-std::log(tol) / s)));
    while ((1.0 + static_cast<double>(n) * abs_x) * std::exp(-static_cast<double>(n) * s) >= tol &&
           n < 100'000'000)
        n += n / 4 + 1;
    return n;
}

/// Value of the smoothed kernel in the stable e^{-s} form,
///   ax e^{-s}(cos y - e^{-s}) / D - 1/2 log D,  D = (1 - e^{-s})^2 + 4 e^{-s} sin^2(y/2),
/// where s = |x| + t and ax = alpha |x|. With t = 0 this is W_a itself.
/// y must already be wrapped.
inline double core_value(double ax, double s, double y)
{
    if (s > large_x) return series_sum(ax, s, y, series_terms_for(std::abs(ax), s, 1e-18));
    const double sh = std::sin(0.5 * y);
    const double sin2 = sh * sh;
    const double q = std::exp(-s);
    const double den = 4.0 * (std::sinh(0.5 * s) * std::sinh(0.5 * s) + sin2); // 2(cosh s - cos y)
    if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double D = q * den;
    const double log_D = s <= small_s ? std::log(den) - s : std::log1p(q * (q - 2.0 * std::cos(y)));
    if (ax == 0.0) return -0.5 * log_D;
    const double cos_minus_q = -std::expm1(-s) - 2.0 * sin2;
    return ax * q * cos_minus_q / D - 0.5 * log_D;
}

struct ValueAndGradient {
    double value = 0.0;
    double ds = 0.0; ///< derivative along s = |x|
    double dy = 0.0;
};

/// W_a and its partials with respect to s = |x| and y, t = 0.
inline ValueAndGradient core_value_and_gradient(double alpha, double s, double y)
{
    ValueAndGradient out;
    if (s > large_x) {
        const std::size_t terms = series_terms_for(s, s, 1e-18);
        for (std::size_t n = terms; n >= 1; --n) {
            const double nd = static_cast<double>(n);
            const double e = std::exp(-nd * s);
            const double c = std::cos(nd * y);
            const double sn = std::sin(nd * y);
            out.value += (1.0 / nd + alpha * s) * e * c;
            out.ds += (alpha - 1.0 - alpha * nd * s) * e * c;
            out.dy -= (1.0 + alpha * nd * s) * e * sn;
        }
        return out;
    }
    const double sh = std::sin(0.5 * y);
    const double sin2 = sh * sh;
    const double cy = std::cos(y);
    const double sy = std::sin(y);
    const double q = std::exp(-s);
    const double shs = std::sinh(0.5 * s);
    const double den = 4.0 * (shs * shs + sin2);
    if (den == 0.0) {
        out.value = out.ds = out.dy = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    const double D = q * den;
    const double log_D = s <= small_s ? std::log(den) - s : std::log1p(q * (q - 2.0 * cy));
    const double P = q * (-std::expm1(-s) - 2.0 * sin2); // e^{-s}(cos y - e^{-s})
    const double dP_ds = -q * (cy - 2.0 * q);
    const double inv_D = 1.0 / D;
    out.value = alpha * s * P * inv_D - 0.5 * log_D;
    out.ds = alpha * (P * inv_D + s * (dP_ds * D - 2.0 * P * P) * inv_D * inv_D) - P * inv_D;
    out.dy = -q * sy * (alpha * s * (D + 2.0 * P) * inv_D * inv_D + inv_D);
    return out;
}

} // namespace detail

/// 2(cosh dx - cos dy) evaluated as 4(sinh^2(dx/2) + sin^2(dy/2)). Keeps full
/// relative precision down to the singular lattice; +inf once sinh overflows.
inline double stable_den(Displacement d) noexcept
{
    const double a = std::sinh(0.5 * d.dx);
    const double b = std::sin(0.5 * d.dy);
    return 4.0 * (a * a + b * b);
}

/// Read-Shockley kernel W_alpha (beta and t in p are ignored; see w_tilde and
/// w_smoothed).
inline double w_alpha(Displacement d, const KernelParams& p)
{
    detail::check_alpha(p.alpha);
    const double y = wrap_angle(d.dy);
    const double s = std::abs(d.dx);
    if (s == 0.0) {
        if (y == 0.0) detail::singular(d.dx, d.dy);
        return -std::log(2.0 * std::abs(std::sin(0.5 * y)));
    }
    const double v = detail::core_value(p.alpha * s, s, y);
    if (std::isnan(v)) detail::singular(d.dx, d.dy);
    return v;
}

inline double w_alpha(Displacement d, double alpha) { return w_alpha(d, KernelParams{alpha, 0.0, 0.0}); }

/// W_alpha + beta |dx|.
inline double w_tilde(Displacement d, const KernelParams& p)
{
    if (!(p.beta >= 0.0)) throw DomainError("beta must be >= 0");
    return w_alpha(d, p) + p.beta * std::abs(d.dx);
}

/// Poisson-smoothed kernel W_{alpha,t}. Bounded for t > 0, equal to W_alpha at
/// t = 0. At the origin its value is -log(1 - e^{-t}) = t/2 - log(2 sinh(t/2)).
inline double w_smoothed(Displacement d, double alpha, double t)
{
    detail::check_alpha(alpha);
    if (!(t >= 0.0)) throw DomainError("smoothing t must be >= 0, got " + std::to_string(t));
    const double y = wrap_angle(d.dy);
    const double ax = std::abs(d.dx);
    const double s = ax + t;
    if (s == 0.0) {
        if (y == 0.0) detail::singular(d.dx, d.dy);
        return -std::log(2.0 * std::abs(std::sin(0.5 * y)));
    }
    return detail::core_value(alpha * ax, s, y);
}

/// Partial sum n = 1..K of the exponential series of W_{alpha,t}. The error
/// field bounds the omitted tail: a geometric bound when |dx| + t > 0 and the
/// Dirichlet bound 1/((K+1)|sin(dy/2)|) on the conditionally convergent
/// series at dx = t = 0.
inline TruncatedValue w_series(Displacement d, double alpha, double t, std::size_t terms)
{
    detail::check_alpha(alpha);
    if (!(t >= 0.0)) throw DomainError("smoothing t must be >= 0");
    const double y = wrap_angle(d.dy);
    const double ax = std::abs(d.dx);
    const double s = ax + t;
    if (s == 0.0 && y == 0.0)
        throw DomainError("exponential series diverges at |dx| + t = 0, dy = 0 (mod 2 pi)");
    TruncatedValue out;
    out.terms = terms;
    out.value = detail::series_sum(alpha * ax, s, y, terms);
    const double next = static_cast<double>(terms) + 1.0;
    if (s > 0.0)
        out.error = std::exp(-next * s) / (-std::expm1(-s)) * (1.0 / next + std::abs(alpha) * ax);
    else
        out.error = 1.0 / (next * std::abs(std::sin(0.5 * y)));
    return out;
}

/// w_series with K chosen so that (1 + K|dx|) e^{-K(|dx|+t)} < 1e-14.
inline TruncatedValue w_series(Displacement d, double alpha, double t = 0.0)
{
    const double s = std::abs(d.dx) + t;
    if (!(s > 0.0)) throw DomainError("default truncation needs |dx| + t > 0; pass an explicit term count");
    return w_series(d, alpha, t, detail::series_terms_for(std::abs(d.dx), s));
}

/// Gradient of w_tilde with respect to (dx, dy). The |x| kink contributes 0
/// exactly at dx = 0.
inline Gradient grad_w(Displacement d, const KernelParams& p)
{
    detail::check_alpha(p.alpha);
    const double y = wrap_angle(d.dy);
    const double s = std::abs(d.dx);
    if (s == 0.0 && y == 0.0) detail::singular(d.dx, d.dy);
    const auto vg = detail::core_value_and_gradient(p.alpha, s, y);
    if (std::isnan(vg.value)) detail::singular(d.dx, d.dy);
    const double sign = d.dx > 0.0 ? 1.0 : (d.dx < 0.0 ? -1.0 : 0.0);
    return {sign * (vg.ds + p.beta), vg.dy};
}

/// Planar Volterra potential alpha x^2/(x^2+y^2) - 1/2 log(x^2+y^2).
inline double v_alpha(double x, double y, double alpha)
{
    const double r2 = x * x + y * y;
    if (r2 == 0.0) throw SingularPointError("Volterra potential is singular at the origin");
    return alpha * x * x / r2 - 0.5 * std::log(r2);
}

struct PeriodizationSums {
    double partial = 0.0;
    double closed = 0.0;
};

/// sum_{|n|<=M} 1/(x^2 + (2 pi n + y)^2) against sinh x / (2x(cosh x - cos y)).
inline PeriodizationSums perid_inverse_square(double x, double y, std::size_t M)
{
    if (x == 0.0) throw DomainError("perid_inverse_square requires x != 0");
    const double x2 = x * x;
    CompensatedSum acc;
    for (std::size_t k = M; k >= 1; --k) {
        const double shift = two_pi * static_cast<double>(k);
        const double a = shift + y;
        const double b = -shift + y;
        acc += 1.0 / (x2 + a * a) + 1.0 / (x2 + b * b);
    }
    acc += 1.0 / (x2 + y * y);
    const double s = std::abs(x);
    const double q = std::exp(-s);
    const double D = q * stable_den({s, y});
    return {acc.value(), -std::expm1(-2.0 * s) / (2.0 * s * D)};
}

/// log(x^2+y^2) + sum_{0<|n|<=M} log[(x^2+(2 pi n+y)^2)/(2 pi n)^2] against
/// log(2(cosh x - cos y)).
inline PeriodizationSums perid_log(double x, double y, std::size_t M)
{
    if (x == 0.0 && wrap_angle(y) == 0.0) detail::singular(x, y);
    const double r2 = x * x + y * y;
    CompensatedSum acc;
    for (std::size_t k = M; k >= 1; --k) {
        const double c = two_pi * static_cast<double>(k);
        const double c2 = c * c;
        // (x^2 + (c +- y)^2)/c^2 = 1 + (r2 +- 2cy)/c^2
        const double plus = std::log1p((r2 + 2.0 * c * y) / c2);
        const double minus = std::log1p((r2 - 2.0 * c * y) / c2);
        acc += plus + minus;
    }
    PeriodizationSums out;
    out.partial = (r2 == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(r2)) + acc.value();
    out.closed = std::log(stable_den({x, y}));
    return out;
}

/// Integrand of the Fourier representation,
/// ((1-a) k1^2 + (1+a) k2^2) / (k1^2 + k2^2)^2.
inline double fourier_integrand(double k1, double k2, double alpha)
{
    const double u = k1 * k1 + k2 * k2;
    return ((1.0 - alpha) * k1 * k1 + (1.0 + alpha) * k2 * k2) / (u * u);
}

struct FourierCutoffs {
    double k1_max = 200.0;   ///< k1 integration range [-k1_max, k1_max]
    std::size_t k2_max = 64; ///< modes 0 < |k2| <= k2_max
};

/// Cutoffs for fourier_w at |dx| = abs_x > 0: k2_max makes the k2 tail bound
/// fall below tol and k1_max puts the k1 tail in the asymptotic regime.
inline FourierCutoffs fourier_cutoffs_for(double abs_x, double tol)
{
    if (!(abs_x > 0.0)) throw DomainError("fourier_cutoffs_for needs |dx| > 0");
    if (!(tol > 0.0)) throw DomainError("fourier_cutoffs_for needs tol > 0");
    FourierCutoffs c;
    c.k1_max = std::max(200.0, 20.0 / abs_x);
    std::size_t m = 1;
    const double geo = -std::expm1(-abs_x);
    while (m < 1'000'000) {
        const double next = static_cast<double>(m) + 1.0;
        if (std::exp(-next * abs_x) / geo * (1.0 / next + abs_x) < tol) break;
        m += m / 8 + 1;
    }
    c.k2_max = m;
    return c;
}

namespace detail {

// 8-point Gauss-Legendre on [-1, 1].
inline constexpr std::array<double, 4> gl8_nodes = {0.1834346424956498, 0.5255324099163290,
                                                    0.7966664774136267, 0.9602898564975363};
inline constexpr std::array<double, 4> gl8_weights = {0.3626837833783620, 0.3137066458778873,
                                                      0.2223810344533745, 0.1012285362903763};

/// int_0^{K} g_m(k) cos(k x) dk with `panels` Gauss-Legendre panels.
inline double fourier_k1_integral(double m, double x, double alpha, double K, std::size_t panels)
{
    const double h = K / static_cast<double>(panels);
    CompensatedSum acc;
    for (std::size_t p = 0; p < panels; ++p) {
        const double mid = (static_cast<double>(p) + 0.5) * h;
        double part = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            const double off = 0.5 * h * gl8_nodes[i];
            const double k_lo = mid - off;
            const double k_hi = mid + off;
            part += gl8_weights[i] * (fourier_integrand(k_lo, m, alpha) * std::cos(k_lo * x) +
                                      fourier_integrand(k_hi, m, alpha) * std::cos(k_hi * x));
        }
        acc += 0.5 * h * part;
    }
    return acc.value();
}

/// int_K^inf g_m(k) dk in closed form (g_m >= 0 on [-1, 1]).
inline double fourier_tail_abs(double m, double alpha, double K)
{
    const double arc = (0.5 * pi - std::atan(K / m)) / m;
    return (1.0 - alpha) * arc + alpha * (arc - K / (K * K + m * m));
}

} // namespace detail

/// Evaluates W_alpha through its Fourier representation
///   sum_{k2 != 0} (1/2pi) int ((1-a)k1^2 + (1+a)k2^2)/|k|^4 e^{i(k1 x + k2 y)} dk1,
/// integrating k1 over [0, k1_max] by composite Gauss-Legendre with
/// `quad_points` nodes and summing 0 < |k2| <= k2_max. The k1 tail beyond the
/// cutoff is added in closed form at x = 0 and by a three-term asymptotic
/// expansion when k1_max |x| >= 20. The returned error is an estimate made of
/// the quadrature difference against half resolution, the k2 tail bound and
/// the uncorrected or asymptotic k1 tail. The k2 = 0 summand is not part of
/// this sum: the k2 != 0 modes alone reproduce W_alpha.
inline TruncatedValue fourier_w(Displacement d, double alpha, FourierCutoffs cutoffs = {},
                                std::size_t quad_points = 200'000,
                                double tolerance = std::numeric_limits<double>::infinity())
{
    detail::check_alpha(alpha);
    const double y = wrap_angle(d.dy);
    const double x = std::abs(d.dx);
    if (x == 0.0 && y == 0.0) detail::singular(d.dx, d.dy);
    if (!(cutoffs.k1_max > 0.0) || cutoffs.k2_max == 0)
        throw DomainError("fourier_w needs k1_max > 0 and k2_max >= 1");
    const double K = cutoffs.k1_max;
    const std::size_t panels = std::max<std::size_t>(2, quad_points / 8);
    const bool asymptotic = x > 0.0 && K * x >= 20.0;

    CompensatedSum value;
    double quad_err = 0.0;
    double tail_err = 0.0;
    for (std::size_t mi = 1; mi <= cutoffs.k2_max; ++mi) {
        const double m = static_cast<double>(mi);
        const double fine = detail::fourier_k1_integral(m, x, alpha, K, panels);
        const double coarse = detail::fourier_k1_integral(m, x, alpha, K, panels / 2);
        double tail = 0.0;
        if (x == 0.0) {
            tail = detail::fourier_tail_abs(m, alpha, K);
        } else if (asymptotic) {
            const double u = K * K + m * m;
            const double g = fourier_integrand(K, m, alpha);
            const double g1 = -2.0 * (1.0 - alpha) * K / (u * u) - 8.0 * alpha * m * m * K / (u * u * u);
            const double g2 = (1.0 - alpha) * (-2.0 / (u * u) + 8.0 * K * K / (u * u * u)) +
                              2.0 * alpha * m * m * (-4.0 / (u * u * u) + 24.0 * K * K / (u * u * u * u));
            const double sKx = std::sin(K * x);
            const double cKx = std::cos(K * x);
            tail = -g * sKx / x - g1 * cKx / (x * x) + g2 * sKx / (x * x * x);
            tail_err += (2.0 / pi) * std::abs(g2) / (x * x * x);
        } else {
            tail_err += (2.0 / pi) * detail::fourier_tail_abs(m, alpha, K);
        }
        const double weight = (2.0 / pi) * std::cos(m * y);
        value += weight * (fine + tail);
        quad_err += std::abs(weight * (fine - coarse));
    }
    const double next = static_cast<double>(cutoffs.k2_max) + 1.0;
    double k2_err;
    if (x > 0.0)
        k2_err = std::exp(-next * x) / (-std::expm1(-x)) * (1.0 / next + std::abs(alpha) * x);
    else
        k2_err = 1.0 / (next * std::abs(std::sin(0.5 * y)));

    TruncatedValue out;
    out.value = value.value();
    out.error = quad_err + tail_err + k2_err;
    out.terms = cutoffs.k2_max;
    if (out.error > tolerance)
        throw QuadratureBudgetError("fourier_w error estimate " + std::to_string(out.error) +
                                    " exceeds tolerance " + std::to_string(tolerance) +
                                    "; raise k1_max, k2_max or quad_points");
    return out;
}

} // namespace grainflow
