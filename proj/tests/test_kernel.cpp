#include <grainflow/kernel.hpp>
#include <grainflow/rng.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace grainflow;

namespace {

constexpr double alphas[] = {-1.0, -0.5, 0.0, 0.5, 1.0};

} // namespace

TEST(KernelParams, RejectsOutOfRange)
{
    EXPECT_THROW((KernelParams{1.5, 0.0, 0.0}.validate()), DomainError);
    EXPECT_THROW((KernelParams{-1.01, 0.0, 0.0}.validate()), DomainError);
    EXPECT_THROW((KernelParams{0.0, -0.1, 0.0}.validate()), DomainError);
    EXPECT_THROW((KernelParams{0.0, 0.0, -0.1}.validate()), DomainError);
    EXPECT_NO_THROW((KernelParams{-1.0, 0.0, 0.0}.validate()));
    EXPECT_NO_THROW((KernelParams{1.0, 2.0, 3.0}.validate()));
}

TEST(StableDen, MatchesKnownValues)
{
    EXPECT_DOUBLE_EQ(stable_den({0.0, pi}), 4.0);
    EXPECT_EQ(stable_den({0.0, 0.0}), 0.0);
}

TEST(StableDen, KeepsRelativePrecisionNearSingularity)
{
    const double v = stable_den({1e-8, 1e-8});
    EXPECT_GT(v, 0.0);
    EXPECT_NEAR(v / oracle::den(1e-8, 1e-8), 1.0, 1e-14);
    EXPECT_NEAR(v, 2e-16, 1e-30);
    // The naive difference has lost every digit here.
    EXPECT_EQ(2.0 * (std::cosh(1e-9) - std::cos(1e-9)), 0.0);
    EXPECT_NEAR(stable_den({1e-9, 1e-9}) / oracle::den(1e-9, 1e-9), 1.0, 1e-14);
}

TEST(StableDen, AgreesWithHighPrecisionOnRandomSample)
{
    Rng rng(11);
    for (int k = 0; k < 500; ++k) {
        const double x = std::ldexp(rng.uniform(-1.0, 1.0), -static_cast<int>(rng.below(40)));
        const double y = std::ldexp(rng.uniform(-1.0, 1.0), -static_cast<int>(rng.below(40)));
        if (x == 0.0 && y == 0.0) continue;
        const double ref = oracle::den(x, y);
        EXPECT_NEAR(stable_den({x, y}) / ref, 1.0, 1e-13) << x << " " << y;
    }
}

TEST(WAlpha, ValueOnVerticalAntipode)
{
    for (double a : alphas) EXPECT_NEAR(w_alpha({0.0, pi}, a), -std::log(2.0), 1e-15);
}

TEST(WAlpha, AgreesWithHighPrecisionClosedForm)
{
    Rng rng(5);
    for (int k = 0; k < 2000; ++k) {
        const double a = rng.uniform(-1.0, 1.0);
        const double x = rng.uniform(-25.0, 25.0) * (rng.uniform() < 0.3 ? 1e-4 : 1.0);
        // Near y = 2 pi k the wrap itself costs an ulp of 2 pi, which the
        // periodicity test covers; here y stays in the fundamental cell.
        const double y = rng.uniform(-pi, pi);
        const double ref = oracle::w_alpha(x, y, a);
        EXPECT_LT(std::abs(w_alpha({x, y}, a) - ref), 2e-14 * std::max(1.0, std::abs(ref))) << x << " " << y << " " << a;
    }
}

TEST(WAlpha, LargeSeparationUsesSeriesWithoutOverflow)
{
    for (double x : {29.9, 30.1, 45.0, 200.0, 800.0, 1e5}) {
        for (double a : alphas) {
            const double v = w_alpha({x, 0.7}, a);
            EXPECT_TRUE(std::isfinite(v));
            if (x < 700) {
                EXPECT_NEAR(v, oracle::w_alpha(x, 0.7, a), 1e-15 * std::max(1.0, x)) << x;
            } else {
                EXPECT_EQ(v, 0.0);
            }
        }
    }
}

TEST(WAlpha, SymmetriesAndPeriodicity)
{
    Rng rng(21);
    for (int k = 0; k < 500; ++k) {
        const double x = rng.uniform(-5.0, 5.0);
        const double y = rng.uniform(-pi, pi);
        for (double a : alphas) {
            const double v = w_alpha({x, y}, a);
            EXPECT_NEAR(w_alpha({-x, y}, a), v, 1e-13);
            EXPECT_NEAR(w_alpha({x, -y}, a), v, 1e-13);
            EXPECT_NEAR(w_alpha({x, y + two_pi}, a), v, 1e-12);
            EXPECT_NEAR(w_alpha({x, y - 6.0 * pi}, a), v, 1e-12);
        }
    }
}

TEST(WAlpha, SingularLattice)
{
    EXPECT_THROW(w_alpha({0.0, 0.0}, 1.0), SingularPointError);
    EXPECT_THROW(w_alpha({0.0, two_pi}, 0.0), SingularPointError);
    EXPECT_THROW(w_alpha({0.0, -4.0 * pi}, -1.0), SingularPointError);
    EXPECT_THROW(w_alpha({1.0, 1.0}, 1.5), DomainError);
}

TEST(WAlpha, DecayBound)
{
    Rng rng(8);
    for (int k = 0; k < 1000; ++k) {
        const double x = rng.uniform(2.0, 40.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        const double y = rng.uniform(-pi, pi);
        const double a = rng.uniform(-1.0, 1.0);
        EXPECT_LE(std::abs(w_alpha({x, y}, a)), 2.0 * (1.0 + std::abs(x)) * std::exp(-std::abs(x)));
    }
}

TEST(WAlpha, DifferenceFromPlanarPotentialStaysBoundedNearOrigin)
{
    for (double a : alphas) {
        for (double angle : {0.0, 0.4, 1.0, 1.5707963267948966, 2.5}) {
            double prev = 0.0;
            for (int e = 2; e <= 12; ++e) {
                const double r = std::pow(10.0, -e);
                const double x = r * std::cos(angle), y = r * std::sin(angle);
                const double diff = w_alpha({x, y}, a) - v_alpha(x, y, a);
                EXPECT_LT(std::abs(diff), 1.0);
                if (e > 4) {
                    EXPECT_NEAR(diff, prev, 1e-3);
                }
                prev = diff;
            }
        }
    }
}

TEST(WTilde, AddsRepulsion)
{
    EXPECT_DOUBLE_EQ(w_tilde({0.3, 1.1}, {0.5, 0.0, 0.0}), w_alpha({0.3, 1.1}, 0.5));
    EXPECT_NEAR(w_tilde({2.0, pi}, {1.0, 0.0, 1.0}), w_alpha({2.0, pi}, 1.0) + 2.0, 1e-15);
    EXPECT_NEAR(w_tilde({1.0, 1.0}, {0.0, 0.0, 0.5}), oracle::series(1.0, 1.0, 0.0, 0.0, 200) + 0.5, 1e-12);
    EXPECT_THROW(w_tilde({1.0, 1.0}, {0.0, 0.0, -0.5}), DomainError);
}

TEST(WSmoothed, ZeroSmoothingIsTheKernel)
{
    Rng rng(3);
    for (int k = 0; k < 300; ++k) {
        const double x = rng.uniform(-4.0, 4.0), y = rng.uniform(-pi, pi), a = rng.uniform(-1.0, 1.0);
        EXPECT_EQ(w_smoothed({x, y}, a, 0.0), w_alpha({x, y}, a));
    }
}

TEST(WSmoothed, AgreesWithHighPrecisionClosedForm)
{
    Rng rng(4);
    for (int k = 0; k < 1000; ++k) {
        const double x = rng.uniform(-6.0, 6.0), y = rng.uniform(-pi, pi), a = rng.uniform(-1.0, 1.0);
        const double t = std::exp(rng.uniform(std::log(1e-4), std::log(3.0)));
        const double ref = oracle::w_smoothed(x, y, a, t);
        EXPECT_LT(std::abs(w_smoothed({x, y}, a, t) - ref), 1e-13 * std::max(1.0, std::abs(ref)));
    }
}

TEST(WSmoothed, ValueAtOrigin)
{
    // The series at the origin is sum e^{-nt}/n = -log(1 - e^{-t}).
    for (double t : {1e-3, 0.01, 0.1, 1.0, 5.0}) {
        const double v = w_smoothed({0.0, 0.0}, 0.3, t);
        EXPECT_NEAR(v, -std::log(-std::expm1(-t)), 1e-14 * std::max(1.0, v));
        EXPECT_NEAR(v, 0.5 * t - std::log(2.0 * std::sinh(0.5 * t)), 1e-13 * std::max(1.0, v));
        EXPECT_NEAR(v, oracle::w_smoothed(0.0, 0.0, 0.3, t), 1e-13 * std::max(1.0, v));
    }
}

TEST(WSmoothed, OriginValueExceedsLogInverseT)
{
    // -log(1 - e^{-t}) > log(1/t) for every t > 0; the gap tends to t/2.
    for (double t : {1e-3, 0.01, 0.1, 1.0}) {
        const double v = w_smoothed({0.0, 0.0}, 1.0, t);
        EXPECT_GT(v, std::log(1.0 / t));
        EXPECT_LE(v, std::log(1.0 / t) + 0.5 * t);
    }
}

TEST(WSmoothed, LowerBoundsKernel)
{
    Rng rng(6);
    for (int k = 0; k < 5000; ++k) {
        const double x = rng.uniform(-4.0, 4.0), y = rng.uniform(-pi, pi), a = rng.uniform(-1.0, 1.0);
        const double t = std::exp(rng.uniform(std::log(1e-3), 0.0));
        EXPECT_GE(w_alpha({x, y}, a) + 1e-12, w_smoothed({x, y}, a, t) - 0.5 * t);
    }
}

TEST(WSmoothed, ShiftedValueNonIncreasingInT)
{
    Rng rng(7);
    for (int k = 0; k < 300; ++k) {
        const double x = rng.uniform(-3.0, 3.0), y = rng.uniform(-pi, pi), a = rng.uniform(-1.0, 1.0);
        double prev = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 40; ++i) {
            const double t = 1e-3 * std::pow(1000.0, i / 40.0);
            const double v = w_smoothed({x, y}, a, t) - 0.5 * t;
            EXPECT_LE(v, prev + 1e-12);
            prev = v;
        }
    }
}

TEST(WSeries, EmptySumAndDomain)
{
    EXPECT_EQ(w_series({1.0, 1.0}, 0.5, 0.0, 0).value, 0.0);
    EXPECT_THROW(w_series({0.0, 0.0}, 0.5, 0.0, 10), DomainError);
    EXPECT_THROW(w_series({0.0, two_pi}, 0.5, 0.0, 10), DomainError);
    EXPECT_THROW(w_series({0.0, 1.0}, 0.5, 0.0), DomainError); // no default K on the conditional series
}

TEST(WSeries, AgreesWithClosedForm)
{
    EXPECT_NEAR(w_series({5.0, 0.3}, 1.0, 0.0, 50).value, w_alpha({5.0, 0.3}, 1.0), 1e-10);
    EXPECT_NEAR(w_series({1.0, 1.0}, 1.0, 0.0, 200).value, w_alpha({1.0, 1.0}, 1.0), 1e-10);
    // Conditionally convergent alternating series at x = 0, y = pi.
    const auto tv = w_series({0.0, pi}, 0.2, 0.0, 10000);
    EXPECT_NEAR(tv.value, -std::log(2.0), tv.error);
    EXPECT_NEAR(tv.value, -std::log(2.0), 1e-4);
}

TEST(WSeries, PartialSumMatchesHighPrecisionAndErrorBoundHolds)
{
    Rng rng(9);
    for (int k = 0; k < 300; ++k) {
        const double x = rng.uniform(-3.0, 3.0), y = rng.uniform(-pi, pi), a = rng.uniform(-1.0, 1.0);
        const double t = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.0, 1.0);
        if (std::abs(x) + t < 0.05) continue;
        const std::size_t K = 1 + rng.below(40);
        const auto tv = w_series({x, y}, a, t, K);
        EXPECT_NEAR(tv.value, oracle::series(x, y, a, t, K), 1e-13);
        EXPECT_LE(std::abs(tv.value - oracle::w_smoothed(x, y, a, t)), tv.error + 1e-13);
    }
}

TEST(WSeries, DefaultTruncationReachesTenDigits)
{
    Rng rng(10);
    for (int k = 0; k < 1000; ++k) {
        const double x = rng.uniform(0.01, 20.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        const double y = rng.uniform(-pi, pi), a = rng.uniform(-1.0, 1.0);
        const auto tv = w_series({x, y}, a);
        EXPECT_LT(tv.error, 1e-12);
        EXPECT_NEAR(tv.value, w_alpha({x, y}, a), 1e-10);
    }
}

TEST(GradW, MatchesFiniteDifferences)
{
    const KernelParams p{1.0, 0.0, 0.0};
    const Gradient g = grad_w({0.7, 1.3}, p);
    const double fx = oracle::central_difference([&](double x) { return oracle::w_alpha(x, 1.3, 1.0); }, 0.7, 1e-5);
    const double fy = oracle::central_difference([&](double y) { return oracle::w_alpha(0.7, y, 1.0); }, 1.3, 1e-5);
    EXPECT_NEAR(g.dx, fx, 1e-6);
    EXPECT_NEAR(g.dy, fy, 1e-6);
}

TEST(GradW, RandomSampleAgainstHighPrecisionDifferences)
{
    Rng rng(12);
    for (int k = 0; k < 1000; ++k) {
        const double a = rng.uniform(-1.0, 1.0), beta = rng.uniform(0.0, 1.0);
        const double x = rng.uniform(0.01, 35.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        const double y = rng.uniform(-pi, pi);
        if (std::abs(x) < 0.05 && std::abs(y) < 0.05) continue;
        const Gradient g = grad_w({x, y}, {a, 0.0, beta});
        const double h = 1e-6;
        auto f = [&](double xx, double yy) { return oracle::w_alpha(xx, yy, a) + beta * std::abs(xx); };
        const double fx = (f(x + h, y) - f(x - h, y)) / (2 * h);
        const double fy = (f(x, y + h) - f(x, y - h)) / (2 * h);
        EXPECT_NEAR(g.dx, fx, 1e-6 * std::max(1.0, std::abs(fx))) << x << " " << y << " " << a;
        EXPECT_NEAR(g.dy, fy, 1e-6 * std::max(1.0, std::abs(fy))) << x << " " << y << " " << a;
    }
}

TEST(GradW, SymmetryZeros)
{
    for (double a : alphas) {
        EXPECT_NEAR(grad_w({0.0, pi}, {a, 0.0, 0.0}).dy, 0.0, 1e-15);
        EXPECT_NEAR(grad_w({1.3, 0.0}, {a, 0.0, 0.0}).dy, 0.0, 1e-15);
        // The |x| kink contributes the symmetric subgradient 0 at dx = 0.
        EXPECT_EQ(grad_w({0.0, 1.0}, {a, 0.0, 0.7}).dx, 0.0);
    }
    EXPECT_THROW(grad_w({0.0, 0.0}, {1.0, 0.0, 0.0}), SingularPointError);
}

TEST(VAlpha, KnownValues)
{
    EXPECT_DOUBLE_EQ(v_alpha(1.0, 0.0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(v_alpha(0.0, 1.0, 0.3), 0.0);
    EXPECT_NEAR(v_alpha(3.0, 4.0, 0.5), 0.18 - std::log(5.0), 1e-15);
    EXPECT_THROW(v_alpha(0.0, 0.0, 0.0), SingularPointError);
}

TEST(Periodization, InverseSquare)
{
    const auto a = perid_inverse_square(1.0, 0.0, 0);
    EXPECT_DOUBLE_EQ(a.partial, 1.0);
    EXPECT_NEAR(a.closed, 0.5 / std::tanh(0.5), 1e-15);
    const auto b = perid_inverse_square(1.0, 0.0, 100000);
    EXPECT_NEAR(b.partial, b.closed, 1e-5);
    for (std::size_t M : {0u, 3u, 50u}) {
        const auto p = perid_inverse_square(0.8, 1.1, M), q = perid_inverse_square(0.8, -1.1, M);
        EXPECT_NEAR(p.partial, q.partial, 1e-15);
        EXPECT_NEAR(p.closed, q.closed, 1e-15);
    }
    EXPECT_THROW(perid_inverse_square(0.0, 1.0, 3), DomainError);
}

TEST(Periodization, InverseSquareClosedFormAgainstHighPrecision)
{
    Rng rng(13);
    for (int k = 0; k < 200; ++k) {
        const double x = rng.uniform(0.01, 10.0), y = rng.uniform(-pi, pi);
        const double ref = std::sinh(x) / (2.0 * x * (std::cosh(x) - std::cos(y)));
        EXPECT_NEAR(perid_inverse_square(x, y, 0).closed / ref, 1.0, 1e-12);
    }
}

TEST(Periodization, Log)
{
    EXPECT_NEAR(perid_log(0.0, pi, 5).closed, std::log(4.0), 1e-15);
    EXPECT_DOUBLE_EQ(perid_log(0.6, 0.8, 0).partial, std::log(1.0));
    EXPECT_NEAR(perid_log(1.5, 0.5, 0).partial, std::log(1.5 * 1.5 + 0.25), 1e-15);
    const auto r = perid_log(1.0, 1.0, 10000);
    EXPECT_LT(std::abs(r.partial - r.closed), 1e-3);
    EXPECT_THROW(perid_log(0.0, 0.0, 3), SingularPointError);
}

TEST(Periodization, ErrorShrinksLikeInverseM)
{
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t M : {10u, 100u, 1000u, 10000u}) {
        const auto r = perid_inverse_square(0.9, 2.0, M);
        const double err = std::abs(r.partial - r.closed);
        EXPECT_LT(err, prev / 5.0);
        EXPECT_LT(err * static_cast<double>(M), 0.1);
        prev = err;
    }
}

TEST(Fourier, IntegrandValues)
{
    // At alpha = 1 the integrand is 2 k2^2/|k|^4; on the k1 = 0 axis that is 2/k2^2.
    EXPECT_DOUBLE_EQ(fourier_integrand(0.0, 3.0, 1.0), 2.0 / 9.0);
    EXPECT_DOUBLE_EQ(fourier_integrand(0.0, 3.0, 0.0), 1.0 / 9.0);
    EXPECT_DOUBLE_EQ(fourier_integrand(2.0, 0.0, -1.0), 2.0 / 4.0);
    for (double a : alphas) EXPECT_GT(fourier_integrand(0.7, 1.0, a), 0.0);
}

TEST(Fourier, ReproducesKernel)
{
    const auto v = fourier_w({2.0, 1.0}, 1.0);
    EXPECT_NEAR(v.value, w_alpha({2.0, 1.0}, 1.0), 1e-4);
    EXPECT_LT(v.error, 1e-4);
    // At x = 0 nothing damps the k1 integral, so the default cutoff leaves
    // an O(1/k1_max) error; the reported bound must still cover it.
    const auto z = fourier_w({0.0, pi}, 0.0);
    EXPECT_NEAR(z.value, -std::log(2.0), 2e-2);
    EXPECT_LE(std::abs(z.value + std::log(2.0)), z.error);
}

TEST(Fourier, RandomSampleWithinEstimatedError)
{
    Rng rng(14);
    for (int k = 0; k < 30; ++k) {
        const double a = rng.uniform(-1.0, 1.0);
        const double x = rng.uniform(0.1, 3.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        const double y = rng.uniform(-pi, pi);
        const auto v = fourier_w({x, y}, a, fourier_cutoffs_for(std::abs(x), 1e-7), 8000);
        const double truth = oracle::w_alpha(x, y, a);
        EXPECT_LT(v.error, 1e-4);
        EXPECT_LE(std::abs(v.value - truth), v.error + 1e-9);
        EXPECT_NEAR(v.value, truth, 1e-4);
    }
}

TEST(Fourier, NonzeroModesAloneGiveTheKernel)
{
    // Adding the k2 = 0 summand -(1-alpha)|x|/2 breaks the agreement for x != 0.
    const double x = 1.2, y = 0.4, a = 0.0;
    const auto v = fourier_w({x, y}, a, fourier_cutoffs_for(x, 1e-8), 8000);
    EXPECT_NEAR(v.value, w_alpha({x, y}, a), 1e-6);
    EXPECT_GT(std::abs(v.value - 0.5 * (1.0 - a) * x - w_alpha({x, y}, a)), 0.5);
}

TEST(Fourier, BudgetError)
{
    EXPECT_THROW(fourier_w({0.05, 0.3}, 1.0, FourierCutoffs{200.0, 4}, 800, 1e-6), QuadratureBudgetError);
    EXPECT_THROW(fourier_w({0.0, 0.0}, 1.0), SingularPointError);
    EXPECT_THROW(fourier_w({1.0, 0.0}, 1.0, FourierCutoffs{0.0, 4}), DomainError);
}
