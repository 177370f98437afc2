#include <grainflow/optimize.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace grainflow;

namespace {

MinimizeOptions perturbed(std::size_t restarts, std::uint64_t seed)
{
    MinimizeOptions o;
    o.restarts = restarts;
    o.seed = seed;
    o.init = InitKind::perturbed_equispaced;
    o.eps = 0.05;
    return o;
}

} // namespace

TEST(Minimize, PerturbedEquispacedReturnsToNLogN)
{
    for (double a : {-1.0, 0.0, 1.0}) {
        const auto r = minimize(4, KernelParams{a, 0.0, 0.0}, perturbed(3, 5));
        EXPECT_TRUE(r.converged);
        EXPECT_NEAR(r.best_energy, -4.0 * std::log(4.0), 1e-8) << a;
        EXPECT_FALSE(r.violation);
        EXPECT_EQ(r.restarts.size(), 3u);
    }
}

TEST(Minimize, TwoPointsMatchGridOracle)
{
    for (double a : {-1.0, 0.0, 0.5, 1.0}) {
        double dx = 0.0, dy = 0.0;
        const double grid = oracle::two_point_minimum(a, dx, dy);
        MinimizeOptions o;
        o.restarts = 5;
        o.seed = 9;
        const auto r = minimize(2, KernelParams{a, 0.0, 0.0}, o);
        EXPECT_LE(r.best_energy, grid + 1e-9) << a;
        EXPECT_NEAR(r.best_energy, grid, 1e-6) << a;
        EXPECT_NEAR(r.best_energy, -2.0 * std::log(2.0), 1e-8) << a;
    }
}

TEST(Minimize, StaysInsideTheSandwich)
{
    for (double a : {-1.0, 0.0, 1.0}) {
        MinimizeOptions o;
        o.restarts = 20;
        o.seed = 2024;
        const auto r = minimize(8, KernelParams{a, 0.0, 0.0}, o);
        EXPECT_GE(r.best_energy, lower_bound(8) - 1e-9 * 8);
        EXPECT_GE(r.gap, -1e-6 * 8);
        EXPECT_FALSE(r.violation);
        for (const auto& rec : r.restarts) {
            EXPECT_LE(rec.final_energy, rec.initial_energy);
            EXPECT_GE(rec.final_energy, lower_bound(8) - 1e-9 * 8);
        }
        EXPECT_NEAR(r.gap, 0.0, 1e-6);
    }
}

TEST(Minimize, DeterministicForFixedSeed)
{
    MinimizeOptions o;
    o.restarts = 4;
    o.seed = 77;
    const auto a = minimize(6, KernelParams{0.3, 0.0, 0.0}, o);
    const auto b = minimize(6, KernelParams{0.3, 0.0, 0.0}, o);
    EXPECT_EQ(a.best_energy, b.best_energy);
    EXPECT_EQ(*a.best, *b.best);
    ASSERT_EQ(a.restarts.size(), b.restarts.size());
    for (std::size_t i = 0; i < a.restarts.size(); ++i) {
        EXPECT_EQ(a.restarts[i].seed, derive_seed(77, i));
        EXPECT_EQ(a.restarts[i].iterations, b.restarts[i].iterations);
    }
}

TEST(Minimize, ReportedConfigurationIsRecentred)
{
    MinimizeOptions o;
    o.restarts = 2;
    o.seed = 3;
    const auto r = minimize(5, KernelParams{1.0, 0.0, 0.0}, o);
    ASSERT_TRUE(r.best && r.best_raw);
    double mean = 0.0;
    for (const auto& p : r.best->points()) mean += p.x;
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_EQ((*r.best)[0].y, 0.0);
    const KernelParams p{1.0, 0.0, 0.0};
    EXPECT_NEAR(interaction_energy(*r.best, p), r.best_energy, 1e-12);
    EXPECT_EQ(interaction_energy(*r.best_raw, p), r.best_energy);
}

TEST(Minimize, FromFileStart)
{
    MinimizeOptions o;
    o.init = InitKind::from_file;
    o.start = equispaced(6, 0.0, 0.4);
    o.eps = 0.0;
    const auto r = minimize(6, KernelParams{0.0, 0.0, 0.0}, o);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.best_energy, equispaced_energy(6), 1e-10);
    EXPECT_THROW(minimize(5, KernelParams{}, o), DomainError);
}

TEST(Minimize, RepulsionKeepsEquispacedOptimal)
{
    const auto r = minimize(6, KernelParams{0.5, 0.0, 0.3}, perturbed(2, 4));
    EXPECT_NEAR(r.best_energy, equispaced_energy(6), 1e-8);
    ASSERT_TRUE(r.best);
    for (const auto& p : r.best->points()) EXPECT_NEAR(p.x, 0.0, 1e-4);
}

TEST(Minimize, RejectsBadArguments)
{
    EXPECT_THROW(minimize(1, KernelParams{}, MinimizeOptions{}), DomainError);
    EXPECT_THROW(minimize(4, KernelParams{0.0, 0.1, 0.0}, MinimizeOptions{}), DomainError);
    MinimizeOptions o;
    o.restarts = 0;
    EXPECT_THROW(minimize(4, KernelParams{}, o), DomainError);
    o = MinimizeOptions{};
    o.init = InitKind::from_file;
    EXPECT_THROW(minimize(4, KernelParams{}, o), DomainError);
    EXPECT_THROW(minimize(4, KernelParams{2.0, 0.0, 0.0}, MinimizeOptions{}), DomainError);
}

TEST(Minimize, IterationCapReportsUnconverged)
{
    MinimizeOptions o;
    o.max_iters = 2;
    o.seed = 1;
    const auto r = minimize(10, KernelParams{0.0, 0.0, 0.0}, o);
    EXPECT_FALSE(r.converged);
    EXPECT_LE(r.restarts[0].iterations, 2u);
}

TEST(Scan, SortsDeduplicatesAndMatchesMinimize)
{
    const auto s = scan({6, 2, 4, 4}, KernelParams{1.0, 0.0, 0.0}, perturbed(2, 11));
    ASSERT_EQ(s.rows.size(), 3u);
    EXPECT_EQ(s.rows[0].n, 2u);
    EXPECT_EQ(s.rows[1].n, 4u);
    EXPECT_EQ(s.rows[2].n, 6u);
    for (const auto& row : s.rows) {
        EXPECT_TRUE(row.converged);
        EXPECT_NEAR(row.residual_per_n, 0.0, 1e-9);
    }
    const auto fit = fit_residual(s.rows);
    EXPECT_NEAR(fit.c_hat, 0.0, 1e-9);
    EXPECT_EQ(fit.rows, 3u);
    EXPECT_THROW(scan({1, 4}, KernelParams{}, MinimizeOptions{}), DomainError);
}

TEST(FitResidual, RecoversSyntheticSlope)
{
    for (double c : {0.0, 0.1, -0.2}) {
        std::vector<ScanRow> rows;
        for (std::size_t n : {2u, 4u, 8u, 16u, 32u}) {
            const double nd = static_cast<double>(n);
            rows.push_back({n, -nd * std::log(nd) + c * nd, c, true, false});
        }
        const auto fit = fit_residual(rows);
        EXPECT_NEAR(fit.c_hat, c, 1e-13);
        EXPECT_NEAR(fit.residual_stddev, 0.0, 1e-12);
    }
}

TEST(FitResidual, ScatterAboutTheLine)
{
    // Residuals r_n = 1, 0 at n = 1, 2: c = (1*1 + 2*0)/(1 + 4) = 0.2.
    std::vector<ScanRow> rows{{1, 1.0, 1.0, true, false}, {2, -2.0 * std::log(2.0), 0.0, true, false}};
    const auto fit = fit_residual(rows);
    EXPECT_NEAR(fit.c_hat, 0.2, 1e-15);
    const double e1 = 1.0 - 0.2, e2 = 0.0 - 0.4;
    EXPECT_NEAR(fit.residual_stddev, std::sqrt(e1 * e1 + e2 * e2), 1e-15);
}

TEST(FitResidual, Errors)
{
    std::vector<ScanRow> one{{4, 0.0, 0.0, true, false}};
    EXPECT_THROW(fit_residual(one), InsufficientDataError);
    std::vector<ScanRow> bad{{4, 0.0, 0.0, true, false}, {8, 0.0, 0.0, false, false}};
    EXPECT_THROW(fit_residual(bad), DomainError);
}

TEST(Prox, TwoPointsClosedForm)
{
    // v1 < v2: each moves lambda toward the other, or both meet at the mean.
    const std::vector<double> far{0.0, 1.0};
    const auto a = detail::prox_pairwise_abs(far, 0.2);
    EXPECT_DOUBLE_EQ(a[0], 0.2);
    EXPECT_DOUBLE_EQ(a[1], 0.8);
    const std::vector<double> near{1.0, 0.0};
    const auto b = detail::prox_pairwise_abs(near, 0.6);
    EXPECT_DOUBLE_EQ(b[0], 0.5);
    EXPECT_DOUBLE_EQ(b[1], 0.5);
}

TEST(Prox, MinimisesItsObjective)
{
    auto objective = [](const std::vector<double>& x, const std::vector<double>& v, double lambda) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            f += 0.5 * (x[i] - v[i]) * (x[i] - v[i]);
            for (std::size_t j = i + 1; j < x.size(); ++j) f += lambda * std::abs(x[i] - x[j]);
        }
        return f;
    };
    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(9);
        std::vector<double> v(n);
        for (auto& e : v) e = rng.uniform(-1.0, 1.0);
        const double lambda = rng.uniform(0.0, 0.3);
        const auto x = detail::prox_pairwise_abs(v, lambda);
        const double f = objective(x, v, lambda);
        // Convex objective: no random nearby point may do better.
        for (int k = 0; k < 50; ++k) {
            auto y = x;
            const double h = std::pow(10.0, -1.0 - 4.0 * rng.uniform());
            for (auto& e : y) e += h * rng.uniform(-1.0, 1.0);
            EXPECT_GE(objective(y, v, lambda), f - 1e-14);
        }
        // Merging a whole cluster never breaks optimality either.
        auto m = x;
        const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
        for (auto& e : m) e = mean;
        EXPECT_GE(objective(m, v, lambda), f - 1e-14);
    }
}

TEST(Prox, MinNormSubgradientOnACluster)
{
    // Two points sharing x with opposite smooth pulls of size g. Kink forces
    // of up to 2 kappa per point cancel them until g exceeds 2 kappa.
    const std::vector<CylPoint> pts{{0.0, 0.0}, {0.0, 1.0}};
    for (double g : {0.1, 0.5}) {
        const std::vector<Gradient> grad{{g, 0.0}, {-g, 0.0}};
        const auto sub = detail::min_norm_x_subgradient(pts, grad, 0.1);
        const double expect = std::max(0.0, g - 2.0 * 0.1);
        EXPECT_NEAR(sub[0], expect, 1e-15);
        EXPECT_NEAR(sub[1], -expect, 1e-15);
    }
    // Without ties it is the full gradient, kink forces included.
    const std::vector<CylPoint> apart{{0.0, 0.0}, {1.0, 1.0}};
    const std::vector<Gradient> zero(2);
    const auto s = detail::min_norm_x_subgradient(apart, zero, 0.25);
    EXPECT_DOUBLE_EQ(s[0], -0.5);
    EXPECT_DOUBLE_EQ(s[1], 0.5);
}

TEST(Minimize, KinkMinimisersLandOnACommonX)
{
    for (double a : {0.0, 0.5}) {
        MinimizeOptions o;
        o.restarts = 3;
        o.seed = 6;
        const auto r = minimize(6, KernelParams{a, 0.0, 0.0}, o);
        EXPECT_TRUE(r.converged) << a;
        EXPECT_NEAR(r.best_energy, equispaced_energy(6), 1e-9) << a;
        for (const auto& p : r.best_raw->points()) EXPECT_EQ(p.x, (*r.best_raw)[0].x);
    }
}

TEST(Minimize, GaugeShiftOfTheStartLeavesTheEnergy)
{
    const auto start = random_config(7, 1.0, 31);
    for (double a : {0.0, 1.0}) {
        MinimizeOptions o;
        o.init = InitKind::from_file;
        o.eps = 0.0;
        o.start = start;
        const auto r0 = minimize(7, KernelParams{a, 0.0, 0.0}, o);
        o.start = start.translated(0.7, 1.1);
        const auto r1 = minimize(7, KernelParams{a, 0.0, 0.0}, o);
        EXPECT_NEAR(r0.best_energy, r1.best_energy, 1e-9) << a;
    }
}
