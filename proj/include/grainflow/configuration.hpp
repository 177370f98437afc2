#pragma once

#include <grainflow/error.hpp>
#include <grainflow/numeric.hpp>
#include <grainflow/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace grainflow {

/// Point on R x T. Stored with y in (-pi, pi].
struct CylPoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const CylPoint&, const CylPoint&) = default;
};

/// Two points closer than this (in the chordal cylinder metric) count as
/// coincident.
inline constexpr double min_point_distance = 1e-9;

/// dx^2 + (2 sin(dy/2))^2; vanishes exactly on the kernel's singular set.
inline double cylinder_distance2(const CylPoint& a, const CylPoint& b) noexcept
{
    const double dx = a.x - b.x;
    const double c = 2.0 * std::sin(0.5 * (a.y - b.y));
    return dx * dx + c * c;
}

struct Provenance {
    std::string generator = "manual";
    std::uint64_t seed = 0;
    std::map<std::string, double> params;
    std::string rng = std::string(rng_algorithm);
};

/// Ordered, immutable set of N >= 1 pairwise-distinct cylinder points.
class Configuration {
public:
    /// Wraps every y into (-pi, pi] and rejects empty or coincident input.
    explicit Configuration(std::vector<CylPoint> points, Provenance provenance = {})
        : points_(std::move(points)), provenance_(std::move(provenance))
    {
        if (points_.empty()) throw DomainError("configuration has no points");
        for (auto& p : points_) {
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DomainError("configuration has non-finite coordinates");
            p.y = wrap_angle(p.y);
        }
        const double tol2 = min_point_distance * min_point_distance;
        for (std::size_t i = 0; i < points_.size(); ++i)
            for (std::size_t j = i + 1; j < points_.size(); ++j)
                if (cylinder_distance2(points_[i], points_[j]) < tol2) throw CoincidentPointsError(i, j);
    }

    std::span<const CylPoint> points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    const CylPoint& operator[](std::size_t i) const { return points_[i]; }
    const Provenance& provenance() const noexcept { return provenance_; }

    double min_distance() const
    {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < points_.size(); ++i)
            for (std::size_t j = i + 1; j < points_.size(); ++j)
                best = std::min(best, cylinder_distance2(points_[i], points_[j]));
        return std::sqrt(best);
    }

    /// Same points, new provenance.
    Configuration with_provenance(Provenance p) const { return Configuration(points_, std::move(p), trusted{}); }

    /// Rigid shift of every point (y re-wrapped).
    Configuration translated(double dx, double dy) const
    {
        std::vector<CylPoint> pts(points_);
        for (auto& p : pts) {
            p.x += dx;
            p.y = wrap_angle(p.y + dy);
        }
        return Configuration(std::move(pts), provenance_, trusted{});
    }

    /// Display gauge: mean x moved to 0, first point's y moved to 0.
    Configuration recentered() const
    {
        CompensatedSum sx;
        for (const auto& p : points_) sx += p.x;
        const double mean = sx.value() / static_cast<double>(points_.size());
        return translated(-mean, -points_.front().y);
    }

    friend bool operator==(const Configuration& a, const Configuration& b) { return a.points_ == b.points_; }

private:
    struct trusted {};
    Configuration(std::vector<CylPoint> points, Provenance provenance, trusted)
        : points_(std::move(points)), provenance_(std::move(provenance))
    {
    }

    std::vector<CylPoint> points_;
    Provenance provenance_;
};

/// N points (x0, phase + 2 pi j/N), j = 0..N-1.
inline Configuration equispaced(std::size_t n, double x0 = 0.0, double phase = 0.0)
{
    if (n == 0) throw DomainError("equispaced needs N >= 1");
    std::vector<CylPoint> pts(n);
    for (std::size_t j = 0; j < n; ++j)
        pts[j] = {x0, wrap_angle(phase + two_pi * static_cast<double>(j) / static_cast<double>(n))};
    return Configuration(std::move(pts), Provenance{"equispaced", 0, {{"n", double(n)}, {"x0", x0}, {"phase", phase}}});
}

namespace detail {

inline bool collides(const std::vector<CylPoint>& placed, const CylPoint& p)
{
    const double tol2 = min_point_distance * min_point_distance;
    for (const auto& q : placed)
        if (cylinder_distance2(p, q) < tol2) return true;
    return false;
}

} // namespace detail

/// x uniform on [-x_spread, x_spread], y uniform on (-pi, pi]; a point that
/// lands within 1e-9 of an earlier one is redrawn.
inline Configuration random_config(std::size_t n, double x_spread, std::uint64_t seed)
{
    if (n == 0) throw DomainError("random_config needs N >= 1");
    if (!(x_spread >= 0.0)) throw DomainError("x_spread must be >= 0");
    Rng rng(seed);
    std::vector<CylPoint> pts;
    pts.reserve(n);
    while (pts.size() < n) {
        const double x = x_spread == 0.0 ? 0.0 : rng.uniform(-x_spread, x_spread);
        // 1 - u lies in (0, 1], so y lands in (-pi, pi].
        const double y = pi - two_pi * rng.uniform();
        const CylPoint p{x, y};
        if (!detail::collides(pts, p)) pts.push_back(p);
    }
    return Configuration(std::move(pts), Provenance{"random", seed, {{"n", double(n)}, {"x_spread", x_spread}}});
}

/// Adds independent uniform offsets in [-eps, eps]^2; eps = 0 returns the
/// input unchanged.
inline Configuration perturb(const Configuration& c, double eps, std::uint64_t seed)
{
    if (!(eps >= 0.0)) throw DomainError("perturbation eps must be >= 0");
    Provenance prov{"perturb", seed, {{"eps", eps}}};
    prov.params["n"] = double(c.size());
    if (eps == 0.0) return c.with_provenance(std::move(prov));
    Rng rng(seed);
    std::vector<CylPoint> pts;
    pts.reserve(c.size());
    for (const auto& base : c.points()) {
        CylPoint p;
        do {
            p.x = base.x + rng.uniform(-eps, eps);
            p.y = wrap_angle(base.y + rng.uniform(-eps, eps));
        } while (detail::collides(pts, p));
        pts.push_back(p);
    }
    return Configuration(std::move(pts), std::move(prov));
}

} // namespace grainflow
