#pragma once

#include <cmath>
#include <numbers>

namespace grainflow {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduce an angle into (−π, π].
inline double wrap_angle(double y) noexcept
{
    double r = std::remainder(y, two_pi);
    if (r <= -pi) r += two_pi;
    if (r > pi) r -= two_pi;
    return r;
}

/// Neumaier-compensated running sum. Order-dependent, so callers that need
/// reproducible totals must feed terms in a fixed order.
class CompensatedSum {
public:
    void add(double v) noexcept
    {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }

    CompensatedSum& operator+=(double v) noexcept
    {
        add(v);
        return *this;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace grainflow
