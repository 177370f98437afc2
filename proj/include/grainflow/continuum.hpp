#pragma once

// Continuum energies over parametric probability measures on the cylinder,
// the external-field phase diagram, the planar ellipse-law constants and the
// physical unit layer.

#include <grainflow/error.hpp>
#include <grainflow/kernel.hpp>
#include <grainflow/numeric.hpp>
#include <grainflow/parallel.hpp>
#include <grainflow/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace grainflow {

/// delta_{x0} (x) lambda.
struct DeltaRing {
    double x0 = 0.0;
};

/// Uniform on [-A, A] in x, times lambda.
struct UniformStrip {
    double A = 1.0;
};

/// ((1+a)/(2 A^{a+1})) |x|^a on [-A, A] in x, times lambda.
struct PowerDensity {
    double a = 0.0;
    double A = 1.0;
};

/// sum_i w_i delta_{x_i} in x, times lambda. Weights are normalised.
struct Product {
    std::vector<double> atoms;
    std::vector<double> weights;
};

/// (1/(sqrt(1-alpha^2) pi)) on the planar ellipse x^2/(1-alpha) + y^2/(1+alpha) < 1.
/// Lives in R^2, not on the cylinder.
struct PlanarEllipse {
    double alpha = 0.0;
};

using MeasureFamily = std::variant<DeltaRing, UniformStrip, PowerDensity, Product, PlanarEllipse>;

inline std::string family_name(const MeasureFamily& mu)
{
    return std::visit(
        [](const auto& f) -> std::string {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, DeltaRing>) return "delta_ring";
            else if constexpr (std::is_same_v<T, UniformStrip>) return "uniform_strip";
            else if constexpr (std::is_same_v<T, PowerDensity>) return "power_density";
            else if constexpr (std::is_same_v<T, Product>) return "product";
            else return "planar_ellipse";
        },
        mu);
}

inline std::map<std::string, double> family_params(const MeasureFamily& mu)
{
    return std::visit(
        [](const auto& f) -> std::map<std::string, double> {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, DeltaRing>) return {{"x0", f.x0}};
            else if constexpr (std::is_same_v<T, UniformStrip>) return {{"A", f.A}};
            else if constexpr (std::is_same_v<T, PowerDensity>) return {{"a", f.a}, {"A", f.A}};
            else if constexpr (std::is_same_v<T, Product>) return {{"atoms", double(f.atoms.size())}};
            else return {{"alpha", f.alpha}};
        },
        mu);
}

inline void validate_family(const MeasureFamily& mu)
{
    std::visit(
        [](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, DeltaRing>) {
                if (!std::isfinite(f.x0)) throw DomainError("delta_ring x0 must be finite");
            } else if constexpr (std::is_same_v<T, UniformStrip>) {
                if (!(f.A > 0.0) || !std::isfinite(f.A)) throw DomainError("uniform_strip needs A > 0");
            } else if constexpr (std::is_same_v<T, PowerDensity>) {
                if (!(f.a > -1.0) || !std::isfinite(f.a)) throw DomainError("power_density needs a > -1");
                if (!(f.A > 0.0) || !std::isfinite(f.A)) throw DomainError("power_density needs A > 0");
            } else if constexpr (std::is_same_v<T, Product>) {
                if (f.atoms.empty()) throw DomainError("product measure needs at least one atom");
                if (f.atoms.size() != f.weights.size()) throw DomainError("product measure needs one weight per atom");
                double total = 0.0;
                for (std::size_t i = 0; i < f.atoms.size(); ++i) {
                    if (!std::isfinite(f.atoms[i])) throw DomainError("product atoms must be finite");
                    if (!(f.weights[i] >= 0.0) || !std::isfinite(f.weights[i]))
                        throw DomainError("product weights must be finite and >= 0");
                    total += f.weights[i];
                }
                if (!(total > 0.0)) throw DomainError("product weights must not all vanish");
            } else {
                if (!(std::abs(f.alpha) < 1.0)) throw DomainError("planar ellipse degenerates at |alpha| = 1");
            }
        },
        mu);
}

/// Inverse CDF of the x-marginal of a cylinder family, u in [0, 1).
inline double sample_x(const MeasureFamily& mu, double u)
{
    return std::visit(
        [u](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, DeltaRing>) {
                return f.x0;
            } else if constexpr (std::is_same_v<T, UniformStrip>) {
                return f.A * (2.0 * u - 1.0);
            } else if constexpr (std::is_same_v<T, PowerDensity>) {
                // |x| has CDF (r/A)^{a+1}; the sign is an independent fair bit.
                const double v = 2.0 * u - 1.0;
                const double r = f.A * std::pow(std::abs(v), 1.0 / (f.a + 1.0));
                return v < 0.0 ? -r : r;
            } else if constexpr (std::is_same_v<T, Product>) {
                const double total = std::accumulate(f.weights.begin(), f.weights.end(), 0.0);
                double acc = 0.0;
                for (std::size_t i = 0; i + 1 < f.atoms.size(); ++i) {
                    acc += f.weights[i] / total;
                    if (u < acc) return f.atoms[i];
                }
                return f.atoms.back();
            } else {
                throw DomainError("planar_ellipse is a measure on R^2 and cannot be sampled on the cylinder");
            }
        },
        mu);
}

enum class Coupling {
    /// Kernel W_alpha + beta |x - x'|.
    kernel_repulsion,
    /// One-body field beta(|x| + |x'|) on top of the kernel W_alpha - (1-alpha)|x - x'|/2,
    /// which is W_alpha with its k2 = 0 Fourier summand restored.
    external_field,
};

inline std::string coupling_name(Coupling c)
{
    return c == Coupling::kernel_repulsion ? "kernel_repulsion" : "external_field";
}

struct McOptions {
    std::size_t samples = 1'000'000; ///< independent x-pairs
    std::uint64_t seed = 0;
    std::size_t batches = 32;
    std::size_t shifts = 16;   ///< angles per x-pair (randomised equispaced rule)
    bool stratified = true;    ///< Latin-hypercube strata per batch
};

struct McResult {
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::size_t samples = 0; ///< x-pairs actually used
    std::size_t batches = 0;
};

/// Pairs closer than this on the cylinder are redrawn.
inline constexpr double mc_resample_distance = 1e-12;

namespace detail {

inline std::vector<std::size_t> random_permutation(std::size_t m, Rng& rng)
{
    std::vector<std::size_t> p(m);
    std::iota(p.begin(), p.end(), std::size_t{0});
    for (std::size_t i = m; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
    return p;
}

inline double mean_and_stderr(const std::vector<double>& v, double& stderr_out)
{
    CompensatedSum s;
    for (double x : v) s += x;
    const double mean = s.value() / static_cast<double>(v.size());
    CompensatedSum sq;
    for (double x : v) sq += (x - mean) * (x - mean);
    const double k = static_cast<double>(v.size());
    stderr_out = std::sqrt(sq.value() / (k - 1.0) / k);
    return mean;
}

/// W_alpha at (s, y) with s = |dx| >= 0 and y wrapped, off the singular set.
inline double w_fast(double alpha, double s, double y)
{
    if (s == 0.0) return -std::log(2.0 * std::abs(std::sin(0.5 * y)));
    return core_value(alpha * s, s, y);
}

} // namespace detail

/// Monte Carlo estimate of the double integral of the pair integrand against
/// mu (x) mu. Each x-pair is evaluated at `shifts` equispaced angle
/// differences with a uniform random offset, which is unbiased because every
/// cylinder family here is a product with the uniform angle measure. The
/// estimate is the mean of `batches` independent batch means and stderr is
/// their standard error.
inline McResult continuum_energy_mc(const MeasureFamily& mu, double alpha, double beta, Coupling coupling,
                                    const McOptions& opts)
{
    validate_family(mu);
    if (std::holds_alternative<PlanarEllipse>(mu))
        throw DomainError("planar_ellipse is a measure on R^2 and cannot be sampled on the cylinder");
    detail::check_alpha(alpha);
    if (!std::isfinite(beta)) throw DomainError("beta must be finite");
    if (opts.samples < 1000) throw DomainError("continuum_energy_mc needs samples >= 1000");
    if (opts.batches < 2) throw DomainError("continuum_energy_mc needs at least 2 batches");
    if (opts.shifts < 1) throw DomainError("shifts must be >= 1");

    const std::size_t per_batch = (opts.samples + opts.batches - 1) / opts.batches;
    const double kink = coupling == Coupling::external_field ? 0.5 * (1.0 - alpha) : 0.0;
    const double shifts = static_cast<double>(opts.shifts);
    const double m = static_cast<double>(per_batch);

    std::vector<double> means(opts.batches);
    parallel_for(opts.batches, [&](std::size_t b) {
        Rng rng(derive_seed(opts.seed, b));
        std::vector<std::size_t> p1, p2, p3;
        if (opts.stratified) {
            p1 = detail::random_permutation(per_batch, rng);
            p2 = detail::random_permutation(per_batch, rng);
            p3 = detail::random_permutation(per_batch, rng);
        }
        auto draw = [&](const std::vector<std::size_t>& p, std::size_t i) {
            return opts.stratified ? (static_cast<double>(p[i]) + rng.uniform()) / m : rng.uniform();
        };
        CompensatedSum acc;
        for (std::size_t i = 0; i < per_batch; ++i) {
            const double x1 = sample_x(mu, draw(p1, i));
            const double x2 = sample_x(mu, draw(p2, i));
            double v = draw(p3, i);
            const double s = std::abs(x1 - x2);
            double pair = 0.0;
            for (;;) {
                bool too_close = false;
                CompensatedSum ang;
                for (std::size_t k = 0; k < opts.shifts; ++k) {
                    const double y = wrap_angle(two_pi * (v + static_cast<double>(k)) / shifts);
                    const double c = 2.0 * std::sin(0.5 * y);
                    if (s * s + c * c < mc_resample_distance * mc_resample_distance) {
                        too_close = true;
                        break;
                    }
                    ang += detail::w_fast(alpha, s, y);
                }
                if (!too_close) {
                    pair = ang.value() / shifts;
                    break;
                }
                v = rng.uniform();
            }
            if (coupling == Coupling::kernel_repulsion)
                pair += beta * s;
            else
                pair += -kink * s + beta * (std::abs(x1) + std::abs(x2));
            acc += pair;
        }
        means[b] = acc.value() / m;
    });

    McResult r;
    r.estimate = detail::mean_and_stderr(means, r.stderr_);
    r.samples = per_batch * opts.batches;
    r.batches = opts.batches;
    return r;
}

/// (1-alpha) A (a+1)/(a+2) (-(a+2)/(2a+3) + 2 beta/(1-alpha)): the external-field
/// energy of power_density(a, A) (x) lambda.
inline double field_family_closed(double alpha, double beta, double a, double A)
{
    detail::check_alpha(alpha);
    if (!(alpha < 1.0)) throw DomainError("field_family_closed degenerates at alpha = 1");
    if (!(a > -1.0)) throw DomainError("field_family_closed needs a > -1");
    if (!(A > 0.0)) throw DomainError("field_family_closed needs A > 0");
    return (1.0 - alpha) * A * (a + 1.0) / (a + 2.0) * (-(a + 2.0) / (2.0 * a + 3.0) + 2.0 * beta / (1.0 - alpha));
}

/// Exact energy of a cylinder family in the given coupling, where one is known.
/// Every family is nu (x) lambda, so the W_alpha part vanishes and only the
/// |x| terms contribute.
inline std::optional<double> family_closed_energy(const MeasureFamily& mu, double alpha, double beta, Coupling coupling)
{
    validate_family(mu);
    detail::check_alpha(alpha);
    // E|x - x'| and E|x| under nu.
    double mean_gap = 0.0;
    double mean_abs = 0.0;
    if (const auto* d = std::get_if<DeltaRing>(&mu)) {
        mean_abs = std::abs(d->x0);
    } else if (const auto* u = std::get_if<UniformStrip>(&mu)) {
        mean_gap = 2.0 * u->A / 3.0;
        mean_abs = 0.5 * u->A;
    } else if (const auto* p = std::get_if<PowerDensity>(&mu)) {
        mean_gap = 2.0 * p->A * (p->a + 1.0) / (2.0 * p->a + 3.0);
        mean_abs = p->A * (p->a + 1.0) / (p->a + 2.0);
    } else if (const auto* q = std::get_if<Product>(&mu)) {
        const double total = std::accumulate(q->weights.begin(), q->weights.end(), 0.0);
        for (std::size_t i = 0; i < q->atoms.size(); ++i) {
            const double wi = q->weights[i] / total;
            mean_abs += wi * std::abs(q->atoms[i]);
            for (std::size_t j = 0; j < q->atoms.size(); ++j)
                mean_gap += wi * q->weights[j] / total * std::abs(q->atoms[i] - q->atoms[j]);
        }
    } else {
        return std::nullopt;
    }
    if (coupling == Coupling::kernel_repulsion) return beta * mean_gap;
    return -0.5 * (1.0 - alpha) * mean_gap + 2.0 * beta * mean_abs;
}

enum class PhaseMode { kernel_repulsion, external_field };

enum class Verdict { unique_minimizer, degenerate_minimizers, unbounded_below };

inline std::string verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::unique_minimizer: return "unique_minimizer";
    case Verdict::degenerate_minimizers: return "degenerate_minimizers";
    case Verdict::unbounded_below: return "unbounded_below";
    }
    return "unknown";
}

struct Witness {
    MeasureFamily family;
    /// Energy of `family` in the classified setting, when it has a closed form.
    /// For unbounded verdicts it is negative and proportional to the family's A.
    std::optional<double> energy;
    std::string description;
};

struct PhaseVerdict {
    Verdict verdict = Verdict::degenerate_minimizers;
    Witness witness;
    std::vector<std::string> notes;
};

/// |beta - (1-alpha)/2| below this counts as on the phase boundary.
inline constexpr double phase_boundary_tolerance = 1e-12;

/// Witness scale for unbounded verdicts.
inline constexpr double witness_scale = 10.0;

/// Classifies the continuum problem at (alpha, beta).
/// kernel_repulsion: W_alpha + beta|x|. external_field: beta(|x| + |x'|) added
/// to the pair integrand, threshold beta = (1-alpha)/2.
inline PhaseVerdict phase_classify(double alpha, double beta, PhaseMode mode)
{
    detail::check_alpha(alpha);
    if (!std::isfinite(beta)) throw DomainError("beta must be finite");
    PhaseVerdict out;
    if (mode == PhaseMode::kernel_repulsion) {
        if (beta > 0.0) {
            out.verdict = Verdict::unique_minimizer;
            out.witness = {DeltaRing{0.0}, 0.0, "delta_{x0} (x) lambda for any x0; unique up to translation in x"};
        } else if (beta == 0.0) {
            out.verdict = Verdict::degenerate_minimizers;
            out.witness = {UniformStrip{1.0}, 0.0, "every nu (x) lambda has energy 0"};
        } else {
            out.verdict = Verdict::unbounded_below;
            // beta E|x - x'| = beta 2A/3 for the uniform strip.
            out.witness = {UniformStrip{witness_scale}, beta * 2.0 * witness_scale / 3.0,
                           "uniform_strip(A) (x) lambda has energy 2 beta A / 3 -> -inf as A grows"};
        }
        return out;
    }

    const double threshold = 0.5 * (1.0 - alpha);
    const double gap = beta - threshold;
    if (alpha == 1.0 && std::abs(beta) <= phase_boundary_tolerance) {
        out.verdict = Verdict::degenerate_minimizers;
        out.witness = {UniformStrip{1.0}, 0.0, "every nu (x) lambda has energy 0"};
        out.notes.push_back("alpha = 1, beta = 0 lies on the external-field boundary; the field vanishes and the "
                            "kernel-only verdict (degenerate minimizers) is used");
        return out;
    }
    if (gap > phase_boundary_tolerance || (std::abs(gap) <= phase_boundary_tolerance && alpha < 1.0)) {
        out.verdict = Verdict::unique_minimizer;
        out.witness = {DeltaRing{0.0}, 0.0, "delta_0 (x) lambda"};
        if (std::abs(gap) <= phase_boundary_tolerance) out.notes.push_back("on the boundary beta = (1 - alpha)/2");
        return out;
    }
    out.verdict = Verdict::unbounded_below;
    // Parenthesis of the family value is negative iff (a+2)/(2a+3) > r.
    const double r = alpha < 1.0 ? 2.0 * beta / (1.0 - alpha) : -std::numeric_limits<double>::infinity();
    double a = 0.0;
    if (r >= 0.5) {
        const double a_star = (3.0 * r - 2.0) / (1.0 - 2.0 * r); // (a+2)/(2a+3) = r
        a = r == 0.5 ? 0.0 : 0.5 * (-1.0 + a_star);
    }
    // Same value as field_family_closed, written so that alpha = 1 is allowed.
    const double A = witness_scale;
    const double energy = A * (a + 1.0) / (a + 2.0) * (-(1.0 - alpha) * (a + 2.0) / (2.0 * a + 3.0) + 2.0 * beta);
    out.witness = {PowerDensity{a, A}, energy,
                   "power_density(a, A) (x) lambda; energy is linear in A and negative, so it -> -inf as A grows"};
    return out;
}

/// C_alpha = 1/2 - log((sqrt(1-a) + sqrt(1+a))/2) + a sqrt(1-a)/(sqrt(1-a) + sqrt(1+a)).
inline double ellipse_c_alpha(double alpha)
{
    detail::check_alpha(alpha);
    const double p = std::sqrt(1.0 - alpha);
    const double q = std::sqrt(1.0 + alpha);
    return 0.5 - std::log(0.5 * (p + q)) + alpha * p / (p + q);
}

/// C_alpha + 1/2, the stated minimal value of J_alpha.
inline double ellipse_j_min(double alpha) { return ellipse_c_alpha(alpha) + 0.5; }

/// J_alpha at the ellipse measure: C_alpha + (1/2) int |z|^2 = C_alpha + 1/4.
inline double ellipse_j_at_minimizer(double alpha) { return ellipse_c_alpha(alpha) + 0.25; }

struct EllipseMcResult {
    double estimate = 0.0; ///< J_alpha(mu_alpha)
    double stderr_ = 0.0;
    double second_moment = 0.0; ///< int |z|^2 d mu_alpha
    double second_moment_stderr = 0.0;
    std::size_t samples = 0; ///< point pairs
    std::size_t batches = 0;
};

/// Monte Carlo J_alpha(mu_alpha) = iint V_alpha(z - z') + int |z|^2 over uniform
/// pairs in the planar ellipse. Radial and angular coordinates of both points
/// are Latin-hypercube stratified within each batch.
inline EllipseMcResult ellipse_energy_mc(double alpha, std::size_t samples, std::uint64_t seed,
                                         std::size_t batches = 32)
{
    detail::check_alpha(alpha);
    if (!(std::abs(alpha) < 1.0)) throw DomainError("ellipse degenerates at |alpha| = 1");
    if (samples < 100000) throw DomainError("ellipse_energy_mc needs samples >= 1e5");
    if (batches < 2) throw DomainError("ellipse_energy_mc needs at least 2 batches");
    const std::size_t per_batch = (samples + batches - 1) / batches;
    const double ax = std::sqrt(1.0 - alpha);
    const double ay = std::sqrt(1.0 + alpha);
    const double m = static_cast<double>(per_batch);

    std::vector<double> j_means(batches), m_means(batches);
    parallel_for(batches, [&](std::size_t b) {
        Rng rng(derive_seed(seed, b));
        std::vector<std::vector<std::size_t>> perm;
        for (int d = 0; d < 4; ++d) perm.push_back(detail::random_permutation(per_batch, rng));
        auto point = [&](double u_r, double u_phi) {
            const double r = std::sqrt(u_r);
            const double phi = two_pi * u_phi;
            return std::pair{ax * r * std::cos(phi), ay * r * std::sin(phi)};
        };
        CompensatedSum j_acc, m_acc;
        for (std::size_t i = 0; i < per_batch; ++i) {
            auto u = [&](int d) { return (static_cast<double>(perm[d][i]) + rng.uniform()) / m; };
            auto [x1, y1] = point(u(0), u(1));
            auto [x2, y2] = point(u(2), u(3));
            while ((x1 - x2) * (x1 - x2) + (y1 - y2) * (y1 - y2) < mc_resample_distance * mc_resample_distance) {
                std::tie(x2, y2) = point(rng.uniform(), rng.uniform());
            }
            const double second = 0.5 * (x1 * x1 + y1 * y1 + x2 * x2 + y2 * y2);
            j_acc += v_alpha(x1 - x2, y1 - y2, alpha) + second;
            m_acc += second;
        }
        j_means[b] = j_acc.value() / m;
        m_means[b] = m_acc.value() / m;
    });

    EllipseMcResult r;
    r.estimate = detail::mean_and_stderr(j_means, r.stderr_);
    r.second_moment = detail::mean_and_stderr(m_means, r.second_moment_stderr);
    r.samples = per_batch * batches;
    r.batches = batches;
    return r;
}

struct PhysicalScale {
    double b = 1.0;      ///< Burgers vector length
    double h = 1.0;      ///< strip scale
    double gamma0 = 1.0; ///< energy per length, mu b / (4 pi (1 - nu)) folded in
};

struct RsUnits {
    double theta = 0.0;
    double gamma_leading = 0.0; ///< -gamma0 theta log theta
};

inline RsUnits rs_units(double theta, double gamma0)
{
    if (!(gamma0 > 0.0)) throw DomainError("gamma0 must be > 0");
    if (!(theta > 0.0)) throw DomainError("theta must be > 0");
    if (!(theta < 1.0)) throw DomainError("theta = " + std::to_string(theta) + " is outside the small-angle regime (theta < 1)");
    return {theta, -gamma0 * theta * std::log(theta)};
}

/// theta = N b / (2 pi h).
inline RsUnits rs_units(std::size_t n, const PhysicalScale& scale)
{
    if (!(scale.b > 0.0) || !(scale.h > 0.0)) throw DomainError("b and h must be > 0");
    if (n == 0) throw DomainError("dislocation count must be >= 1");
    return rs_units(static_cast<double>(n) * scale.b / (two_pi * scale.h), scale.gamma0);
}

} // namespace grainflow
