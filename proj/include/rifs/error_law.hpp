#pragma once

#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rifs/random.hpp"

namespace rifs {

/// Uniform law on (1 - eps1, 1 + eps2), with eps2 chosen so that
/// E[log Y] = 0.
struct PerturbedUniformLaw {
    double eps1 = 0.1;
    double eps2 = 0.0;
    bool operator==(const PerturbedUniformLaw&) const = default;
};

/// Density theta * x^(theta - 1) on [0, 1], i.e. Y = U^(1/theta).
struct PowerLawLaw {
    double theta = 1.0;
    bool operator==(const PowerLawLaw&) const = default;
};

/// Piecewise-linear density through (breakpoints[k], values[k]), zero
/// outside [breakpoints.front(), breakpoints.back()]. The values are kept
/// as given; the distribution rescales them internally to unit mass.
struct PiecewiseDensityLaw {
    std::vector<double> breakpoints;
    std::vector<double> values;
    bool operator==(const PiecewiseDensityLaw&) const = default;
};

using ErrorLaw = std::variant<PerturbedUniformLaw, PowerLawLaw, PiecewiseDensityLaw>;

/// Law of the multiplicative error Y > 0.
///
/// All variants satisfy the density bound f(x) <= C1 / x; the constant is
/// reported by density_bound_constant(). Immutable after construction.
class ErrorDistribution {
public:
    /// eps2 is solved by bisection on the closed-form E[log Y].
    static ErrorDistribution perturbed_uniform(double eps1);
    static ErrorDistribution power_law(double theta);
    static ErrorDistribution piecewise(std::vector<double> breakpoints, std::vector<double> values);

    const ErrorLaw& law() const noexcept { return law_; }

    double density(double x) const;
    double cdf(double x) const;
    /// Inverse CDF on (0, 1).
    double quantile(double u) const;
    double sample(RandomStream& rng) const;

    /// E[log Y].
    double log_mean() const;
    /// sup_x x * f(x).
    double density_bound_constant() const;

    double support_min() const;
    double support_max() const;
    bool has_bounded_support() const { return support_max() < std::numeric_limits<double>::infinity(); }

    /// Compact support with a density of bounded variation (the hypothesis
    /// of the Fourier-side results). Metadata only; nothing enforces it.
    bool bounded_variation() const;

    std::string describe() const;

    bool operator==(const ErrorDistribution& other) const { return law_ == other.law_; }

private:
    explicit ErrorDistribution(ErrorLaw law);

    ErrorLaw law_;
    std::vector<double> normalized_;  // piecewise: density values scaled to unit mass
    std::vector<double> cumulative_;  // piecewise: CDF at each breakpoint
    double log_mean_ = 0.0;
};

/// Closed-form E[log Y] for Y uniform on (lo, hi), 0 < lo < hi.
double uniform_log_mean(double lo, double hi);

/// Solves uniform_log_mean(1 - eps1, 1 + eps2) = 0 for eps2 by bisection.
double solve_perturbation_eps2(double eps1);

} // namespace rifs
