#include "rifs/error_law.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "rifs/error.hpp"

namespace rifs {

namespace {

constexpr double kLogMeanAbsTol = 1e-10;

double x_log_x_minus_x(double x) { return x * std::log(x) - x; }

// Mass of a linear segment from its left end to left + t.
double segment_mass(double f0, double slope, double t) { return f0 * t + 0.5 * slope * t * t; }

} // namespace

double uniform_log_mean(double lo, double hi) {
    return (x_log_x_minus_x(hi) - x_log_x_minus_x(lo)) / (hi - lo);
}

double solve_perturbation_eps2(double eps1) {
    if (!(eps1 > 0.0 && eps1 < 1.0)) throw ConfigError("perturbed_uniform: eps1 must lie in (0, 1)");
    const double lo_end = 1.0 - eps1;
    // g(b) = b log b - b - (a log a - a) is increasing for b > 1.
    auto g = [lo_end](double b) { return x_log_x_minus_x(b) - x_log_x_minus_x(lo_end); };
    double lo = 1.0;
    double hi = 2.0;
    while (g(hi) <= 0.0) hi *= 2.0;
    // Bisect until the bracket can no longer shrink; well beyond 1e-12.
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (g(mid) > 0.0 ? hi : lo) = mid;
    }
    const double b = std::abs(g(lo)) < std::abs(g(hi)) ? lo : hi;
    return b - 1.0;
}

ErrorDistribution::ErrorDistribution(ErrorLaw law) : law_(std::move(law)) {}

ErrorDistribution ErrorDistribution::perturbed_uniform(double eps1) {
    const double eps2 = solve_perturbation_eps2(eps1);
    return ErrorDistribution(PerturbedUniformLaw{eps1, eps2});
}

ErrorDistribution ErrorDistribution::power_law(double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw ConfigError("power_law: theta must be a positive finite number");
    ErrorDistribution eta(PowerLawLaw{theta});
    eta.log_mean_ = -1.0 / theta;
    return eta;
}

ErrorDistribution ErrorDistribution::piecewise(std::vector<double> breakpoints, std::vector<double> values) {
    if (breakpoints.size() < 2) throw ConfigError("piecewise: need at least two breakpoints");
    if (values.size() != breakpoints.size()) throw ConfigError("piecewise: breakpoints and values differ in length");
    for (std::size_t k = 0; k < breakpoints.size(); ++k) {
        if (!std::isfinite(breakpoints[k]) || !std::isfinite(values[k])) {
            throw ConfigError("piecewise: non-finite breakpoint or value (x*density must stay bounded)");
        }
        if (values[k] < 0.0) throw ConfigError("piecewise: negative density value");
        if (k > 0 && !(breakpoints[k] > breakpoints[k - 1])) throw ConfigError("piecewise: breakpoints must increase strictly");
    }
    if (breakpoints.front() < 0.0) throw ConfigError("piecewise: support must lie in (0, inf)");

    double total = 0.0;
    for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
        total += 0.5 * (values[k] + values[k + 1]) * (breakpoints[k + 1] - breakpoints[k]);
    }
    if (!(total > 0.0)) throw ConfigError("piecewise: density has zero mass");
    ErrorDistribution eta(PiecewiseDensityLaw{breakpoints, values});
    for (double& v : values) v /= total;
    eta.normalized_ = values;
    eta.cumulative_.assign(breakpoints.size(), 0.0);
    for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
        eta.cumulative_[k + 1] =
            eta.cumulative_[k] + 0.5 * (values[k] + values[k + 1]) * (breakpoints[k + 1] - breakpoints[k]);
    }

    // Adaptive quadrature of f(x) log x, segment by segment.
    using boost::math::quadrature::gauss_kronrod;
    double sum = 0.0;
    double err_total = 0.0;
    for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
        const double x0 = breakpoints[k];
        const double x1 = breakpoints[k + 1];
        const double f0 = values[k];
        const double slope = (values[k + 1] - values[k]) / (x1 - x0);
        auto integrand = [=](double x) { return x > 0.0 ? (f0 + slope * (x - x0)) * std::log(x) : 0.0; };
        double err = 0.0;
        double part = 0.0;
        if (x0 == 0.0) {
            boost::math::quadrature::tanh_sinh<double> ts;
            double l1 = 0.0;
            std::size_t levels = 0;
            part = ts.integrate(integrand, x0, x1, 1e-14, &err, &l1, &levels);
        } else {
            part = gauss_kronrod<double, 31>::integrate(integrand, x0, x1, 20, 1e-14, &err);
        }
        sum += part;
        err_total += err;
    }
    if (!(err_total <= kLogMeanAbsTol) || !std::isfinite(sum)) {
        std::ostringstream os;
        os << "piecewise: E[log Y] quadrature error " << err_total << " exceeds " << kLogMeanAbsTol
           << " (log Y not integrable near 0?)";
        throw ConfigError(os.str());
    }
    eta.log_mean_ = sum;
    return eta;
}

double ErrorDistribution::density(double x) const {
    return std::visit(
        [&](const auto& law) -> double {
            using Law = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<Law, PerturbedUniformLaw>) {
                const double lo = 1.0 - law.eps1;
                const double hi = 1.0 + law.eps2;
                return (x > lo && x < hi) ? 1.0 / (hi - lo) : 0.0;
            } else if constexpr (std::is_same_v<Law, PowerLawLaw>) {
                if (x <= 0.0 || x > 1.0) return 0.0;
                return law.theta * std::pow(x, law.theta - 1.0);
            } else {
                const auto& xs = law.breakpoints;
                if (x < xs.front() || x > xs.back()) return 0.0;
                const auto it = std::upper_bound(xs.begin(), xs.end(), x);
                const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - xs.begin()), xs.size() - 1) - 1;
                const double t = (x - xs[k]) / (xs[k + 1] - xs[k]);
                return normalized_[k] + t * (normalized_[k + 1] - normalized_[k]);
            }
        },
        law_);
}

double ErrorDistribution::cdf(double x) const {
    return std::visit(
        [&](const auto& law) -> double {
            using Law = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<Law, PerturbedUniformLaw>) {
                const double lo = 1.0 - law.eps1;
                const double hi = 1.0 + law.eps2;
                return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
            } else if constexpr (std::is_same_v<Law, PowerLawLaw>) {
                if (x <= 0.0) return 0.0;
                if (x >= 1.0) return 1.0;
                return std::pow(x, law.theta);
            } else {
                const auto& xs = law.breakpoints;
                if (x <= xs.front()) return 0.0;
                if (x >= xs.back()) return 1.0;
                const auto it = std::upper_bound(xs.begin(), xs.end(), x);
                const std::size_t k = static_cast<std::size_t>(it - xs.begin()) - 1;
                const double slope = (normalized_[k + 1] - normalized_[k]) / (xs[k + 1] - xs[k]);
                return cumulative_[k] + segment_mass(normalized_[k], slope, x - xs[k]);
            }
        },
        law_);
}

double ErrorDistribution::quantile(double u) const {
    return std::visit(
        [&](const auto& law) -> double {
            using Law = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<Law, PerturbedUniformLaw>) {
                const double lo = 1.0 - law.eps1;
                const double hi = 1.0 + law.eps2;
                return lo + u * (hi - lo);
            } else if constexpr (std::is_same_v<Law, PowerLawLaw>) {
                return std::pow(u, 1.0 / law.theta);
            } else {
                const auto& xs = law.breakpoints;
                const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
                std::size_t k = static_cast<std::size_t>(it - cumulative_.begin());
                k = std::clamp<std::size_t>(k, 1, xs.size() - 1) - 1;
                const double target = u - cumulative_[k];
                const double f0 = normalized_[k];
                const double slope = (normalized_[k + 1] - normalized_[k]) / (xs[k + 1] - xs[k]);
                // Root of f0 t + slope t^2 / 2 = target in the cancellation-free form.
                const double disc = std::max(0.0, f0 * f0 + 2.0 * slope * target);
                const double denom = f0 + std::sqrt(disc);
                const double t = denom > 0.0 ? 2.0 * target / denom : 0.0;
                return std::clamp(xs[k] + t, xs[k], xs[k + 1]);
            }
        },
        law_);
}

double ErrorDistribution::sample(RandomStream& rng) const { return quantile(rng.uniform_open()); }

double ErrorDistribution::log_mean() const {
    // Zero by construction for the perturbed uniform law.
    if (std::holds_alternative<PerturbedUniformLaw>(law_)) return 0.0;
    return log_mean_;
}

double ErrorDistribution::density_bound_constant() const {
    return std::visit(
        [&](const auto& law) -> double {
            using Law = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<Law, PerturbedUniformLaw>) {
                return (1.0 + law.eps2) / (law.eps1 + law.eps2);
            } else if constexpr (std::is_same_v<Law, PowerLawLaw>) {
                return law.theta;
            } else {
                // x f(x) is quadratic on each segment: check ends and vertex.
                const auto& xs = law.breakpoints;
                double best = 0.0;
                for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
                    const double f0 = normalized_[k];
                    const double slope = (normalized_[k + 1] - normalized_[k]) / (xs[k + 1] - xs[k]);
                    auto g = [&](double x) { return x * (f0 + slope * (x - xs[k])); };
                    best = std::max({best, g(xs[k]), g(xs[k + 1])});
                    if (slope < 0.0) {
                        const double vertex = -(f0 - slope * xs[k]) / (2.0 * slope);
                        if (vertex > xs[k] && vertex < xs[k + 1]) best = std::max(best, g(vertex));
                    }
                }
                return best;
            }
        },
        law_);
}

double ErrorDistribution::support_min() const {
    return std::visit(
        [](const auto& law) -> double {
            using Law = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<Law, PerturbedUniformLaw>) return 1.0 - law.eps1;
            else if constexpr (std::is_same_v<Law, PowerLawLaw>) return 0.0;
            else return law.breakpoints.front();
        },
        law_);
}

double ErrorDistribution::support_max() const {
    return std::visit(
        [](const auto& law) -> double {
            using Law = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<Law, PerturbedUniformLaw>) return 1.0 + law.eps2;
            else if constexpr (std::is_same_v<Law, PowerLawLaw>) return 1.0;
            else return law.breakpoints.back();
        },
        law_);
}

bool ErrorDistribution::bounded_variation() const {
    if (const auto* p = std::get_if<PowerLawLaw>(&law_)) return p->theta >= 1.0;
    return true;
}

std::string ErrorDistribution::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (const auto* u = std::get_if<PerturbedUniformLaw>(&law_)) {
        os << "perturbed_uniform(eps1=" << u->eps1 << ",eps2=" << u->eps2 << ")";
    } else if (const auto* p = std::get_if<PowerLawLaw>(&law_)) {
        os << "power_law(theta=" << p->theta << ")";
    } else {
        const auto& pw = std::get<PiecewiseDensityLaw>(law_);
        os << "piecewise(n=" << pw.breakpoints.size() << ",support=[" << pw.breakpoints.front() << ","
           << pw.breakpoints.back() << "])";
    }
    return os.str();
}

} // namespace rifs
