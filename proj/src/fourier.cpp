#include "rifs/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rifs/error.hpp"

namespace rifs {

namespace {

// Decades covered by the geometric run below xi = 1.
constexpr double kLowDecades = 3.0;

std::vector<double> bernoulli_weights(const ShiftMeasure& mu) {
    const auto* law = std::get_if<BernoulliLaw>(&mu.law());
    if (!law) throw ConfigError("Fourier product requires a Bernoulli measure");
    return law->p;
}

void require_homogeneous(const IfsSpec& ifs) {
    if (!ifs.is_homogeneous()) throw ConfigError("Fourier product requires equal contraction ratios");
}

} // namespace

double beta(std::span<const double> p) {
    double s = 0.0;
    double total = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) throw std::invalid_argument("beta: negative probability");
        s += v * v;
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("beta: probabilities do not sum to 1");
    return s;
}

std::complex<double> characteristic_product(const IfsSpec& ifs, const ShiftMeasure& mu, const ErrorRealization& y,
                                            double xi, std::size_t depth) {
    require_homogeneous(ifs);
    const auto p = bernoulli_weights(mu);
    if (y.depth() < depth) throw std::invalid_argument("characteristic_product: error realization shorter than depth");
    if (xi == 0.0) return {1.0, 0.0};
    const double lambda = ifs.ratios().front();
    const auto& d = ifs.digits();
    std::complex<double> product{1.0, 0.0};
    double scale = xi;  // lambda^k y_1..k xi
    for (std::size_t k = 0; k <= depth; ++k) {
        if (k > 0) scale *= lambda * y.value(k);
        std::complex<double> factor{0.0, 0.0};
        for (std::size_t j = 0; j < d.size(); ++j) factor += p[j] * std::polar(1.0, d[j] * scale);
        product *= factor;
    }
    return product;
}

std::complex<double> empirical_characteristic(std::span<const double> values, double xi) {
    if (values.empty()) throw std::invalid_argument("empirical_characteristic: empty sample");
    double re = 0.0;
    double im = 0.0;
    for (double x : values) {
        re += std::cos(xi * x);
        im += std::sin(xi * x);
    }
    const auto n = static_cast<double>(values.size());
    return {re / n, im / n};
}

XiGrid XiGrid::standard(double xi_max, std::size_t nodes) {
    if (!(xi_max > 1.0)) throw std::invalid_argument("XiGrid: xi_max must exceed 1");
    const double decades = std::log10(xi_max);
    const auto segments = static_cast<std::size_t>(std::ceil(decades - 1e-12)) + 1;
    if (nodes < 4 * segments) throw std::invalid_argument("XiGrid: too few nodes");
    const std::size_t per = nodes / segments;

    XiGrid grid;
    grid.nodes.reserve(nodes + 2);
    grid.nodes.push_back(0.0);
    for (std::size_t i = 0; i < per; ++i) {
        grid.nodes.push_back(std::pow(10.0, -kLowDecades + kLowDecades * static_cast<double>(i) / static_cast<double>(per - 1)));
    }
    for (std::size_t j = 0; j + 1 < segments; ++j) {
        const double lo = std::pow(10.0, static_cast<double>(j));
        const double hi = std::min(10.0 * lo, xi_max);
        const double fraction = (hi - lo) / (9.0 * lo);
        const auto count = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(static_cast<double>(per) * fraction)));
        for (std::size_t i = 1; i <= count; ++i) grid.nodes.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count));
    }
    grid.nodes.back() = xi_max;
    return grid;
}

std::vector<double> power_spectrum(const IfsSpec& ifs, const ShiftMeasure& mu, const ErrorRealization& y,
                                   const XiGrid& grid, std::size_t depth) {
    std::vector<double> power(grid.nodes.size());
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) power[i] = std::norm(characteristic_product(ifs, mu, y, grid.nodes[i], depth));
    return power;
}

EnergyEstimate energy_integral(double alpha, const XiGrid& grid, std::span<const double> power) {
    const auto& xs = grid.nodes;
    if (xs.size() < 2 || power.size() != xs.size()) throw std::invalid_argument("energy_integral: grid and spectrum differ in size");
    EnergyEstimate est;
    est.alpha = alpha;
    est.xi_max = xs.back();
    est.nodes = xs.size();
    const double tail_start = est.xi_max / 10.0;
    double total = 0.0;
    double tail = 0.0;
    auto integrand = [&](std::size_t i) { return power[i] * std::pow(1.0 + xs[i], alpha - 1.0); };
    double prev = integrand(0);
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const double cur = integrand(i);
        const double piece = 0.5 * (prev + cur) * (xs[i] - xs[i - 1]);
        total += piece;
        if (xs[i - 1] >= tail_start) tail += piece;
        prev = cur;
    }
    est.value = 2.0 * total;
    est.last_decade_fraction = total > 0.0 ? tail / total : 0.0;
    est.converged = est.last_decade_fraction < kConvergenceFraction;
    return est;
}

EnergyEstimate energy_integral(double alpha, const XiGrid& grid,
                               const std::function<std::complex<double>(double)>& characteristic) {
    std::vector<double> power(grid.nodes.size());
    for (std::size_t i = 0; i < power.size(); ++i) power[i] = std::norm(characteristic(grid.nodes[i]));
    return energy_integral(alpha, grid, power);
}

EnergyEstimate energy_integral(const IfsSpec& ifs, const ShiftMeasure& mu, const ErrorRealization& y, double alpha,
                               const XiGrid& grid, std::size_t depth) {
    return energy_integral(alpha, grid, power_spectrum(ifs, mu, y, grid, depth));
}

SobolevEstimate sobolev_dimension_estimate(std::span<const double> alpha_grid, const XiGrid& grid,
                                           std::span<const double> power) {
    if (alpha_grid.empty()) throw std::invalid_argument("sobolev_dimension_estimate: empty alpha grid");
    for (std::size_t i = 1; i < alpha_grid.size(); ++i) {
        if (!(alpha_grid[i] > alpha_grid[i - 1])) throw std::invalid_argument("sobolev_dimension_estimate: alpha grid must increase");
    }
    SobolevEstimate out;
    out.value = alpha_grid.front();
    for (double alpha : alpha_grid) {
        out.curve.push_back(energy_integral(alpha, grid, power));
        if (out.curve.back().converged) {
            out.value = alpha;
            out.any_converged = true;
        }
    }
    return out;
}

SobolevEstimate sobolev_dimension_estimate(const IfsSpec& ifs, const ShiftMeasure& mu, const ErrorDistribution& eta,
                                           const ErrorRealization& y, std::span<const double> alpha_grid,
                                           const XiGrid& grid, std::size_t depth) {
    const auto power = power_spectrum(ifs, mu, y, grid, depth);
    SobolevEstimate out = sobolev_dimension_estimate(alpha_grid, grid, power);
    out.lower_bound = std::abs(std::log(beta(bernoulli_weights(mu)))) / std::abs(lyapunov(ifs, mu, eta));
    return out;
}

std::vector<double> default_alpha_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 12; ++i) grid.push_back(0.25 * i);
    return grid;
}

} // namespace rifs
