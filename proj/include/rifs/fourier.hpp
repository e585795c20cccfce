#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "rifs/error_law.hpp"
#include "rifs/projection.hpp"
#include "rifs/symbolic.hpp"

namespace rifs {

/// Sum of squared probabilities.
double beta(std::span<const double> p);

/// Depth-n partial Fourier product of nu_y for a homogeneous IFS
/// (lambda_i = lambda) with a Bernoulli measure:
///   prod_{k=0..n} sum_j p_j exp(i d_j lambda^k y_{1..k} xi).
/// Requires y realized to depth >= n. Throws ConfigError for a
/// non-homogeneous IFS or a non-Bernoulli measure.
std::complex<double> characteristic_product(const IfsSpec& ifs, const ShiftMeasure& mu, const ErrorRealization& y,
                                            double xi, std::size_t depth);

/// (1/N) sum_k exp(i xi X_k).
std::complex<double> empirical_characteristic(std::span<const double> values, double xi);

/// Frequency nodes on [0, xi_max]: 0, a geometric run below 1, then the
/// same number of uniformly spaced nodes in every decade above 1.
struct XiGrid {
    std::vector<double> nodes;

    static XiGrid standard(double xi_max = 1e3, std::size_t nodes = 20000);
    double xi_max() const { return nodes.back(); }
};

struct EnergyEstimate {
    double alpha = 0.0;
    double value = 0.0;
    double xi_max = 0.0;
    std::size_t nodes = 0;
    double last_decade_fraction = 0.0;  // share of [xi_max / 10, xi_max]
    bool converged = false;             // last_decade_fraction < kConvergenceFraction
};

inline constexpr double kConvergenceFraction = 0.05;

/// |nu_y^(xi)|^2 on the grid nodes.
std::vector<double> power_spectrum(const IfsSpec& ifs, const ShiftMeasure& mu, const ErrorRealization& y,
                                   const XiGrid& grid, std::size_t depth);

/// Trapezoid rule for int_{-xi_max}^{xi_max} |f^|^2 (1 + |xi|)^(alpha - 1)
/// from the power spectrum on [0, xi_max] (conjugate symmetry doubles it).
EnergyEstimate energy_integral(double alpha, const XiGrid& grid, std::span<const double> power);

/// As above for a characteristic function given in closed form.
EnergyEstimate energy_integral(double alpha, const XiGrid& grid,
                               const std::function<std::complex<double>(double)>& characteristic);

EnergyEstimate energy_integral(const IfsSpec& ifs, const ShiftMeasure& mu, const ErrorRealization& y, double alpha,
                               const XiGrid& grid, std::size_t depth);

struct SobolevEstimate {
    double value = 0.0;        // largest converged alpha, or the grid minimum
    bool any_converged = false;
    std::vector<EnergyEstimate> curve;
    double lower_bound = std::numeric_limits<double>::quiet_NaN();  // |log beta| / |chi|
};

/// Scans an increasing alpha grid over a fixed power spectrum.
SobolevEstimate sobolev_dimension_estimate(std::span<const double> alpha_grid, const XiGrid& grid,
                                           std::span<const double> power);

/// As above for nu_y, with the lower bound |log beta| / |chi(eta)| attached.
SobolevEstimate sobolev_dimension_estimate(const IfsSpec& ifs, const ShiftMeasure& mu, const ErrorDistribution& eta,
                                           const ErrorRealization& y, std::span<const double> alpha_grid,
                                           const XiGrid& grid, std::size_t depth);

/// 0, 0.25, ..., 3.
std::vector<double> default_alpha_grid();

} // namespace rifs
