#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rifs/error_law.hpp"
#include "rifs/projection.hpp"
#include "rifs/random.hpp"
#include "rifs/symbolic.hpp"

namespace rifs {

enum class DimensionMethod { correlation, box };
enum class FitStatus { ok, unstable, undefined };

std::string to_string(DimensionMethod method);
std::string to_string(FitStatus status);

/// A log-log scaling curve: (r, C(r)) or (delta, N(delta)).
struct ScalingCurve {
    std::vector<double> scale;
    std::vector<double> value;
};

/// Window selection and acceptance rule shared by the log-log fits.
///
/// After clipping the grid to the resolvable range, up to `trim_decades`
/// are discarded at each end as long as `min_window_decades` remain. The
/// slope is reported as stable only when the fit has R^2 >= min_r_squared.
struct FitOptions {
    double min_window_decades = 3.0;
    double trim_decades = 2.0;
    double min_r_squared = 0.98;
    std::size_t min_points = 3;
    bool operator==(const FitOptions&) const = default;
};

struct CorrelationOptions {
    double min_pairs = 100.0;         // lower clip: pair count at r
    double max_correlation = 0.05;    // upper clip: C(r) beyond this is outside the small-scale regime
    double scale_floor = 0.0;         // lower clip on r
    FitOptions fit;
    bool operator==(const CorrelationOptions&) const = default;
};

struct BoxOptions {
    double min_boxes = 4.0;           // upper clip on delta
    double min_points_per_box = 5.0;  // lower clip on delta: N(delta) <= N / this
    FitOptions fit;
    bool operator==(const BoxOptions&) const = default;
};

/// Batches clip the correlation grid at this multiple of their tail bound.
inline constexpr double kTailFloorFactor = 100.0;

struct DimensionEstimate {
    double value = std::numeric_limits<double>::quiet_NaN();
    double std_error = std::numeric_limits<double>::quiet_NaN();
    DimensionMethod method = DimensionMethod::correlation;
    double r_min = std::numeric_limits<double>::quiet_NaN();
    double r_max = std::numeric_limits<double>::quiet_NaN();
    std::size_t points_used = 0;   // data points
    std::size_t fit_points = 0;    // grid points inside the fit window
    double r_squared = std::numeric_limits<double>::quiet_NaN();
    FitStatus status = FitStatus::undefined;
    std::string note;
    ScalingCurve curve;

    bool reported() const noexcept { return status == FitStatus::ok; }
};

/// Ascending geometric grid from lo to hi (inclusive) with `per_decade`
/// points per factor of ten.
std::vector<double> geometric_grid(double lo, double hi, double per_decade);

/// Grid spanning `decades` below the data diameter.
std::vector<double> default_scale_grid(std::span<const double> values, double decades = 12.0, double per_decade = 8.0);

/// Number of pairs k < l with |x_k - x_l| < r, for each r, from sorted
/// data by a two-pointer sweep.
std::vector<std::uint64_t> correlation_pair_counts(std::span<const double> sorted, std::span<const double> r_grid);

/// C(r) = 2 / (N (N - 1)) * #{k < l : |x_k - x_l| < r}.
std::vector<double> correlation_sum(std::span<const double> values, std::span<const double> r_grid);

/// O(N^2) reference for correlation_sum; intended for N <= 2000.
std::vector<double> correlation_sum_reference(std::span<const double> values, std::span<const double> r_grid);

DimensionEstimate correlation_dimension(std::span<const double> values, std::span<const double> r_grid,
                                        const CorrelationOptions& options = {});
/// As above with the grid floor raised to kTailFloorFactor * tail bound.
DimensionEstimate correlation_dimension(const SampleBatch& batch, std::span<const double> r_grid,
                                        CorrelationOptions options = {});

/// Occupied cells of width delta, cells anchored at the sample minimum.
std::vector<std::uint64_t> box_counts(std::span<const double> sorted, std::span<const double> delta_grid);

DimensionEstimate box_dimension(std::span<const double> points, std::span<const double> delta_grid,
                                const BoxOptions& options = {});

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> masses;  // sums to 1 over the points in [lo, hi]
    std::size_t points = 0;      // points inside [lo, hi]

    std::size_t bins() const noexcept { return masses.size(); }
    double bin_width() const noexcept { return (hi - lo) / static_cast<double>(masses.size()); }
};

/// Uniform-bin histogram on [lo, hi]; points outside are dropped.
Histogram make_histogram(std::span<const double> values, std::size_t bins, double lo, double hi);

enum class AcFlag { absolutely_continuous, singular, indeterminate };
std::string to_string(AcFlag flag);

inline constexpr double kAcRatioThreshold = 1.5;
inline constexpr double kSingularRatioThreshold = 3.0;
inline constexpr double kDefaultHistogramTrim = 0.05;

struct DensityDiagnostics {
    std::size_t bins_coarse = 0;
    std::size_t bins_fine = 0;
    double l2_coarse = 0.0;        // integral of f_B^2 for the coarse histogram density
    double l2_fine = 0.0;
    double max_mass_coarse = 0.0;
    double max_mass_fine = 0.0;
    double ratio = 0.0;            // l2_fine / l2_coarse
    AcFlag flag = AcFlag::indeterminate;
    double range_lo = 0.0;
    double range_hi = 0.0;
    double fraction_in_range = 1.0;
};

/// Histogram L^2 norms at two resolutions. The histogram range is the
/// central [trim, 1 - trim] quantile interval of the data so that heavy
/// tails do not swallow the resolution. The flag is a heuristic: ratio <=
/// 1.5 reads as absolutely continuous, ratio > 3 as mass concentration.
DensityDiagnostics density_diagnostics(std::span<const double> values, std::size_t bins_coarse,
                                       std::size_t bins_fine, double trim = kDefaultHistogramTrim);

struct SupportPoint {
    double delta = 0.0;
    double measure = 0.0;  // Lebesgue measure of the delta-neighbourhood
};

/// Exact Lebesgue measure of the union of [x_k - delta, x_k + delta].
std::vector<SupportPoint> support_measure(std::span<const double> values, std::span<const double> delta_grid);

/// Log-log slope of the support curve over its `tail_points` smallest
/// deltas: about 0 on a plateau (positive measure), about 1 - dim for a
/// null set.
double support_decay_exponent(std::span<const SupportPoint> curve, std::size_t tail_points = 3);

struct PrefixBreakdown {
    std::size_t prefix_length = 0;
    std::size_t pairs = 0;
    std::vector<double> a_hat;
};

struct TransversalityResult {
    std::vector<double> r;
    std::vector<double> a_hat;
    std::vector<PrefixBreakdown> by_prefix;  // sorted by prefix length
    std::size_t depth = 0;
    std::size_t pairs = 0;
    std::size_t error_draws = 0;
};

/// Monte Carlo estimate of A(r) = E[ P_y(phi(y, i, j) < r) ] over pairs
/// (i, j) ~ mu x mu that share their first symbol. The n_y error
/// realizations are drawn once and shared by all pairs.
TransversalityResult transversality_statistic(const IfsSpec& ifs, const ShiftMeasure& mu, const ErrorDistribution& eta,
                                              std::span<const double> r_grid, std::size_t n_pairs, std::size_t n_y,
                                              RandomStream& rng);

} // namespace rifs
