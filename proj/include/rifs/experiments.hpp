#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rifs/error_law.hpp"
#include "rifs/estimators.hpp"
#include "rifs/fourier.hpp"
#include "rifs/projection.hpp"
#include "rifs/symbolic.hpp"

namespace rifs {

enum class Regime { absolutely_continuous, singular, critical };
std::string to_string(Regime regime);

inline constexpr double kCriticalTolerance = 1e-12;

struct RegimePrediction {
    double entropy = 0.0;
    double chi = 0.0;
    double ratio = 0.0;                 // h / |chi|
    Regime regime = Regime::critical;
    double predicted_dimension = 1.0;   // min(1, h / |chi|)
};

/// Pure function of (h, chi); chi must be negative.
RegimePrediction classify_regime(double entropy, double chi);

/// Named examples that the configuration can be rebuilt from.
enum class PresetKind { sinai, arratia, fibonacci };
std::string to_string(PresetKind kind);

struct Preset {
    PresetKind kind = PresetKind::sinai;
    double parameter = 0.0;  // a for sinai, theta otherwise
    double eps1 = 0.1;       // sinai only
    bool operator==(const Preset&) const = default;
};

struct EstimatorSettings {
    double grid_decades = 12.0;
    double grid_per_decade = 8.0;
    CorrelationOptions correlation;
    BoxOptions box;
    std::size_t bins_coarse = 64;
    std::size_t bins_fine = 256;
    double histogram_trim = kDefaultHistogramTrim;
    std::vector<double> support_deltas{1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    bool fourier = true;  // runs only for homogeneous Bernoulli configurations
    double xi_max = 1e3;
    std::size_t xi_nodes = 20000;
    std::vector<double> alpha_grid = default_alpha_grid();

    bool operator==(const EstimatorSettings&) const = default;
};

struct SweepSpec {
    std::string parameter;  // "a", "theta" or "eps1"
    std::vector<double> values;
    bool operator==(const SweepSpec&) const = default;
};

struct ExperimentConfig {
    ExperimentConfig(IfsSpec ifs, ShiftMeasure measure, ErrorDistribution error)
        : ifs(std::move(ifs)), measure(std::move(measure)), error(std::move(error)) {}

    std::optional<Preset> preset;
    IfsSpec ifs;
    ShiftMeasure measure;
    ErrorDistribution error;
    std::size_t replicas = 20;
    std::size_t samples = 20000;
    double tol = 1e-9;
    std::uint64_t seed = 1;
    EstimatorSettings estimators;
    std::optional<SweepSpec> sweep;

    /// Throws ConfigError listing every problem, including chi >= 0.
    void validate() const;

    bool operator==(const ExperimentConfig&) const = default;
};

/// m = 2, digits (1, 1), ratios (1 - a, 1 + a), Bernoulli(1/2, 1/2),
/// perturbed-uniform errors with the given eps1.
ExperimentConfig sinai_preset(double a, double eps1 = 0.1);
/// m = 2, digits (0, 1), unit ratios, Bernoulli(1/2, 1/2), power-law errors.
ExperimentConfig arratia_preset(double theta);
/// As arratia_preset with the max-entropy measure on the Fibonacci shift.
ExperimentConfig fibonacci_preset(double theta);
ExperimentConfig make_preset(const Preset& preset);

/// Sinai-family critical parameter and singular-regime dimension formula.
double sinai_threshold();
double sinai_predicted_dimension(double a);
/// Lower bound on the support of the perturbed Sinai sum:
/// 1 / (a + eps1 (1 - a)); equals 1 / a without perturbation.
double sinai_support_bound(double a, double eps1);

struct SupportCheck {
    double bound = 0.0;
    double min_value = 0.0;
    double fraction_below = 0.0;
};

struct FourierResult {
    EnergyEstimate energy_1;
    SobolevEstimate sobolev;
};

struct ReplicaResult {
    std::size_t index = 0;
    std::uint64_t error_seed = 0;
    std::uint64_t word_seed = 0;
    std::size_t depth = 0;
    double tail_bound = 0.0;
    bool certified = false;
    DimensionEstimate correlation;
    DimensionEstimate box;
    std::optional<DensityDiagnostics> density;
    std::vector<SupportPoint> support;
    double support_exponent = 0.0;
    std::optional<SupportCheck> sinai_support;
    std::optional<FourierResult> fourier;
    std::string error;  // non-empty when this replica failed
};

struct Summary {
    std::size_t count = 0;  // finite values summarized
    double median = std::numeric_limits<double>::quiet_NaN();
    double mean = std::numeric_limits<double>::quiet_NaN();
    double q25 = std::numeric_limits<double>::quiet_NaN();
    double q75 = std::numeric_limits<double>::quiet_NaN();
};

/// Median, mean and quartiles of the finite entries (linear interpolation).
Summary summarize(std::vector<double> values);

struct Aggregate {
    std::size_t replicas = 0;
    std::size_t failed = 0;
    Summary correlation;               // raw slopes of every replica with a finite fit
    std::size_t correlation_stable = 0;
    Summary box;
    double ac_true_rate = 0.0;
    double ac_false_rate = 0.0;
    Summary support_exponent;
    std::optional<double> energy_converged_rate;
    std::optional<Summary> sobolev;
    /// Fraction of E_1-converged replicas whose histogram flag says singular.
    std::optional<double> fourier_density_discordance;
};

struct ExperimentReport {
    ExperimentConfig config;
    RegimePrediction prediction;
    std::vector<ReplicaResult> replicas;
    Aggregate aggregate;
    std::vector<std::string> caveats;
};

struct RunOptions {
    unsigned threads = 0;  // 0: hardware concurrency
};

/// Per replica: fresh y, one batch, correlation and box dimension, density
/// and support diagnostics, and Fourier estimates where applicable.
/// Replica failures are recorded, not thrown.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

struct SweepRow {
    double value = 0.0;
    std::uint64_t seed = 0;
    std::optional<ExperimentReport> report;
    std::string error;
};

struct SweepResult {
    std::string parameter;
    std::vector<SweepRow> rows;
};

/// Config with the preset parameter replaced; throws ConfigError when the
/// parameter does not apply to the preset.
ExperimentConfig with_parameter(const ExperimentConfig& base, const std::string& parameter, double value);

/// One run_experiment per grid value; grid point g runs under the master
/// seed derive_seed(base.seed, {grid_point, g}).
SweepResult sweep(const ExperimentConfig& base, const std::string& parameter, const std::vector<double>& values,
                  const RunOptions& options = {});

} // namespace rifs
