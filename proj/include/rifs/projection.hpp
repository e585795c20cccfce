#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rifs/error_law.hpp"
#include "rifs/random.hpp"
#include "rifs/symbolic.hpp"

namespace rifs {

enum class SeparationClass {
    distinct_digits,  // d_i != d_j for i != j
    distinct_ratios,  // d_i = 1 for all i, lambda_i != lambda_j for i != j
};

std::string to_string(SeparationClass cls);

/// The map family {x -> d_i + lambda_i Y x}.
class IfsSpec {
public:
    /// Infers the separation class; distinct digits take precedence.
    IfsSpec(std::vector<double> digits, std::vector<double> ratios);
    IfsSpec(std::vector<double> digits, std::vector<double> ratios, SeparationClass cls);

    std::size_t size() const noexcept { return digits_.size(); }
    double digit(Symbol s) const { return digits_[s - 1]; }
    double ratio(Symbol s) const { return ratios_[s - 1]; }
    const std::vector<double>& digits() const noexcept { return digits_; }
    const std::vector<double>& ratios() const noexcept { return ratios_; }
    SeparationClass separation_class() const noexcept { return class_; }

    /// b = min |d_l - d_s| (distinct digits) or b' = min |lambda_l - lambda_s|.
    double separation() const noexcept { return separation_; }
    double max_abs_digit() const noexcept { return max_abs_digit_; }
    double max_ratio() const noexcept { return max_ratio_; }
    bool is_homogeneous() const noexcept;

    std::string describe() const;

    bool operator==(const IfsSpec& other) const {
        return digits_ == other.digits_ && ratios_ == other.ratios_ && class_ == other.class_;
    }

private:
    void validate();

    std::vector<double> digits_;
    std::vector<double> ratios_;
    SeparationClass class_;
    double separation_ = 0.0;
    double max_abs_digit_ = 0.0;
    double max_ratio_ = 0.0;
};

/// A realized error sequence y_1, y_2, ... . Realizations created from a
/// law and a seed extend themselves deterministically on demand; fixed
/// realizations hold an explicit finite prefix.
class ErrorRealization {
public:
    ErrorRealization(ErrorDistribution law, std::uint64_t seed);
    static ErrorRealization fixed(std::vector<double> values);

    /// Realizes at least `depth` entries. Throws for an exhausted fixed prefix.
    void ensure(std::size_t depth);

    std::size_t depth() const noexcept { return values_.size(); }
    bool extendable() const noexcept { return stream_.has_value(); }
    std::optional<std::uint64_t> seed() const noexcept { return seed_; }

    /// y_k for k >= 1.
    double value(std::size_t k) const { return values_.at(k - 1); }
    /// y_1 ... y_k; the empty product (k = 0) is 1.
    double product(std::size_t k) const { return products_.at(k); }
    /// log(y_1 ... y_k), immune to underflow.
    double log_product(std::size_t k) const { return log_products_.at(k); }
    const std::vector<double>& values() const noexcept { return values_; }

    /// sigma^k y as a fixed realization of the currently realized entries.
    ErrorRealization shifted(std::size_t k) const;

private:
    ErrorRealization() = default;
    void append(double y);

    std::optional<ErrorDistribution> law_;
    std::optional<RandomStream> stream_;
    std::optional<std::uint64_t> seed_;
    std::vector<double> values_;
    std::vector<double> products_{1.0};
    std::vector<double> log_products_{0.0};
};

/// E[log Y] + integral of log lambda_{i_1} d mu. Throws ConfigError when
/// the system is not contracting on average (chi >= 0).
double lyapunov(const IfsSpec& ifs, const ShiftMeasure& mu, const ErrorDistribution& eta);

/// mu-average of log lambda_{i_1}.
double mean_log_ratio(const IfsSpec& ifs, const ShiftMeasure& mu);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Birkhoff average of log(lambda_{i_k} y_k) along one trajectory of n steps.
MonteCarloEstimate lyapunov_mc(const IfsSpec& ifs, const ShiftMeasure& mu, const ErrorDistribution& eta,
                               std::size_t n, RandomStream& rng);

struct Truncation {
    std::size_t depth = 0;     // series terms 0..depth are summed
    double bound = 0.0;        // bound on the neglected terms depth+1, depth+2, ...
    bool certified = false;    // false: extrapolated from the realized decay rate
};

inline constexpr std::size_t kDefaultDepthCap = 100000;
inline constexpr double kUncertifiedSafetyFactor = 4.0;

/// Smallest depth whose tail bound is <= tol.
///
/// Certified branch (bounded support, q = lambda_max * y_max < 1):
///   bound(n) = d_max * lambda_max^(n+1) * y_1...y_(n+1) / (1 - q).
/// Otherwise the bound is extrapolated from the realized products
///   r_l = exp(l * E_mu[log lambda]) * y_1...y_l
/// as 4 * d_max * r_(n+1) / (1 - rho), rho = r_(n+1)^(1/(n+1)), and is
/// flagged uncertified. Extends `y` as needed; throws NumericError carrying
/// the achieved bound when `depth_cap` is reached first.
Truncation truncation_depth(const IfsSpec& ifs, const ShiftMeasure& mu, const ErrorDistribution& eta,
                            ErrorRealization& y, double tol, std::size_t depth_cap = kDefaultDepthCap);

/// Sum over k = 0..n of d_{i_(k+1)} lambda_{i_1..i_k} y_{1..k}.
/// Requires |word| >= n + 1 and a realized y-prefix of length >= n.
double project(const IfsSpec& ifs, const Word& word, const ErrorRealization& y, std::size_t n);

/// |project(i) - project(j)| at common depth n.
double distance_phi(const IfsSpec& ifs, const Word& i, const Word& j, const ErrorRealization& y, std::size_t n);

struct BatchProvenance {
    std::string ifs;
    std::string measure;
    std::string error;
    std::optional<std::uint64_t> error_seed;
    std::uint64_t word_seed = 0;
};

/// Monte Carlo draws from the conditional measure nu_y.
struct SampleBatch {
    std::vector<double> values;
    std::size_t depth = 0;
    double tail_bound = 0.0;
    bool certified = false;
    BatchProvenance provenance;

    std::size_t count() const noexcept { return values.size(); }
};

/// N words i ~ mu projected with the error realization held fixed.
SampleBatch sample_measure(const IfsSpec& ifs, const ShiftMeasure& mu, const ErrorDistribution& eta,
                           ErrorRealization& y, std::size_t n_samples, double tol, RandomStream& rng);

} // namespace rifs
