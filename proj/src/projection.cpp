#include "rifs/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rifs/error.hpp"

namespace rifs {

namespace {

// Realized-rate extrapolation needs a few terms before it means anything.
constexpr std::size_t kMinUncertifiedTerms = 10;

std::string join_numbers(const std::vector<double>& xs) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
    os << ')';
    return os.str();
}

void check_word(const IfsSpec& ifs, const Word& w, std::size_t needed) {
    if (w.size() < needed) throw std::invalid_argument("project: word shorter than depth + 1");
    for (std::size_t k = 0; k < needed; ++k) {
        if (w[k] < 1 || w[k] > ifs.size()) throw std::invalid_argument("project: symbol out of range");
    }
}

} // namespace

std::string to_string(SeparationClass cls) {
    return cls == SeparationClass::distinct_digits ? "distinct_digits" : "distinct_ratios";
}

IfsSpec::IfsSpec(std::vector<double> digits, std::vector<double> ratios)
    : digits_(std::move(digits)), ratios_(std::move(ratios)), class_(SeparationClass::distinct_digits) {
    bool distinct = true;
    for (std::size_t i = 0; i < digits_.size(); ++i) {
        for (std::size_t j = i + 1; j < digits_.size(); ++j) distinct = distinct && digits_[i] != digits_[j];
    }
    class_ = distinct ? SeparationClass::distinct_digits : SeparationClass::distinct_ratios;
    validate();
}

IfsSpec::IfsSpec(std::vector<double> digits, std::vector<double> ratios, SeparationClass cls)
    : digits_(std::move(digits)), ratios_(std::move(ratios)), class_(cls) {
    validate();
}

void IfsSpec::validate() {
    const std::size_t m = digits_.size();
    if (m < 2) throw ConfigError("ifs: need at least two maps");
    if (ratios_.size() != m) throw ConfigError("ifs: digits and ratios differ in length");
    for (std::size_t i = 0; i < m; ++i) {
        if (!std::isfinite(digits_[i])) throw ConfigError("ifs: non-finite digit");
        if (!(ratios_[i] > 0.0) || !std::isfinite(ratios_[i])) throw ConfigError("ifs: ratios must be positive and finite");
    }
    const auto& keys = class_ == SeparationClass::distinct_digits ? digits_ : ratios_;
    if (class_ == SeparationClass::distinct_ratios) {
        for (double d : digits_) {
            if (d != 1.0) throw ConfigError("ifs: distinct-ratio class requires every digit to equal 1");
        }
    }
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) sep = std::min(sep, std::abs(keys[i] - keys[j]));
    }
    if (!(sep > 0.0)) {
        throw ConfigError(class_ == SeparationClass::distinct_digits
                              ? "ifs: digits are not distinct and ratios cannot separate the maps"
                              : "ifs: ratios are not distinct");
    }
    separation_ = sep;
    max_abs_digit_ = 0.0;
    for (double d : digits_) max_abs_digit_ = std::max(max_abs_digit_, std::abs(d));
    max_ratio_ = *std::max_element(ratios_.begin(), ratios_.end());
}

bool IfsSpec::is_homogeneous() const noexcept {
    return std::all_of(ratios_.begin(), ratios_.end(), [this](double r) { return r == ratios_.front(); });
}

std::string IfsSpec::describe() const {
    return "ifs(digits=" + join_numbers(digits_) + ",ratios=" + join_numbers(ratios_) + "," + to_string(class_) + ")";
}

ErrorRealization::ErrorRealization(ErrorDistribution law, std::uint64_t seed)
    : law_(std::move(law)), stream_(RandomStream(seed)), seed_(seed) {}

ErrorRealization ErrorRealization::fixed(std::vector<double> values) {
    ErrorRealization y;
    y.values_.reserve(values.size());
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("ErrorRealization: entries must be positive");
        y.append(v);
    }
    return y;
}

void ErrorRealization::append(double y) {
    values_.push_back(y);
    products_.push_back(products_.back() * y);
    log_products_.push_back(log_products_.back() + std::log(y));
}

void ErrorRealization::ensure(std::size_t depth) {
    if (depth <= values_.size()) return;
    if (!stream_) throw std::out_of_range("ErrorRealization: fixed prefix exhausted");
    values_.reserve(depth);
    while (values_.size() < depth) append(law_->sample(*stream_));
}

ErrorRealization ErrorRealization::shifted(std::size_t k) const {
    if (k > values_.size()) throw std::out_of_range("ErrorRealization: shift beyond realized prefix");
    ErrorRealization y;
    for (std::size_t i = k; i < values_.size(); ++i) y.append(values_[i]);
    return y;
}

double mean_log_ratio(const IfsSpec& ifs, const ShiftMeasure& mu) {
    if (mu.alphabet_size() != ifs.size()) throw ConfigError("measure alphabet size does not match the number of maps");
    const auto weights = mu.stationary();
    double s = 0.0;
    for (std::size_t i = 0; i < ifs.size(); ++i) s += weights[i] * std::log(ifs.ratios()[i]);
    return s;
}

double lyapunov(const IfsSpec& ifs, const ShiftMeasure& mu, const ErrorDistribution& eta) {
    const double chi = eta.log_mean() + mean_log_ratio(ifs, mu);
    if (!(chi < 0.0)) {
        std::ostringstream os;
        os.precision(12);
        os << "not contracting on average: chi = " << chi << " >= 0";
        throw ConfigError(os.str());
    }
    return chi;
}

MonteCarloEstimate lyapunov_mc(const IfsSpec& ifs, const ShiftMeasure& mu, const ErrorDistribution& eta,
                               std::size_t n, RandomStream& rng) {
    if (n < 100) throw std::invalid_argument("lyapunov_mc: need at least 100 steps");
    if (mu.alphabet_size() != ifs.size()) throw ConfigError("measure alphabet size does not match the number of maps");
    std::vector<double> log_ratio(ifs.size());
    for (std::size_t i = 0; i < ifs.size(); ++i) log_ratio[i] = std::log(ifs.ratios()[i]);

    // Welford accumulation.
    double mean = 0.0;
    double m2 = 0.0;
    Symbol s = mu.draw_first(rng);
    for (std::size_t k = 1; k <= n; ++k) {
        const double v = log_ratio[s - 1] + std::log(eta.sample(rng));
        const double delta = v - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (v - mean);
        if (k < n) s = mu.draw_next(s, rng);
    }
    const double var = m2 / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

Truncation truncation_depth(const IfsSpec& ifs, const ShiftMeasure& mu, const ErrorDistribution& eta,
                            ErrorRealization& y, double tol, std::size_t depth_cap) {
    if (!(tol > 0.0)) throw std::invalid_argument("truncation_depth: tol must be positive");
    const double chi = lyapunov(ifs, mu, eta);
    (void)chi;
    const double d_max = ifs.max_abs_digit();
    if (d_max == 0.0) return {0, 0.0, true};

    const double lambda_max = ifs.max_ratio();
    const double y_max = eta.support_max();
    const double q = lambda_max * y_max;
    double achieved = std::numeric_limits<double>::infinity();

    if (eta.has_bounded_support() && q < 1.0) {
        const double log_scale = std::log(d_max) - std::log1p(-q);
        for (std::size_t n = 0; n <= depth_cap; ++n) {
            const std::size_t k = n + 1;
            // Unrealized entries of a fixed prefix are bounded by y_max.
            if (y.extendable()) y.ensure(k);
            const std::size_t realized = std::min(k, y.depth());
            const double log_y = y.log_product(realized) + static_cast<double>(k - realized) * std::log(y_max);
            const double bound = std::exp(log_scale + static_cast<double>(k) * std::log(lambda_max) + log_y);
            achieved = bound;
            if (bound <= tol) return {n, bound, true};
        }
    } else {
        const double mean_log_lambda = mean_log_ratio(ifs, mu);
        for (std::size_t n = kMinUncertifiedTerms - 1; n <= depth_cap; ++n) {
            const std::size_t k = n + 1;
            y.ensure(k);
            const double log_r = static_cast<double>(k) * mean_log_lambda + y.log_product(k);
            const double rho = std::exp(log_r / static_cast<double>(k));
            if (!(rho < 1.0)) continue;
            const double bound = kUncertifiedSafetyFactor * d_max * std::exp(log_r) / (1.0 - rho);
            achieved = bound;
            if (bound <= tol) return {n, bound, false};
        }
    }
    std::ostringstream os;
    os << "truncation_depth: tail bound " << achieved << " still above tol " << tol << " at depth cap " << depth_cap;
    throw NumericError(os.str(), achieved);
}

double project(const IfsSpec& ifs, const Word& word, const ErrorRealization& y, std::size_t n) {
    check_word(ifs, word, n + 1);
    if (y.depth() < n) throw std::invalid_argument("project: error realization shorter than depth");
    // Horner form: d_{i_k} + lambda_{i_k} y_k * (tail).
    double s = ifs.digit(word[n]);
    for (std::size_t k = n; k >= 1; --k) {
        const Symbol sym = word[k - 1];
        s = ifs.digit(sym) + ifs.ratio(sym) * y.value(k) * s;
    }
    return s;
}

double distance_phi(const IfsSpec& ifs, const Word& i, const Word& j, const ErrorRealization& y, std::size_t n) {
    return std::abs(project(ifs, i, y, n) - project(ifs, j, y, n));
}

SampleBatch sample_measure(const IfsSpec& ifs, const ShiftMeasure& mu, const ErrorDistribution& eta,
                           ErrorRealization& y, std::size_t n_samples, double tol, RandomStream& rng) {
    const Truncation trunc = truncation_depth(ifs, mu, eta, y, tol);
    const std::size_t depth = trunc.depth;
    y.ensure(depth);

    SampleBatch batch;
    batch.depth = depth;
    batch.tail_bound = trunc.bound;
    batch.certified = trunc.certified;
    batch.provenance = {ifs.describe(), mu.describe(), eta.describe(), y.seed(), rng.seed()};
    batch.values.reserve(n_samples);

    const auto& digits = ifs.digits();
    const auto& ratios = ifs.ratios();
    const auto& ys = y.values();
    for (std::size_t s = 0; s < n_samples; ++s) {
        Symbol sym = mu.draw_first(rng);
        double x = digits[sym - 1];
        double scale = 1.0;
        for (std::size_t k = 1; k <= depth; ++k) {
            scale *= ratios[sym - 1] * ys[k - 1];
            sym = mu.draw_next(sym, rng);
            x += digits[sym - 1] * scale;
        }
        if (!std::isfinite(x)) throw NumericError("sample_measure: non-finite projected value");
        batch.values.push_back(x);
    }
    return batch;
}

} // namespace rifs
