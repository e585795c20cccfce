#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "rifs/error.hpp"
#include "rifs/projection.hpp"

using namespace rifs;

namespace {

IfsSpec sinai_ifs(double a) { return IfsSpec({1.0, 1.0}, {1.0 - a, 1.0 + a}, SeparationClass::distinct_ratios); }
IfsSpec arratia_ifs() { return IfsSpec({0.0, 1.0}, {1.0, 1.0}); }
ShiftMeasure fair() { return ShiftMeasure::bernoulli({0.5, 0.5}); }

ErrorRealization ones(std::size_t n) { return ErrorRealization::fixed(std::vector<double>(n, 1.0)); }

double sample_mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double sample_sd(const std::vector<double>& v) {
    const double m = sample_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (v.size() - 1));
}

} // namespace

TEST(IfsSpec, SeparationClasses) {
    EXPECT_EQ(arratia_ifs().separation_class(), SeparationClass::distinct_digits);
    EXPECT_DOUBLE_EQ(arratia_ifs().separation(), 1.0);
    const auto s = sinai_ifs(0.5);
    EXPECT_EQ(s.separation_class(), SeparationClass::distinct_ratios);
    EXPECT_DOUBLE_EQ(s.separation(), 1.0);
    EXPECT_THROW(IfsSpec({1.0, 1.0}, {0.5, 0.5}), ConfigError);
    EXPECT_THROW(IfsSpec({2.0, 2.0}, {0.5, 0.7}, SeparationClass::distinct_ratios), ConfigError);
    EXPECT_THROW(IfsSpec({0.0, 1.0}, {0.5, -0.5}), ConfigError);
    EXPECT_THROW(IfsSpec({0.0}, {0.5}), ConfigError);
}

TEST(Lyapunov, ClosedForms) {
    const auto pu = ErrorDistribution::perturbed_uniform(0.1);
    for (double a : {0.3, 0.5, 0.95}) EXPECT_NEAR(lyapunov(sinai_ifs(a), fair(), pu), 0.5 * std::log(1.0 - a * a), 1e-15);
    EXPECT_NEAR(lyapunov(sinai_ifs(std::sqrt(3.0) / 2.0), fair(), pu), -std::log(2.0), 1e-15);
    for (double theta : {0.5, 1.0, 4.0}) {
        EXPECT_DOUBLE_EQ(lyapunov(arratia_ifs(), fair(), ErrorDistribution::power_law(theta)), -1.0 / theta);
    }
    EXPECT_NEAR(lyapunov(IfsSpec({0.0, 1.0}, {0.7, 0.7}), fair(), pu), std::log(0.7), 1e-15);
}

TEST(Lyapunov, RejectsExpandingSystems) {
    const auto pu = ErrorDistribution::perturbed_uniform(0.1);
    try {
        lyapunov(IfsSpec({0.0, 1.0}, {1.2, 1.1}), fair(), pu);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("not contracting on average: chi ="), std::string::npos);
    }
}

TEST(LyapunovMc, BirkhoffAverages) {
    RandomStream rng(1);
    const auto pu = ErrorDistribution::perturbed_uniform(0.1);
    auto est = lyapunov_mc(sinai_ifs(0.5), fair(), pu, 100000, rng);
    EXPECT_NEAR(est.estimate, 0.5 * std::log(0.75), 3.0 * est.std_error);

    est = lyapunov_mc(arratia_ifs(), fair(), ErrorDistribution::power_law(2.0), 100000, rng);
    EXPECT_NEAR(est.estimate, -0.5, 3.0 * est.std_error);

    // Degenerate measure on symbol 1: only log lambda_1 + log Y remains.
    est = lyapunov_mc(IfsSpec({0.0, 1.0}, {0.6, 0.9}), ShiftMeasure::bernoulli({1.0, 0.0}), pu, 100000, rng);
    EXPECT_NEAR(est.estimate, std::log(0.6), 3.0 * est.std_error);
    EXPECT_THROW(lyapunov_mc(arratia_ifs(), fair(), pu, 10, rng), std::invalid_argument);
}

TEST(Truncation, GeometricCrossing) {
    // lambda_max y_max = 1/2, d_max = 1, y = 1: bound(n) = 2^-(n+1) / (1/2) = 2^-n.
    const IfsSpec ifs({0.0, 1.0}, {0.5, 0.5});
    const auto eta = ErrorDistribution::piecewise({0.5, 1.0}, {1.0, 1.0});
    auto y = ones(200);
    const double tol = 1e-9;
    std::size_t oracle = 0;
    while (std::ldexp(1.0, -static_cast<int>(oracle)) > tol) ++oracle;
    const auto t = truncation_depth(ifs, fair(), eta, y, tol);
    EXPECT_EQ(t.depth, oracle);
    EXPECT_EQ(t.depth, 30u);
    EXPECT_TRUE(t.certified);
    EXPECT_LE(t.bound, tol);
}

TEST(Truncation, RealizedProductsSharpenTheBound) {
    const IfsSpec ifs({0.0, 1.0}, {0.5, 0.5});
    const auto eta = ErrorDistribution::piecewise({0.5, 1.0}, {1.0, 1.0});
    auto y = ErrorRealization::fixed(std::vector<double>(200, 0.5));
    EXPECT_LT(truncation_depth(ifs, fair(), eta, y, 1e-9).depth, 30u);
}

TEST(Truncation, DegenerateTolerance) {
    const IfsSpec ifs({0.0, 1.0}, {0.5, 0.5});
    const auto eta = ErrorDistribution::piecewise({0.5, 1.0}, {1.0, 1.0});
    auto y = ones(10);
    EXPECT_EQ(truncation_depth(ifs, fair(), eta, y, 10.0).depth, 0u);
}

TEST(Truncation, ArratiaIsUncertified) {
    auto eta = ErrorDistribution::power_law(3.0);
    ErrorRealization y(eta, 42);
    const auto t = truncation_depth(arratia_ifs(), fair(), eta, y, 1e-9);
    EXPECT_FALSE(t.certified);
    EXPECT_LE(t.bound, 1e-9);
    EXPECT_GE(y.depth(), t.depth + 1);
}

TEST(Truncation, DepthCapCarriesAchievedBound) {
    auto eta = ErrorDistribution::power_law(3.0);
    ErrorRealization y(eta, 42);
    try {
        truncation_depth(arratia_ifs(), fair(), eta, y, 1e-300, 50);
        FAIL();
    } catch (const NumericError& e) {
        EXPECT_GT(e.achieved(), 1e-300);
    }
}

TEST(Project, Examples) {
    const IfsSpec zero_digit({0.0, 1.0}, {0.5, 0.5});
    auto y = ones(100);
    const Word all_ones(101, 1);
    for (std::size_t n : {0u, 5u, 100u}) EXPECT_EQ(project(zero_digit, all_ones, y, n), 0.0);

    const IfsSpec halving({1.0, 2.0}, {0.5, 0.5});
    EXPECT_NEAR(project(halving, all_ones, y, 80), 2.0, 1e-15);
    EXPECT_EQ(project(halving, Word{2, 1}, y, 0), 2.0);
    EXPECT_THROW(project(halving, Word{1}, y, 3), std::invalid_argument);
}

TEST(Project, AffineInTheDigits) {
    const double c = -3.7;
    const IfsSpec base({0.3, 1.1, 2.0}, {0.4, 0.5, 0.3});
    const IfsSpec scaled({0.3 * c, 1.1 * c, 2.0 * c}, {0.4, 0.5, 0.3});
    ErrorRealization y(ErrorDistribution::power_law(2.0), 3);
    y.ensure(40);
    RandomStream rng(4);
    const auto mu = ShiftMeasure::bernoulli({0.2, 0.3, 0.5});
    for (int t = 0; t < 100; ++t) {
        const Word w = sample_sequence(mu, 41, rng);
        EXPECT_NEAR(project(scaled, w, y, 40), c * project(base, w, y, 40), 1e-12);
    }
}

TEST(Project, PartialSumIncrementsRespectTermBound) {
    const IfsSpec ifs({0.0, 1.0}, {0.5, 0.5});
    const auto eta = ErrorDistribution::piecewise({0.5, 1.0}, {1.0, 1.0});
    ErrorRealization y(eta, 5);
    y.ensure(60);
    RandomStream rng(6);
    const double q = ifs.max_ratio() * eta.support_max();
    for (int t = 0; t < 50; ++t) {
        const Word w = sample_sequence(fair(), 61, rng);
        for (std::size_t n = 0; n < 59; ++n) {
            const double step = std::abs(project(ifs, w, y, n + 1) - project(ifs, w, y, n));
            ASSERT_LE(step, ifs.max_abs_digit() * std::pow(q, static_cast<double>(n + 1)) * (1.0 + 1e-12));
        }
    }
}

TEST(DistancePhi, IdentitySymmetryAndSelfSimilarity) {
    const auto ifs = sinai_ifs(0.5);
    ErrorRealization y(ErrorDistribution::perturbed_uniform(0.1), 7);
    const std::size_t n = 60;
    y.ensure(n);
    RandomStream rng(8);
    for (int t = 0; t < 200; ++t) {
        Word i = sample_sequence(fair(), n + 1, rng);
        Word j = sample_sequence(fair(), n + 1, rng);
        const std::size_t k = 1 + t % 5;
        std::copy(i.begin(), i.begin() + k, j.begin());
        j[k] = i[k] == 1 ? 2 : 1;
        EXPECT_EQ(distance_phi(ifs, i, i, y, n), 0.0);
        EXPECT_EQ(distance_phi(ifs, i, j, y, n), distance_phi(ifs, j, i, y, n));
        ASSERT_EQ(common_prefix_length(i, j), k);
        double scale = 1.0;
        for (std::size_t m = 0; m < k; ++m) scale *= ifs.ratio(i[m]) * y.value(m + 1);
        const double lhs = distance_phi(ifs, i, j, y, n);
        const double rhs = scale * distance_phi(ifs, shift(i, k), shift(j, k), y.shifted(k), n - k);
        EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, lhs));
    }
}

TEST(SampleMeasure, EmptyAndDegenerate) {
    const auto eta = ErrorDistribution::power_law(4.0);
    ErrorRealization y(eta, 1);
    RandomStream rng(2);
    EXPECT_EQ(sample_measure(arratia_ifs(), fair(), eta, y, 0, 1e-9, rng).count(), 0u);

    const auto point = sample_measure(arratia_ifs(), ShiftMeasure::bernoulli({0.0, 1.0}), eta, y, 1000, 1e-9, rng);
    for (double x : point.values) EXPECT_NEAR(x, point.values.front(), point.tail_bound);
}

TEST(SampleMeasure, ArratiaMeanMatchesClosedFormAtFixedY) {
    // Digits 0/1 with a fair coin: E[X | y] = 1/2 * sum_k y_1..y_k (k >= 0).
    const auto eta = ErrorDistribution::power_law(4.0);
    ErrorRealization y(eta, 11);
    RandomStream rng(12);
    const auto batch = sample_measure(arratia_ifs(), fair(), eta, y, 10000, 1e-9, rng);
    double oracle = 0.5;
    for (std::size_t k = 1; k <= batch.depth; ++k) oracle += 0.5 * y.product(k);
    EXPECT_NEAR(sample_mean(batch.values), oracle, 3.0 * sample_sd(batch.values) / 100.0 + batch.tail_bound);

    // Brute force through sample_sequence and project.
    RandomStream words(13);
    std::vector<double> brute(100000);
    for (auto& x : brute) x = project(arratia_ifs(), sample_sequence(fair(), batch.depth + 1, words), y, batch.depth);
    const double se = std::hypot(sample_sd(batch.values) / 100.0, sample_sd(brute) / std::sqrt(100000.0));
    EXPECT_NEAR(sample_mean(batch.values), sample_mean(brute), 3.0 * se);
}

TEST(SampleMeasure, SinaiValuesRespectSupportBound) {
    // Unperturbed errors: every value is at least 1/a up to the tail.
    const double a = 0.5;
    const auto eta = ErrorDistribution::perturbed_uniform(0.1);
    auto y = ones(5000);
    RandomStream rng(14);
    const auto batch = sample_measure(sinai_ifs(a), fair(), eta, y, 20000, 1e-9, rng);
    for (double x : batch.values) ASSERT_GE(x, 1.0 / a - batch.tail_bound);
}

TEST(SampleMeasure, Deterministic) {
    const auto eta = ErrorDistribution::perturbed_uniform(0.1);
    ErrorRealization y1(eta, 21);
    ErrorRealization y2(eta, 21);
    RandomStream r1(22);
    RandomStream r2(22);
    const auto a = sample_measure(sinai_ifs(0.7), fair(), eta, y1, 500, 1e-9, r1);
    const auto b = sample_measure(sinai_ifs(0.7), fair(), eta, y2, 500, 1e-9, r2);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.provenance.error_seed, std::optional<std::uint64_t>(21));
    EXPECT_EQ(a.provenance.word_seed, 22u);
}
