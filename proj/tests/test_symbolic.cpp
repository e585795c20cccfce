#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rifs/error.hpp"
#include "rifs/symbolic.hpp"

using namespace rifs;

namespace {

SquareMatrix fibonacci() { return SquareMatrix::from_rows({{1, 1}, {1, 0}}); }

void expect_additive(const ShiftMeasure& mu, const Word& omega) {
    double sum = 0.0;
    for (Symbol s = 1; s <= mu.alphabet_size(); ++s) {
        Word w = omega;
        w.push_back(s);
        sum += cylinder_measure(mu, w);
    }
    EXPECT_NEAR(sum, cylinder_measure(mu, omega), 1e-12);
}

} // namespace

TEST(Entropy, BernoulliFairCoinIsLog2) {
    EXPECT_NEAR(entropy(ShiftMeasure::bernoulli({0.5, 0.5})), std::log(2.0), 1e-15);
}

TEST(Entropy, DeterministicProcessIsZero) {
    EXPECT_EQ(entropy(ShiftMeasure::bernoulli({1.0, 0.0, 0.0})), 0.0);
}

TEST(Entropy, FibonacciIsLogGoldenRatio) {
    const auto mu = ShiftMeasure::max_entropy_sft(fibonacci());
    EXPECT_NEAR(entropy(mu), std::log(std::numbers::phi), 1e-12);
    EXPECT_NEAR(mu.perron_eigenvalue(), std::numbers::phi, 1e-12);
}

TEST(Entropy, MarkovChainFormula) {
    const auto p = SquareMatrix::from_rows({{0.9, 0.1}, {0.4, 0.6}});
    const auto mu = ShiftMeasure::markov(p);
    // Stationary law of a two-state chain: (b, a) / (a + b).
    const double a = 0.1;
    const double b = 0.4;
    EXPECT_NEAR(mu.stationary()[0], b / (a + b), 1e-12);
    const double h0 = -(0.9 * std::log(0.9) + 0.1 * std::log(0.1));
    const double h1 = -(0.4 * std::log(0.4) + 0.6 * std::log(0.6));
    EXPECT_NEAR(entropy(mu), 0.8 * h0 + 0.2 * h1, 1e-12);
}

TEST(ShiftMeasure, ParryChainOfFibonacci) {
    const auto mu = ShiftMeasure::max_entropy_sft(fibonacci());
    const double phi = std::numbers::phi;
    // Classical Parry weights: P(1->1) = 1/phi, pi_1 = phi^2 / (1 + phi^2).
    EXPECT_NEAR(mu.transition(1, 1), 1.0 / phi, 1e-12);
    EXPECT_NEAR(mu.transition(2, 1), 1.0, 1e-12);
    EXPECT_NEAR(mu.transition(2, 2), 0.0, 1e-15);
    EXPECT_NEAR(mu.stationary()[0], phi * phi / (1.0 + phi * phi), 1e-12);
}

TEST(ShiftMeasure, RejectsBadInputs) {
    EXPECT_THROW(ShiftMeasure::bernoulli({0.5, 0.6}), ConfigError);
    EXPECT_THROW(ShiftMeasure::bernoulli({-0.1, 1.1}), ConfigError);
    EXPECT_THROW(ShiftMeasure::max_entropy_sft(SquareMatrix::from_rows({{1, 1}, {0, 1}})), ConfigError);
    EXPECT_THROW(ShiftMeasure::markov(SquareMatrix::from_rows({{0.5, 0.5}, {0.2, 0.7}})), ConfigError);
    EXPECT_THROW(ShiftMeasure::markov(SquareMatrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}), {0.3, 0.7}), ConfigError);
}

TEST(ShiftMeasure, ReducibleSftDiagnosticNamesTheProblem) {
    try {
        ShiftMeasure::max_entropy_sft(SquareMatrix::from_rows({{1, 0}, {0, 1}}));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("reducible"), std::string::npos);
    }
}

TEST(SampleSequence, DegenerateMeasure) {
    RandomStream rng(1);
    EXPECT_EQ(sample_sequence(ShiftMeasure::bernoulli({1.0, 0.0}), 4, rng), (Word{1, 1, 1, 1}));
    EXPECT_TRUE(sample_sequence(ShiftMeasure::bernoulli({1.0, 0.0}), 0, rng).empty());
}

TEST(SampleSequence, FibonacciAvoidsForbiddenPair) {
    const auto mu = ShiftMeasure::max_entropy_sft(fibonacci());
    RandomStream rng(2);
    const Word w = sample_sequence(mu, 100000, rng);
    // Symbol 2 carries digit 1; two consecutive 1-digits are forbidden.
    for (std::size_t k = 1; k < w.size(); ++k) ASSERT_FALSE(w[k - 1] == 2 && w[k] == 2);
}

TEST(SampleSequence, BernoulliFrequencies) {
    RandomStream rng(3);
    const Word w = sample_sequence(ShiftMeasure::bernoulli({0.3, 0.7}), 100000, rng);
    const double ones = static_cast<double>(std::count(w.begin(), w.end(), 1u)) / w.size();
    EXPECT_NEAR(ones, 0.3, 0.01);
}

TEST(SampleSequence, DeterministicGivenStream) {
    const auto mu = ShiftMeasure::bernoulli({0.2, 0.3, 0.5});
    RandomStream a(77);
    RandomStream b(77);
    EXPECT_EQ(sample_sequence(mu, 500, a), sample_sequence(mu, 500, b));
}

TEST(CylinderMeasure, Examples) {
    EXPECT_DOUBLE_EQ(cylinder_measure(ShiftMeasure::bernoulli({0.5, 0.5}), {1, 2, 1}), 0.125);
    EXPECT_EQ(cylinder_measure(ShiftMeasure::bernoulli({0.2, 0.8}), {}), 1.0);
    EXPECT_EQ(cylinder_measure(ShiftMeasure::max_entropy_sft(fibonacci()), {2, 2}), 0.0);
}

TEST(CylinderMeasure, Additivity) {
    const std::vector<ShiftMeasure> measures = {
        ShiftMeasure::bernoulli({0.2, 0.3, 0.5}),
        ShiftMeasure::markov(SquareMatrix::from_rows({{0.1, 0.9}, {0.6, 0.4}})),
        ShiftMeasure::max_entropy_sft(fibonacci()),
        ShiftMeasure::max_entropy_sft(SquareMatrix::from_rows({{0, 1, 1}, {1, 0, 1}, {1, 1, 1}})),
    };
    RandomStream rng(4);
    for (const auto& mu : measures) {
        expect_additive(mu, {});
        for (int t = 0; t < 20; ++t) expect_additive(mu, sample_sequence(mu, 1 + t % 6, rng));
    }
}

TEST(CylinderMeasure, ShannonMcMillanConcentration) {
    const std::vector<ShiftMeasure> measures = {
        ShiftMeasure::bernoulli({0.3, 0.7}),
        ShiftMeasure::markov(SquareMatrix::from_rows({{0.9, 0.1}, {0.4, 0.6}})),
    };
    RandomStream rng(5);
    const std::size_t n = 1000;
    const int draws = 200;
    for (const auto& mu : measures) {
        double mean = 0.0;
        double m2 = 0.0;
        for (int d = 1; d <= draws; ++d) {
            const double v = -std::log(cylinder_measure(mu, sample_sequence(mu, n, rng))) / static_cast<double>(n);
            const double delta = v - mean;
            mean += delta / d;
            m2 += delta * (v - mean);
        }
        const double se = std::sqrt(m2 / (draws - 1) / draws);
        EXPECT_NEAR(mean, entropy(mu), 3.0 * se + 1e-3);
    }
}

TEST(Words, PrefixAndShift) {
    EXPECT_EQ(common_prefix_length({1, 2, 3}, {1, 2, 1}), 2u);
    EXPECT_EQ(common_prefix_length({}, {1}), 0u);
    EXPECT_EQ(shift({1, 2, 3, 4}, 2), (Word{3, 4}));
    EXPECT_TRUE(shift({1}, 3).empty());
}

TEST(Perron, EigenvectorsSatisfyEigenEquations) {
    const auto a = SquareMatrix::from_rows({{0, 1, 1}, {1, 0, 1}, {1, 1, 1}});
    const auto d = perron_frobenius(a);
    for (std::size_t i = 0; i < 3; ++i) {
        double av = 0.0;
        double ua = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            av += a(i, j) * d.right[j];
            ua += d.left[j] * a(j, i);
        }
        EXPECT_NEAR(av, d.eigenvalue * d.right[i], 1e-12);
        EXPECT_NEAR(ua, d.eigenvalue * d.left[i], 1e-12);
    }
    // Characteristic polynomial of this matrix: x^3 - x^2 - 3x - 1 = (x + 1)(x^2 - 2x - 1).
    EXPECT_NEAR(d.eigenvalue, 1.0 + std::sqrt(2.0), 1e-12);
}
