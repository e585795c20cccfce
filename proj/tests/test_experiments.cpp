#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rifs/error.hpp"
#include "rifs/experiments.hpp"

using namespace rifs;

namespace {

RegimePrediction predict(const ExperimentConfig& cfg) {
    return classify_regime(entropy(cfg.measure), lyapunov(cfg.ifs, cfg.measure, cfg.error));
}

ExperimentConfig small(ExperimentConfig cfg, std::size_t replicas) {
    cfg.replicas = replicas;
    cfg.samples = 2000;
    cfg.estimators.xi_nodes = 2000;
    return cfg;
}

} // namespace

TEST(Regime, SinaiPresets) {
    const double a_crit = std::sqrt(3.0) / 2.0;
    EXPECT_NEAR(sinai_threshold(), a_crit, 1e-15);
    EXPECT_EQ(predict(sinai_preset(a_crit)).regime, Regime::critical);

    const auto ac = predict(sinai_preset(0.5));
    EXPECT_EQ(ac.regime, Regime::absolutely_continuous);
    EXPECT_NEAR(ac.ratio, std::log(2.0) / (0.5 * std::log(4.0 / 3.0)), 1e-12);
    EXPECT_NEAR(ac.ratio, 4.82, 0.01);
    EXPECT_EQ(ac.predicted_dimension, 1.0);

    const auto sing = predict(sinai_preset(0.95));
    EXPECT_EQ(sing.regime, Regime::singular);
    EXPECT_NEAR(sing.predicted_dimension, 2.0 * std::log(2.0) / std::log(1.0 / (1.0 - 0.95 * 0.95)), 1e-12);
    EXPECT_NEAR(sing.predicted_dimension, 0.596, 1e-3);
    EXPECT_NEAR(sinai_predicted_dimension(0.95), sing.predicted_dimension, 1e-12);
}

TEST(Regime, ArratiaAndFibonacciPresets) {
    EXPECT_EQ(predict(arratia_preset(1.0 / std::log(2.0))).regime, Regime::critical);
    EXPECT_EQ(predict(arratia_preset(4.0)).regime, Regime::absolutely_continuous);
    EXPECT_NEAR(predict(arratia_preset(1.0)).predicted_dimension, std::log(2.0), 1e-12);

    const double log_tau = std::log(std::numbers::phi);
    EXPECT_EQ(predict(fibonacci_preset(1.0 / log_tau)).regime, Regime::critical);
    EXPECT_NEAR(predict(fibonacci_preset(1.0)).predicted_dimension, log_tau, 1e-12);
}

TEST(Regime, ClassificationIsAPureFunction) {
    EXPECT_EQ(classify_regime(1.0, -0.5).regime, Regime::absolutely_continuous);
    EXPECT_EQ(classify_regime(0.5, -1.0).regime, Regime::singular);
    EXPECT_EQ(classify_regime(0.5, -0.5).regime, Regime::critical);
    EXPECT_EQ(classify_regime(0.5, -0.5 - 1e-13).regime, Regime::critical);
    EXPECT_THROW(classify_regime(0.5, 0.0), ConfigError);
    for (double h : {0.1, 0.3, 0.69}) {
        for (double chi : {-0.2, -1.0, -5.0}) {
            const auto p = classify_regime(h, chi);
            EXPECT_GT(p.predicted_dimension, 0.0);
            EXPECT_LE(p.predicted_dimension, 1.0);
            EXPECT_EQ(p.predicted_dimension, std::min(1.0, h / -chi));
        }
    }
}

TEST(Presets, SupportBoundAndValidation) {
    EXPECT_DOUBLE_EQ(sinai_support_bound(0.5, 0.0), 2.0);
    EXPECT_DOUBLE_EQ(sinai_support_bound(0.5, 0.1), 1.0 / (0.5 + 0.1 * 0.5));
    EXPECT_THROW(sinai_preset(1.2), ConfigError);
    EXPECT_THROW(arratia_preset(-1.0), ConfigError);
    auto cfg = sinai_preset(0.5);
    cfg.replicas = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Summary, QuartilesOfFiniteValues) {
    const auto s = summarize({4.0, 1.0, std::nan(""), 3.0, 2.0});
    EXPECT_EQ(s.count, 4u);
    EXPECT_DOUBLE_EQ(s.median, 2.5);
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_DOUBLE_EQ(s.q25, 1.75);
    EXPECT_DOUBLE_EQ(s.q75, 3.25);
    EXPECT_TRUE(std::isnan(summarize({}).median));
}

TEST(RunExperiment, SmokeRun) {
    const auto report = run_experiment(small(arratia_preset(4.0), 1));
    ASSERT_EQ(report.replicas.size(), 1u);
    const auto& r = report.replicas.front();
    EXPECT_TRUE(r.error.empty()) << r.error;
    EXPECT_TRUE(std::isfinite(r.correlation.value));
    EXPECT_TRUE(r.density.has_value());
    EXPECT_TRUE(r.fourier.has_value());
    EXPECT_EQ(r.support.size(), report.config.estimators.support_deltas.size());
    EXPECT_EQ(report.aggregate.replicas, 1u);
    EXPECT_EQ(r.error_seed, derive_seed(1, {1, 0, 2}));
    EXPECT_EQ(r.word_seed, derive_seed(1, {1, 0, 3}));
}

TEST(RunExperiment, SinaiReportsSupportCheckAndSkipsFourier) {
    const auto report = run_experiment(small(sinai_preset(0.5), 1));
    const auto& r = report.replicas.front();
    ASSERT_TRUE(r.sinai_support.has_value());
    EXPECT_DOUBLE_EQ(r.sinai_support->bound, sinai_support_bound(0.5, 0.1));
    EXPECT_FALSE(r.fourier.has_value());
    EXPECT_FALSE(report.caveats.empty());
}

TEST(RunExperiment, DeterministicAndIndependentOfThreads) {
    const auto cfg = small(sinai_preset(0.95), 3);
    const auto a = run_experiment(cfg, RunOptions{1});
    const auto b = run_experiment(cfg, RunOptions{3});
    ASSERT_EQ(a.replicas.size(), b.replicas.size());
    for (std::size_t k = 0; k < a.replicas.size(); ++k) {
        EXPECT_EQ(a.replicas[k].correlation.value, b.replicas[k].correlation.value);
        EXPECT_EQ(a.replicas[k].box.value, b.replicas[k].box.value);
    }
}

TEST(RunExperiment, MoreReplicasKeepEarlierRows) {
    const auto few = run_experiment(small(arratia_preset(1.0), 2));
    const auto more = run_experiment(small(arratia_preset(1.0), 4));
    for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_EQ(few.replicas[k].error_seed, more.replicas[k].error_seed);
        EXPECT_EQ(few.replicas[k].correlation.value, more.replicas[k].correlation.value);
    }
}

TEST(Sweep, GridPointsUseDerivedSeeds) {
    const auto base = small(sinai_preset(0.5), 2);
    const auto result = sweep(base, "a", {0.9});
    ASSERT_EQ(result.rows.size(), 1u);
    const auto& row = result.rows.front();
    EXPECT_EQ(row.seed, derive_seed(base.seed, {6, 0}));
    ASSERT_TRUE(row.report.has_value());

    auto direct = with_parameter(base, "a", 0.9);
    direct.seed = row.seed;
    const auto expected = run_experiment(direct);
    for (std::size_t k = 0; k < 2; ++k)
        EXPECT_EQ(row.report->replicas[k].correlation.value, expected.replicas[k].correlation.value);
}

TEST(Sweep, ParameterApplicability) {
    const auto base = small(sinai_preset(0.5), 1);
    EXPECT_THROW(with_parameter(base, "theta", 2.0), ConfigError);
    EXPECT_DOUBLE_EQ(with_parameter(base, "eps1", 0.2).preset->eps1, 0.2);
    EXPECT_THROW(with_parameter(small(arratia_preset(2.0), 1), "a", 0.5), ConfigError);

    const auto result = sweep(small(arratia_preset(2.0), 1), "theta", {0.5, 4.0});
    ASSERT_EQ(result.rows.size(), 2u);
    EXPECT_EQ(result.parameter, "theta");
    EXPECT_EQ(result.rows[1].report->prediction.regime, Regime::absolutely_continuous);
    EXPECT_EQ(result.rows[0].report->prediction.regime, Regime::singular);
}
