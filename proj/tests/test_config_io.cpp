#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rifs/config.hpp"
#include "rifs/error.hpp"
#include "rifs/io.hpp"

using namespace rifs;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("rifs_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> problems_of(std::string_view text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.problems();
    }
    return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
    return std::any_of(problems.begin(), problems.end(), [&](const auto& p) { return p.find(needle) != std::string::npos; });
}

} // namespace

TEST(Config, MinimalSinaiPreset) {
    const auto cfg = parse_config_text(R"({"preset": "sinai", "a": 0.5})");
    ASSERT_TRUE(cfg.preset.has_value());
    EXPECT_EQ(cfg.preset->kind, PresetKind::sinai);
    EXPECT_EQ(cfg.preset->eps1, 0.1);
    EXPECT_EQ(cfg, sinai_preset(0.5));
    EXPECT_EQ(cfg.replicas, 20u);
    EXPECT_EQ(cfg.samples, 20000u);
    EXPECT_EQ(cfg.seed, 1u);
}

TEST(Config, OutOfRangeParameterIsNamed) {
    const auto p = problems_of(R"({"preset": "sinai", "a": 1.2})");
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p.front().rfind("a:", 0), 0u);
}

TEST(Config, UnknownKeysAndAllProblemsReported) {
    const auto p = problems_of(R"({"preset": "arratia", "theta": -1, "colour": 1,
                                   "run": {"replicas": 0, "speed": 2}, "estimators": {"box": {"nope": 1}}})");
    EXPECT_TRUE(mentions(p, "colour: unknown key"));
    EXPECT_TRUE(mentions(p, "run.speed: unknown key"));
    EXPECT_TRUE(mentions(p, "estimators.box.nope: unknown key"));
    EXPECT_TRUE(mentions(p, "theta"));
    EXPECT_TRUE(mentions(p, "replicas"));
    EXPECT_GE(p.size(), 5u);
}

TEST(Config, ExpandingSystemNamesChi) {
    const auto p = problems_of(R"({"ifs": {"digits": [0, 1], "ratios": [1.5, 1.2]},
                                   "measure": {"type": "bernoulli", "p": [0.5, 0.5]},
                                   "error": {"type": "perturbed_uniform", "eps1": 0.1}})");
    EXPECT_TRUE(mentions(p, "not contracting on average: chi ="));
}

TEST(Config, MalformedJsonAndMixedForms) {
    EXPECT_THROW(parse_config_text("{"), ConfigError);
    EXPECT_TRUE(mentions(problems_of(R"({"preset": "arratia", "theta": 2, "ifs": {"digits": [0, 1], "ratios": [1, 1]}})"),
                         "cannot be combined"));
    EXPECT_TRUE(mentions(problems_of(R"({"theta": 2})"), "only valid together with a preset"));
    EXPECT_THROW(parse_config("/nonexistent/config.json"), IoError);
}

TEST(Config, ArratiaChi) {
    const auto cfg = parse_config_text(R"({"preset": "arratia", "theta": 4})");
    EXPECT_DOUBLE_EQ(lyapunov(cfg.ifs, cfg.measure, cfg.error), -0.25);
}

TEST(Config, RoundTripPresets) {
    for (auto cfg : {sinai_preset(0.7, 0.2), arratia_preset(3.0), fibonacci_preset(1.0)}) {
        cfg.replicas = 7;
        cfg.seed = 99;
        cfg.estimators.correlation.max_correlation = 0.1;
        cfg.sweep = SweepSpec{"eps1", {0.05, 0.1}};
        if (cfg.preset->kind != PresetKind::sinai) cfg.sweep = SweepSpec{"theta", {1.0, 2.0}};
        EXPECT_EQ(parse_config_text(serialize_config(cfg)), cfg);
    }
}

TEST(Config, RoundTripExplicitForms) {
    ExperimentConfig markov(IfsSpec({0.0, 1.0, 3.0}, {0.3, 0.4, 0.5}),
                            ShiftMeasure::markov(SquareMatrix::from_rows({{0.2, 0.3, 0.5}, {0.5, 0.5, 0.0}, {0.1, 0.1, 0.8}})),
                            ErrorDistribution::piecewise({0.5, 1.0, 1.5}, {1.0, 3.0, 0.5}));
    markov.estimators.fourier = false;
    EXPECT_EQ(parse_config_text(serialize_config(markov)), markov);

    ExperimentConfig sft(IfsSpec({0.0, 1.0}, {1.0, 1.0}), ShiftMeasure::max_entropy_sft(SquareMatrix::from_rows({{1, 1}, {1, 0}})),
                         ErrorDistribution::power_law(1.0 / 3.0));
    EXPECT_EQ(parse_config_text(serialize_config(sft)), sft);
}

TEST(Config, DigestTracksContent) {
    auto a = sinai_preset(0.5);
    auto b = sinai_preset(0.5);
    EXPECT_EQ(config_digest(a), config_digest(b));
    EXPECT_EQ(config_digest(a).size(), 64u);
    b.seed = 2;
    EXPECT_NE(config_digest(a), config_digest(b));
    b.seed = 1;
    b.estimators.bins_fine = 512;
    EXPECT_NE(config_digest(a), config_digest(b));
}

TEST(Manifest, Fields) {
    RunManifest m{"simulate", "abc", tool_version(), 5, utc_timestamp(), utc_timestamp(), {"report.json"}, true};
    const auto j = manifest_to_json(m);
    EXPECT_EQ(j.at("command"), "simulate");
    EXPECT_EQ(j.at("seed"), 5);
    EXPECT_EQ(j.at("outputs").size(), 1u);
    EXPECT_EQ(m.started_at.size(), 20u);  // YYYY-MM-DDTHH:MM:SSZ
    EXPECT_EQ(m.started_at.back(), 'Z');
}

TEST(Batch, CsvAndBinaryRoundTrip) {
    TempDir dir;
    SampleBatch batch;
    batch.values = {1.0, -2.5, 3.0e-17, 0.1, 123456.789};
    batch.depth = 42;
    batch.tail_bound = 1e-10;
    batch.provenance.word_seed = 9;
    for (auto format : {BatchFormat::csv, BatchFormat::binary}) {
        const fs::path p = dir.path / (format == BatchFormat::csv ? "b.csv" : "b.bin");
        write_batch(batch, p, format);
        EXPECT_EQ(read_batch_values(p), batch.values);
        const auto meta = nlohmann::json::parse(read_file(p.string() + ".json"));
        EXPECT_EQ(meta.at("depth"), 42);
        EXPECT_EQ(meta.at("count"), 5);
    }
    EXPECT_THROW(read_batch_values(dir.path / "missing.csv"), IoError);
}

TEST(Report, JsonIsByteIdenticalOnRerun) {
    auto cfg = arratia_preset(2.0);
    cfg.replicas = 2;
    cfg.samples = 2000;
    cfg.estimators.xi_nodes = 2000;
    const auto a = dump_json(report_to_json(run_experiment(cfg, RunOptions{1})));
    const auto b = dump_json(report_to_json(run_experiment(cfg, RunOptions{2})));
    EXPECT_EQ(a, b);
    const auto j = nlohmann::json::parse(a);
    EXPECT_EQ(j.at("schema_version"), kReportSchemaVersion);
    EXPECT_EQ(j.at("replicas").size(), 2u);
    EXPECT_EQ(parse_config_text(j.at("config").dump()), cfg);

    const auto csv = report_csv(run_experiment(cfg));
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Report, CurveCsv) {
    DimensionEstimate e;
    e.curve.scale = {0.1, 1.0};
    e.curve.value = {0.25, 1.0};
    EXPECT_EQ(curve_csv(e), "r,C\n0.1,0.25\n1,1\n");
}
