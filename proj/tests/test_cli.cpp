#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "rifs/random.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("rifs_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    Result run(const std::string& args) const {
        const fs::path out = dir_ / "stdout.txt";
        const fs::path err = dir_ / "stderr.txt";
        const std::string cmd = std::string(RIFS_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
        const int status = std::system(cmd.c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(out), read_file(err)};
    }

    fs::path write(const std::string& name, const std::string& content) const {
        const fs::path p = dir_ / name;
        std::ofstream(p) << content;
        return p;
    }

    fs::path dir_;
};

} // namespace

TEST_F(Cli, ValidatePrintsRegime) {
    const auto cfg = write("c.json", R"({"preset": "sinai", "a": 0.5})");
    const auto r = run("validate --config " + cfg.string());
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("absolutely_continuous"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("config_digest"), std::string::npos);
}

TEST_F(Cli, BadConfigExitsWithCodeTwo) {
    const auto cfg = write("c.json", R"({"preset": "sinai", "a": 1.2})");
    const auto r = run("validate --config " + cfg.string());
    EXPECT_EQ(r.code, 2);
    const auto j = nlohmann::json::parse(r.err);
    EXPECT_EQ(j.at("error").at("kind"), "config");
    EXPECT_EQ(j.at("exit_code"), 2);
    EXPECT_EQ(j.at("error").at("problems").at(0).get<std::string>().rfind("a:", 0), 0u);
}

TEST_F(Cli, MissingInputExitsWithCodeFour) {
    const auto r = run("estimate --input " + (dir_ / "none.csv").string() + " --out " + (dir_ / "run").string());
    EXPECT_EQ(r.code, 4);
    EXPECT_EQ(nlohmann::json::parse(r.err).at("error").at("kind"), "io");
}

TEST_F(Cli, SimulateIsByteIdenticalOnRerun) {
    const auto cfg = write("c.json", R"({"preset": "arratia", "theta": 2,
                                        "run": {"replicas": 2, "samples": 2000},
                                        "estimators": {"xi_nodes": 2000}})");
    const auto a = run("simulate --config " + cfg.string() + " --out " + (dir_ / "a").string() + " --threads 1");
    const auto b = run("simulate --config " + cfg.string() + " --out " + (dir_ / "b").string() + " --threads 2 --curves");
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(read_file(dir_ / "a" / "report.json"), read_file(dir_ / "b" / "report.json"));
    EXPECT_TRUE(fs::exists(dir_ / "a" / "manifest.json"));
    EXPECT_FALSE(fs::exists(dir_ / "a" / "FAILED"));
    const auto manifest = nlohmann::json::parse(read_file(dir_ / "a" / "manifest.json"));
    EXPECT_TRUE(manifest.at("success").get<bool>());
    EXPECT_EQ(manifest.at("seed"), 1);

    const auto c = run("simulate --config " + cfg.string() + " --out " + (dir_ / "c").string() + " --seed 2");
    ASSERT_EQ(c.code, 0) << c.err;
    EXPECT_NE(read_file(dir_ / "a" / "report.json"), read_file(dir_ / "c" / "report.json"));
}

TEST_F(Cli, EstimateOnUniformBatch) {
    rifs::RandomStream rng(3);
    std::string csv = "value\n";
    for (int k = 0; k < 10000; ++k) csv += std::to_string(rng.uniform()) + "\n";
    const auto input = write("u.csv", csv);
    const auto r = run("estimate --input " + input.string() + " --out " + (dir_ / "e").string());
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(read_file(dir_ / "e" / "estimate.json"));
    EXPECT_NEAR(j.at("correlation").at("value").get<double>(), 1.0, 0.05);
    EXPECT_EQ(j.at("count"), 10000);
}

TEST_F(Cli, FailedRunLeavesMarker) {
    const auto cfg = write("c.json", R"({"preset": "sinai", "a": 0.5})");
    const auto r = run("sweep --config " + cfg.string() + " --param theta --values 1,2 --out " + (dir_ / "s").string());
    EXPECT_EQ(r.code, 2);
    EXPECT_TRUE(fs::exists(dir_ / "s" / "FAILED"));
    const auto manifest = nlohmann::json::parse(read_file(dir_ / "s" / "manifest.json"));
    EXPECT_FALSE(manifest.at("success").get<bool>());
}

TEST_F(Cli, UnknownOptionIsAConfigError) { EXPECT_EQ(run("simulate --bogus").code, 2); }
