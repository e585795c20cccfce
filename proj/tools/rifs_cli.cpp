// Command-line front end: simulate, sweep, estimate, fourier, validate.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rifs/config.hpp"
#include "rifs/error.hpp"
#include "rifs/estimators.hpp"
#include "rifs/experiments.hpp"
#include "rifs/fourier.hpp"
#include "rifs/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumeric = 3, kIo = 4 };

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "run";
    std::optional<std::size_t> replicas;
    unsigned threads = 0;
    std::string format = "json";
    bool curves = false;
    std::string input;
    std::string parameter;
    std::vector<double> values;
};

rifs::ExperimentConfig load(const Options& o) {
    rifs::ExperimentConfig cfg = rifs::parse_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.replicas) cfg.replicas = *o.replicas;
    cfg.validate();
    return cfg;
}

// Collects output paths and writes the manifest (and the failure marker)
// for one run directory.
class RunDirectory {
public:
    RunDirectory(std::string command, const Options& o) : root_(o.out) {
        manifest_.command = std::move(command);
        manifest_.tool_version = rifs::tool_version();
        manifest_.started_at = rifs::utc_timestamp();
    }

    void bind(const rifs::ExperimentConfig& cfg) {
        manifest_.config_digest = rifs::config_digest(cfg);
        manifest_.seed = cfg.seed;
    }

    void write(const std::string& name, const std::string& content) {
        rifs::write_text_file(root_ / name, content);
        manifest_.outputs.push_back(name);
    }

    void finish(bool success, const std::string& error_json = {}) {
        manifest_.success = success;
        manifest_.finished_at = rifs::utc_timestamp();
        if (!success) rifs::write_text_file(root_ / "FAILED", error_json);
        rifs::write_text_file(root_ / "manifest.json", rifs::dump_json(rifs::manifest_to_json(manifest_)));
    }

    const fs::path& root() const { return root_; }

private:
    fs::path root_;
    rifs::RunManifest manifest_;
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

void print_prediction(const rifs::RegimePrediction& p) {
    std::cout << "h = " << fmt(p.entropy) << "\nchi = " << fmt(p.chi) << "\nh/|chi| = " << fmt(p.ratio)
              << "\nregime = " << rifs::to_string(p.regime) << "\n";
}

int cmd_validate(const Options& o) {
    const auto cfg = load(o);
    print_prediction(rifs::classify_regime(rifs::entropy(cfg.measure), rifs::lyapunov(cfg.ifs, cfg.measure, cfg.error)));
    std::cout << "config_digest = " << rifs::config_digest(cfg) << "\n";
    return kOk;
}

int cmd_simulate(const Options& o, RunDirectory& dir) {
    const auto cfg = load(o);
    dir.bind(cfg);
    dir.write("config.json", rifs::serialize_config(cfg));
    const auto report = rifs::run_experiment(cfg, {o.threads});
    if (o.format == "json") dir.write("report.json", rifs::dump_json(rifs::report_to_json(report)));
    else dir.write("report.csv", rifs::report_csv(report));
    if (o.curves) {
        for (const auto& r : report.replicas) {
            if (!r.error.empty()) continue;
            const std::string stem = "curves/replica_" + std::to_string(r.index);
            dir.write(stem + "_correlation.csv", rifs::curve_csv(r.correlation));
            dir.write(stem + "_box.csv", rifs::curve_csv(r.box));
            dir.write(stem + "_support.csv", rifs::support_csv(r.support));
            if (r.fourier) dir.write(stem + "_energy.csv", rifs::energy_csv(r.fourier->sobolev.curve));
        }
    }
    print_prediction(report.prediction);
    const auto& a = report.aggregate;
    std::cout << "correlation dimension median = " << fmt(a.correlation.median) << " (IQR " << fmt(a.correlation.q25)
              << " .. " << fmt(a.correlation.q75) << ", " << a.correlation_stable << "/" << a.replicas << " stable)\n"
              << "ac_flag true rate = " << fmt(a.ac_true_rate) << "\n";
    return a.failed == a.replicas ? kNumeric : kOk;
}

int cmd_sweep(const Options& o, RunDirectory& dir) {
    auto cfg = load(o);
    std::string parameter = o.parameter;
    std::vector<double> values = o.values;
    if (parameter.empty() && cfg.sweep) parameter = cfg.sweep->parameter;
    if (values.empty() && cfg.sweep) values = cfg.sweep->values;
    if (parameter.empty() || values.empty()) throw rifs::ConfigError("sweep: need a parameter and values (config sweep section or --param/--values)");
    cfg.sweep = rifs::SweepSpec{parameter, values};
    cfg.validate();
    dir.bind(cfg);
    dir.write("config.json", rifs::serialize_config(cfg));
    const auto result = rifs::sweep(cfg, parameter, values, {o.threads});
    if (o.format == "json") dir.write("sweep.json", rifs::dump_json(rifs::sweep_to_json(result)));
    else dir.write("sweep.csv", rifs::sweep_csv(result));
    std::cout << rifs::sweep_csv(result);
    return kOk;
}

int cmd_estimate(const Options& o, RunDirectory& dir) {
    if (o.input.empty()) throw rifs::ConfigError("estimate: --input is required");
    rifs::EstimatorSettings est;
    if (!o.config.empty()) {
        const auto cfg = load(o);
        dir.bind(cfg);
        est = cfg.estimators;
    }
    const auto values = rifs::read_batch_values(o.input);
    const auto grid = rifs::default_scale_grid(values, est.grid_decades, est.grid_per_decade);
    const auto corr = rifs::correlation_dimension(values, grid, est.correlation);
    const auto box = rifs::box_dimension(values, grid, est.box);
    json out = {{"schema_version", rifs::kReportSchemaVersion},
                {"tool_version", rifs::tool_version()},
                {"input", o.input},
                {"count", values.size()},
                {"correlation", rifs::estimate_to_json(corr)},
                {"box", rifs::estimate_to_json(box)}};
    if (!values.empty()) {
        const auto support = rifs::support_measure(values, est.support_deltas);
        json curve = json::array();
        for (const auto& p : support) curve.push_back({p.delta, p.measure});
        out["support"] = {{"curve", curve}, {"decay_exponent", rifs::support_decay_exponent(support)}};
        try {
            const auto d = rifs::density_diagnostics(values, est.bins_coarse, est.bins_fine, est.histogram_trim);
            out["density"] = {{"l2_coarse", d.l2_coarse}, {"l2_fine", d.l2_fine}, {"ratio", d.ratio}, {"ac_flag", rifs::to_string(d.flag)}};
        } catch (const std::invalid_argument& e) {
            out["density"] = {{"error", e.what()}};
        }
    }
    if (o.format == "json") {
        dir.write("estimate.json", rifs::dump_json(out));
    } else {
        std::string csv = "method,value,std_error,r_min,r_max,r_squared,status,points_used\n";
        for (const auto* e : {&corr, &box}) {
            csv += rifs::to_string(e->method) + "," + fmt(e->value) + "," + fmt(e->std_error) + "," + fmt(e->r_min) + "," +
                   fmt(e->r_max) + "," + fmt(e->r_squared) + "," + rifs::to_string(e->status) + "," +
                   std::to_string(e->points_used) + "\n";
        }
        dir.write("estimate.csv", csv);
    }
    if (o.curves) {
        dir.write("curves/correlation.csv", rifs::curve_csv(corr));
        dir.write("curves/box.csv", rifs::curve_csv(box));
    }
    std::cout << "method,value,r_squared,status\n"
              << "correlation," << fmt(corr.value) << "," << fmt(corr.r_squared) << "," << rifs::to_string(corr.status) << "\n"
              << "box," << fmt(box.value) << "," << fmt(box.r_squared) << "," << rifs::to_string(box.status) << "\n";
    return kOk;
}

int cmd_fourier(const Options& o, RunDirectory& dir) {
    const auto cfg = load(o);
    dir.bind(cfg);
    if (!cfg.ifs.is_homogeneous() || !cfg.measure.is_bernoulli()) {
        throw rifs::ConfigError("fourier: needs equal contraction ratios and a Bernoulli measure");
    }
    dir.write("config.json", rifs::serialize_config(cfg));
    const auto& est = cfg.estimators;
    const auto xi = rifs::XiGrid::standard(est.xi_max, est.xi_nodes);
    json rows = json::array();
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
        const auto seed = rifs::derive_seed(cfg.seed, {rifs::component(rifs::StreamRole::replica), r,
                                                       rifs::component(rifs::StreamRole::errors)});
        rifs::ErrorRealization y(cfg.error, seed);
        const auto trunc = rifs::truncation_depth(cfg.ifs, cfg.measure, cfg.error, y, cfg.tol);
        const auto s = rifs::sobolev_dimension_estimate(cfg.ifs, cfg.measure, cfg.error, y, est.alpha_grid, xi, trunc.depth);
        const std::string name = "energy_replica_" + std::to_string(r) + ".csv";
        dir.write(name, rifs::energy_csv(s.curve));
        rows.push_back({{"index", r},
                        {"error_seed", seed},
                        {"depth", trunc.depth},
                        {"sobolev_estimate", s.value},
                        {"any_converged", s.any_converged},
                        {"lower_bound", s.lower_bound},
                        {"curve", name}});
        std::cout << "replica " << r << ": dim_s estimate " << fmt(s.value) << (s.any_converged ? "" : " (no alpha converged)")
                  << ", lower bound " << fmt(s.lower_bound) << "\n";
    }
    dir.write("fourier.json", rifs::dump_json({{"schema_version", rifs::kReportSchemaVersion},
                                               {"tool_version", rifs::tool_version()},
                                               {"xi_max", est.xi_max},
                                               {"xi_nodes", xi.nodes.size()},
                                               {"replicas", rows}}));
    return kOk;
}

std::string error_json(const char* kind, int code, const std::exception& e) {
    json err = {{"error", {{"kind", kind}, {"message", e.what()}}}, {"exit_code", code}};
    if (const auto* c = dynamic_cast<const rifs::ConfigError*>(&e)) err["error"]["problems"] = c->problems();
    if (const auto* n = dynamic_cast<const rifs::NumericError*>(&e)) err["error"]["achieved"] = n->achieved();
    return err.dump() + "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random IFS simulation and estimation laboratory", "rifs"};
    app.set_version_flag("--version", rifs::tool_version());
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", o.config, "JSON configuration file");
        if (needs_config) c->required();
        sub->add_option("--seed", o.seed, "Override the master seed");
        sub->add_option("--out", o.out, "Run directory")->capture_default_str();
        sub->add_option("--replicas", o.replicas, "Override the replica count")->check(CLI::PositiveNumber);
        sub->add_option("--threads", o.threads, "Worker threads (0: all cores)")->capture_default_str();
        sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    };

    auto* simulate = app.add_subcommand("simulate", "Run one experiment and write its report");
    add_common(simulate, true);
    simulate->add_flag("--curves", o.curves, "Also write per-replica scaling curves");
    auto* sweep = app.add_subcommand("sweep", "Run an experiment per parameter value");
    add_common(sweep, true);
    sweep->add_option("--param", o.parameter, "Parameter to sweep (a, theta, eps1)");
    sweep->add_option("--values", o.values, "Grid values")->delimiter(',');
    auto* estimate = app.add_subcommand("estimate", "Run the estimators on an existing batch file");
    add_common(estimate, false);
    estimate->add_option("--input", o.input, "Batch file (CSV or binary)")->required();
    estimate->add_flag("--curves", o.curves, "Also write the scaling curves");
    auto* fourier = app.add_subcommand("fourier", "Energy curves and Sobolev-dimension estimates");
    add_common(fourier, true);
    auto* validate = app.add_subcommand("validate", "Check a configuration and print h, chi and the regime");
    add_common(validate, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    const bool writes = !validate->parsed();
    std::string command = app.get_subcommands().front()->get_name();
    std::optional<RunDirectory> dir;
    try {
        if (validate->parsed()) return cmd_validate(o);
        dir.emplace(command, o);
        int code = kOk;
        if (simulate->parsed()) code = cmd_simulate(o, *dir);
        else if (sweep->parsed()) code = cmd_sweep(o, *dir);
        else if (estimate->parsed()) code = cmd_estimate(o, *dir);
        else code = cmd_fourier(o, *dir);
        dir->finish(code == kOk, code == kOk ? "" : "{\"error\":{\"kind\":\"numeric\",\"message\":\"every replica failed\"}}\n");
        return code;
    } catch (const rifs::ConfigError& e) {
        const auto text = error_json("config", kConfig, e);
        std::cerr << text;
        if (writes && dir) try { dir->finish(false, text); } catch (...) {}
        return kConfig;
    } catch (const std::invalid_argument& e) {
        const auto text = error_json("config", kConfig, e);
        std::cerr << text;
        if (writes && dir) try { dir->finish(false, text); } catch (...) {}
        return kConfig;
    } catch (const rifs::NumericError& e) {
        const auto text = error_json("numeric", kNumeric, e);
        std::cerr << text;
        if (writes && dir) try { dir->finish(false, text); } catch (...) {}
        return kNumeric;
    } catch (const rifs::IoError& e) {
        std::cerr << error_json("io", kIo, e);
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << error_json("io", kIo, e);
        return kIo;
    } catch (const std::exception& e) {
        const auto text = error_json("numeric", kNumeric, e);
        std::cerr << text;
        if (writes && dir) try { dir->finish(false, text); } catch (...) {}
        return kNumeric;
    }
}
