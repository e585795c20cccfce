#include "rifs/config.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "rifs/error.hpp"

namespace rifs {

using nlohmann::json;

namespace {

// Typed access to one JSON object; records problems instead of throwing
// and reports keys that were never read.
class Section {
public:
    Section(const json& node, std::string path, std::vector<std::string>& problems)
        : node_(node), path_(std::move(path)), problems_(problems) {}

    bool has(const std::string& key) const { return node_.contains(key); }

    /// Marks a key as handled without reading it.
    void touch(const std::string& key) { used_.insert(key); }

    std::optional<double> number(const std::string& key) {
        const json* v = get(key);
        if (!v) return std::nullopt;
        if (!v->is_number()) return fail(key, "expected a number");
        return v->get<double>();
    }

    std::optional<std::uint64_t> count(const std::string& key) {
        const json* v = get(key);
        if (!v) return std::nullopt;
        if (v->is_number_unsigned()) return v->get<std::uint64_t>();
        if (v->is_number_integer() && v->get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v->get<std::int64_t>());
        return fail(key, "expected a non-negative integer");
    }

    std::optional<bool> flag(const std::string& key) {
        const json* v = get(key);
        if (!v) return std::nullopt;
        if (!v->is_boolean()) return fail(key, "expected true or false");
        return v->get<bool>();
    }

    std::optional<std::string> text(const std::string& key) {
        const json* v = get(key);
        if (!v) return std::nullopt;
        if (!v->is_string()) return fail(key, "expected a string");
        return v->get<std::string>();
    }

    std::optional<std::vector<double>> numbers(const std::string& key) {
        const json* v = get(key);
        if (!v) return std::nullopt;
        if (!v->is_array()) return fail(key, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& item : *v) {
            if (!item.is_number()) return fail(key, "expected an array of numbers");
            out.push_back(item.get<double>());
        }
        return out;
    }

    std::optional<std::vector<std::vector<double>>> matrix(const std::string& key) {
        const json* v = get(key);
        if (!v) return std::nullopt;
        if (!v->is_array()) return fail(key, "expected an array of rows");
        std::vector<std::vector<double>> rows;
        for (const auto& row : *v) {
            if (!row.is_array()) return fail(key, "expected an array of rows");
            std::vector<double> r;
            for (const auto& item : row) {
                if (!item.is_number()) return fail(key, "expected numeric matrix entries");
                r.push_back(item.get<double>());
            }
            rows.push_back(std::move(r));
        }
        return rows;
    }

    std::optional<Section> child(const std::string& key) {
        const json* v = get(key);
        if (!v) return std::nullopt;
        if (!v->is_object()) return fail(key, "expected an object");
        return Section(*v, name(key), problems_);
    }

    void require(const std::string& key) {
        if (!has(key)) problem(key, "missing");
    }

    void problem(const std::string& key, const std::string& message) { problems_.push_back(name(key) + ": " + message); }

    void finish() const {
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            if (!used_.count(it.key())) problems_.push_back(name(it.key()) + ": unknown key");
        }
    }

    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json* get(const std::string& key) {
        used_.insert(key);
        auto it = node_.find(key);
        return it == node_.end() ? nullptr : &*it;
    }

    std::nullopt_t fail(const std::string& key, const std::string& message) {
        problem(key, message);
        return std::nullopt;
    }

    const json& node_;
    std::string path_;
    std::vector<std::string>& problems_;
    std::set<std::string> used_;
};

std::string number_text(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

template <class F>
auto collect(std::vector<std::string>& problems, const std::string& prefix, F&& build) -> std::optional<decltype(build())> {
    try {
        return build();
    } catch (const ConfigError& e) {
        for (const auto& p : e.problems()) problems.push_back(p.rfind(prefix, 0) == 0 ? p : prefix + ": " + p);
    } catch (const std::exception& e) {
        const std::string what = e.what();
        problems.push_back(what.rfind(prefix, 0) == 0 ? what : prefix + ": " + what);
    }
    return std::nullopt;
}

std::optional<Preset> read_preset(Section& top) {
    const auto name = top.text("preset");
    if (!name) return std::nullopt;
    Preset p;
    bool ok = true;
    if (*name == "sinai") {
        p.kind = PresetKind::sinai;
        top.require("a");
        const auto a = top.number("a");
        if (a && !(*a > 0.0 && *a < 1.0)) {
            top.problem("a", "must lie in (0, 1), got " + number_text(*a));
            ok = false;
        }
        p.parameter = a.value_or(0.5);
        const auto eps1 = top.number("eps1");
        if (eps1 && !(*eps1 > 0.0 && *eps1 < 1.0)) {
            top.problem("eps1", "must lie in (0, 1), got " + number_text(*eps1));
            ok = false;
        }
        p.eps1 = eps1.value_or(p.eps1);
        ok = ok && a.has_value();
    } else if (*name == "arratia" || *name == "fibonacci") {
        p.kind = *name == "arratia" ? PresetKind::arratia : PresetKind::fibonacci;
        top.require("theta");
        const auto theta = top.number("theta");
        if (theta && !(*theta > 0.0)) {
            top.problem("theta", "must be positive, got " + number_text(*theta));
            ok = false;
        }
        p.parameter = theta.value_or(1.0);
        ok = ok && theta.has_value();
    } else {
        top.problem("preset", "unknown preset '" + *name + "' (expected sinai, arratia or fibonacci)");
        return std::nullopt;
    }
    if (!ok) return std::nullopt;
    return p;
}

std::optional<IfsSpec> read_ifs(Section& s, std::vector<std::string>& problems) {
    s.require("digits");
    s.require("ratios");
    const auto digits = s.numbers("digits");
    const auto ratios = s.numbers("ratios");
    const auto cls = s.text("class");
    std::optional<SeparationClass> sep;
    if (cls) {
        if (*cls == "distinct_digits") sep = SeparationClass::distinct_digits;
        else if (*cls == "distinct_ratios") sep = SeparationClass::distinct_ratios;
        else s.problem("class", "expected distinct_digits or distinct_ratios");
    }
    s.finish();
    if (!digits || !ratios || (cls && !sep)) return std::nullopt;
    return collect(problems, "ifs", [&] { return sep ? IfsSpec(*digits, *ratios, *sep) : IfsSpec(*digits, *ratios); });
}

std::optional<ShiftMeasure> read_measure(Section& s, std::vector<std::string>& problems) {
    s.require("type");
    const auto type = s.text("type");
    std::optional<ShiftMeasure> out;
    if (!type) {
        s.finish();
        return out;
    }
    if (*type == "bernoulli") {
        s.require("p");
        if (const auto p = s.numbers("p")) out = collect(problems, "measure", [&] { return ShiftMeasure::bernoulli(*p); });
    } else if (*type == "markov") {
        s.require("transition");
        const auto t = s.matrix("transition");
        const auto st = s.numbers("stationary");
        if (t) {
            out = collect(problems, "measure", [&] {
                return ShiftMeasure::markov(SquareMatrix::from_rows(*t), st.value_or(std::vector<double>{}));
            });
        }
    } else if (*type == "sft") {
        s.require("adjacency");
        if (const auto a = s.matrix("adjacency")) {
            out = collect(problems, "measure", [&] { return ShiftMeasure::max_entropy_sft(SquareMatrix::from_rows(*a)); });
        }
    } else {
        s.problem("type", "unknown measure type '" + *type + "' (expected bernoulli, markov or sft)");
    }
    s.finish();
    return out;
}

std::optional<ErrorDistribution> read_error(Section& s, std::vector<std::string>& problems) {
    s.require("type");
    const auto type = s.text("type");
    std::optional<ErrorDistribution> out;
    if (!type) {
        s.finish();
        return out;
    }
    if (*type == "perturbed_uniform") {
        s.require("eps1");
        if (const auto e = s.number("eps1")) out = collect(problems, "error", [&] { return ErrorDistribution::perturbed_uniform(*e); });
    } else if (*type == "power_law") {
        s.require("theta");
        if (const auto t = s.number("theta")) out = collect(problems, "error", [&] { return ErrorDistribution::power_law(*t); });
    } else if (*type == "piecewise") {
        s.require("breakpoints");
        s.require("values");
        const auto b = s.numbers("breakpoints");
        const auto v = s.numbers("values");
        if (b && v) out = collect(problems, "error", [&] { return ErrorDistribution::piecewise(*b, *v); });
    } else {
        s.problem("type", "unknown error type '" + *type + "' (expected perturbed_uniform, power_law or piecewise)");
    }
    s.finish();
    return out;
}

void read_fit(Section& s, FitOptions& fit) {
    if (auto v = s.number("min_window_decades")) fit.min_window_decades = *v;
    if (auto v = s.number("trim_decades")) fit.trim_decades = *v;
    if (auto v = s.number("min_r_squared")) fit.min_r_squared = *v;
    if (auto v = s.count("min_points")) fit.min_points = *v;
}

void read_estimators(Section& s, EstimatorSettings& e) {
    if (auto v = s.number("grid_decades")) e.grid_decades = *v;
    if (auto v = s.number("grid_per_decade")) e.grid_per_decade = *v;
    if (auto c = s.child("correlation")) {
        if (auto v = c->number("min_pairs")) e.correlation.min_pairs = *v;
        if (auto v = c->number("max_correlation")) e.correlation.max_correlation = *v;
        if (auto v = c->number("scale_floor")) e.correlation.scale_floor = *v;
        read_fit(*c, e.correlation.fit);
        c->finish();
    }
    if (auto b = s.child("box")) {
        if (auto v = b->number("min_boxes")) e.box.min_boxes = *v;
        if (auto v = b->number("min_points_per_box")) e.box.min_points_per_box = *v;
        read_fit(*b, e.box.fit);
        b->finish();
    }
    if (auto v = s.count("bins_coarse")) e.bins_coarse = *v;
    if (auto v = s.count("bins_fine")) e.bins_fine = *v;
    if (auto v = s.number("histogram_trim")) e.histogram_trim = *v;
    if (auto v = s.numbers("support_deltas")) e.support_deltas = *v;
    if (auto v = s.flag("fourier")) e.fourier = *v;
    if (auto v = s.number("xi_max")) e.xi_max = *v;
    if (auto v = s.count("xi_nodes")) e.xi_nodes = *v;
    if (auto v = s.numbers("alpha_grid")) e.alpha_grid = *v;
    s.finish();
}

json fit_to_json(const FitOptions& fit) {
    return {{"min_window_decades", fit.min_window_decades},
            {"trim_decades", fit.trim_decades},
            {"min_r_squared", fit.min_r_squared},
            {"min_points", fit.min_points}};
}

json matrix_json(const SquareMatrix& m) { return m.rows(); }

} // namespace

ExperimentConfig parse_config_text(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be an object");

    std::vector<std::string> problems;
    Section top(root, "", problems);
    std::optional<ExperimentConfig> cfg;

    const bool explicit_model = root.contains("ifs") || root.contains("measure") || root.contains("error");
    if (root.contains("preset")) {
        if (explicit_model) problems.push_back("preset: cannot be combined with ifs, measure or error sections");
        if (auto preset = read_preset(top)) {
            if (auto built = collect(problems, "preset", [&] { return make_preset(*preset); })) cfg = std::move(*built);
        }
    } else {
        for (const char* key : {"a", "theta", "eps1"}) {
            if (root.contains(key)) {
                top.touch(key);
                problems.push_back(std::string(key) + ": only valid together with a preset");
            }
        }
        std::optional<IfsSpec> ifs;
        std::optional<ShiftMeasure> measure;
        std::optional<ErrorDistribution> error;
        top.require("ifs");
        top.require("measure");
        top.require("error");
        if (auto s = top.child("ifs")) ifs = read_ifs(*s, problems);
        if (auto s = top.child("measure")) measure = read_measure(*s, problems);
        if (auto s = top.child("error")) error = read_error(*s, problems);
        if (ifs && measure && error) cfg.emplace(std::move(*ifs), std::move(*measure), std::move(*error));
    }

    // Run-level settings are read even when the model failed so that all
    // problems surface at once.
    ExperimentConfig fallback = arratia_preset(1.0);
    ExperimentConfig& target = cfg ? *cfg : fallback;
    if (auto run = top.child("run")) {
        if (auto v = run->count("replicas")) target.replicas = *v;
        if (auto v = run->count("samples")) target.samples = *v;
        if (auto v = run->number("tol")) target.tol = *v;
        if (auto v = run->count("seed")) target.seed = *v;
        run->finish();
    }
    if (auto est = top.child("estimators")) read_estimators(*est, target.estimators);
    if (auto sw = top.child("sweep")) {
        SweepSpec spec;
        sw->require("parameter");
        sw->require("values");
        if (auto v = sw->text("parameter")) spec.parameter = *v;
        if (auto v = sw->numbers("values")) spec.values = *v;
        sw->finish();
        target.sweep = spec;
    }
    top.finish();

    {
        try {
            target.validate();
        } catch (const ConfigError& e) {
            problems.insert(problems.end(), e.problems().begin(), e.problems().end());
        }
    }
    if (!problems.empty()) throw ConfigError(problems);
    return std::move(*cfg);
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

json config_to_json(const ExperimentConfig& cfg) {
    json root = json::object();
    if (cfg.preset) {
        root["preset"] = to_string(cfg.preset->kind);
        if (cfg.preset->kind == PresetKind::sinai) {
            root["a"] = cfg.preset->parameter;
            root["eps1"] = cfg.preset->eps1;
        } else {
            root["theta"] = cfg.preset->parameter;
        }
    } else {
        root["ifs"] = {{"digits", cfg.ifs.digits()},
                       {"ratios", cfg.ifs.ratios()},
                       {"class", to_string(cfg.ifs.separation_class())}};
        std::visit(
            [&](const auto& law) {
                using T = std::decay_t<decltype(law)>;
                if constexpr (std::is_same_v<T, BernoulliLaw>) {
                    root["measure"] = {{"type", "bernoulli"}, {"p", law.p}};
                } else if constexpr (std::is_same_v<T, MarkovLaw>) {
                    root["measure"] = {{"type", "markov"}, {"transition", matrix_json(law.transition)}, {"stationary", law.stationary}};
                } else {
                    root["measure"] = {{"type", "sft"}, {"adjacency", matrix_json(law.adjacency)}};
                }
            },
            cfg.measure.law());
        std::visit(
            [&](const auto& law) {
                using T = std::decay_t<decltype(law)>;
                if constexpr (std::is_same_v<T, PerturbedUniformLaw>) {
                    root["error"] = {{"type", "perturbed_uniform"}, {"eps1", law.eps1}};
                } else if constexpr (std::is_same_v<T, PowerLawLaw>) {
                    root["error"] = {{"type", "power_law"}, {"theta", law.theta}};
                } else {
                    root["error"] = {{"type", "piecewise"}, {"breakpoints", law.breakpoints}, {"values", law.values}};
                }
            },
            cfg.error.law());
    }
    root["run"] = {{"replicas", cfg.replicas}, {"samples", cfg.samples}, {"tol", cfg.tol}, {"seed", cfg.seed}};
    const auto& e = cfg.estimators;
    json corr = fit_to_json(e.correlation.fit);
    corr["min_pairs"] = e.correlation.min_pairs;
    corr["max_correlation"] = e.correlation.max_correlation;
    corr["scale_floor"] = e.correlation.scale_floor;
    json box = fit_to_json(e.box.fit);
    box["min_boxes"] = e.box.min_boxes;
    box["min_points_per_box"] = e.box.min_points_per_box;
    root["estimators"] = {{"grid_decades", e.grid_decades},
                          {"grid_per_decade", e.grid_per_decade},
                          {"correlation", corr},
                          {"box", box},
                          {"bins_coarse", e.bins_coarse},
                          {"bins_fine", e.bins_fine},
                          {"histogram_trim", e.histogram_trim},
                          {"support_deltas", e.support_deltas},
                          {"fourier", e.fourier},
                          {"xi_max", e.xi_max},
                          {"xi_nodes", e.xi_nodes},
                          {"alpha_grid", e.alpha_grid}};
    if (cfg.sweep) root["sweep"] = {{"parameter", cfg.sweep->parameter}, {"values", cfg.sweep->values}};
    return root;
}

std::string serialize_config(const ExperimentConfig& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

std::string config_digest(const ExperimentConfig& cfg) {
    const std::string canonical = config_to_json(cfg).dump();
    unsigned char hash[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(canonical.data(), canonical.size(), hash, &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("config_digest: SHA-256 failed");
    }
    std::ostringstream os;
    for (unsigned int i = 0; i < length; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(hash[i]);
    return os.str();
}

json manifest_to_json(const RunManifest& m) {
    return {{"command", m.command},         {"config_digest", m.config_digest}, {"tool_version", m.tool_version},
            {"seed", m.seed},               {"started_at", m.started_at},       {"finished_at", m.finished_at},
            {"outputs", m.outputs},         {"success", m.success}};
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::string tool_version() { return RIFS_VERSION; }

} // namespace rifs
