#include "rifs/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rifs/config.hpp"
#include "rifs/error.hpp"

namespace rifs {

using nlohmann::json;

namespace {

constexpr char kBinaryMagic[8] = {'R', 'I', 'F', 'S', 'B', 'A', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "binary batch layout assumes a little-endian host");

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

json optional_seed(const std::optional<std::uint64_t>& seed) { return seed ? json(*seed) : json(nullptr); }

json summary_json(const Summary& s) {
    return {{"count", s.count}, {"median", s.median}, {"mean", s.mean}, {"q25", s.q25}, {"q75", s.q75}};
}

json density_json(const DensityDiagnostics& d) {
    return {{"bins_coarse", d.bins_coarse},
            {"bins_fine", d.bins_fine},
            {"l2_coarse", d.l2_coarse},
            {"l2_fine", d.l2_fine},
            {"max_mass_coarse", d.max_mass_coarse},
            {"max_mass_fine", d.max_mass_fine},
            {"ratio", d.ratio},
            {"ac_flag", to_string(d.flag)},
            {"range", {d.range_lo, d.range_hi}},
            {"fraction_in_range", d.fraction_in_range}};
}

json energy_json(const EnergyEstimate& e) {
    return {{"alpha", e.alpha},
            {"value", e.value},
            {"xi_max", e.xi_max},
            {"nodes", e.nodes},
            {"last_decade_fraction", e.last_decade_fraction},
            {"converged", e.converged}};
}

json replica_json(const ReplicaResult& r) {
    json out = {{"index", r.index}, {"error_seed", r.error_seed}, {"word_seed", r.word_seed}};
    if (!r.error.empty()) {
        out["error"] = r.error;
        return out;
    }
    out["depth"] = r.depth;
    out["tail_bound"] = r.tail_bound;
    out["certified"] = r.certified;
    out["correlation"] = estimate_to_json(r.correlation);
    out["box"] = estimate_to_json(r.box);
    if (r.density) out["density"] = density_json(*r.density);
    json support = json::array();
    for (const auto& p : r.support) support.push_back({p.delta, p.measure});
    out["support"] = {{"curve", support}, {"decay_exponent", r.support_exponent}};
    if (r.sinai_support) {
        out["sinai_support"] = {{"bound", r.sinai_support->bound},
                                {"min_value", r.sinai_support->min_value},
                                {"fraction_below", r.sinai_support->fraction_below}};
    }
    if (r.fourier) {
        json curve = json::array();
        for (const auto& e : r.fourier->sobolev.curve) curve.push_back(energy_json(e));
        out["fourier"] = {{"energy_1", energy_json(r.fourier->energy_1)},
                          {"sobolev_estimate", r.fourier->sobolev.value},
                          {"any_converged", r.fourier->sobolev.any_converged},
                          {"lower_bound", r.fourier->sobolev.lower_bound},
                          {"curve", curve}};
    }
    return out;
}

json aggregate_json(const Aggregate& a) {
    json out = {{"replicas", a.replicas},
                {"failed", a.failed},
                {"correlation_dimension", summary_json(a.correlation)},
                {"correlation_stable", a.correlation_stable},
                {"box_dimension", summary_json(a.box)},
                {"ac_true_rate", a.ac_true_rate},
                {"ac_false_rate", a.ac_false_rate},
                {"support_decay_exponent", summary_json(a.support_exponent)}};
    if (a.energy_converged_rate) out["energy_1_converged_rate"] = *a.energy_converged_rate;
    if (a.sobolev) out["sobolev_estimate"] = summary_json(*a.sobolev);
    if (a.fourier_density_discordance) out["fourier_density_discordance"] = *a.fourier_density_discordance;
    return out;
}

json prediction_json(const RegimePrediction& p) {
    return {{"entropy", p.entropy},
            {"chi", p.chi},
            {"ratio", p.ratio},
            {"regime", to_string(p.regime)},
            {"predicted_dimension", p.predicted_dimension}};
}

} // namespace

json batch_metadata(const SampleBatch& batch) {
    return {{"count", batch.count()},
            {"depth", batch.depth},
            {"tail_bound", batch.tail_bound},
            {"certified", batch.certified},
            {"ifs", batch.provenance.ifs},
            {"measure", batch.provenance.measure},
            {"error", batch.provenance.error},
            {"error_seed", optional_seed(batch.provenance.error_seed)},
            {"word_seed", batch.provenance.word_seed},
            {"tool_version", tool_version()}};
}

void write_batch(const SampleBatch& batch, const std::filesystem::path& path, BatchFormat format) {
    if (format == BatchFormat::csv) {
        std::string text = "value\n";
        for (double x : batch.values) text += num(x) + "\n";
        write_text_file(path, text);
    } else {
        std::string bytes(kBinaryMagic, sizeof kBinaryMagic);
        const std::uint64_t n = batch.values.size();
        bytes.append(reinterpret_cast<const char*>(&n), sizeof n);
        bytes.append(reinterpret_cast<const char*>(batch.values.data()), n * sizeof(double));
        write_text_file(path, bytes);
    }
    json meta = batch_metadata(batch);
    meta["format"] = format == BatchFormat::csv ? "csv" : "binary";
    write_text_file(std::filesystem::path(path.string() + ".json"), dump_json(meta));
}

std::vector<double> read_batch_values(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read batch file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string data = buffer.str();

    std::vector<double> values;
    if (data.size() >= sizeof kBinaryMagic && std::memcmp(data.data(), kBinaryMagic, sizeof kBinaryMagic) == 0) {
        std::uint64_t n = 0;
        if (data.size() < sizeof kBinaryMagic + sizeof n) throw IoError("truncated binary batch " + path.string());
        std::memcpy(&n, data.data() + sizeof kBinaryMagic, sizeof n);
        const std::size_t offset = sizeof kBinaryMagic + sizeof n;
        if (data.size() != offset + n * sizeof(double)) throw IoError("binary batch size mismatch in " + path.string());
        values.resize(n);
        std::memcpy(values.data(), data.data() + offset, n * sizeof(double));
        return values;
    }

    std::istringstream lines(data);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        const std::string field = comma == std::string::npos ? line : line.substr(0, comma);
        double x = 0.0;
        const auto res = std::from_chars(field.data(), field.data() + field.size(), x);
        if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
            if (line_no == 1 && values.empty()) continue;  // header
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": not a number: " + field);
        }
        values.push_back(x);
    }
    return values;
}

std::string curve_csv(const DimensionEstimate& e) {
    std::string out = e.method == DimensionMethod::correlation ? "r,C\n" : "delta,N\n";
    for (std::size_t i = 0; i < e.curve.scale.size(); ++i) out += num(e.curve.scale[i]) + "," + num(e.curve.value[i]) + "\n";
    return out;
}

std::string support_csv(std::span<const SupportPoint> curve) {
    std::string out = "delta,measure\n";
    for (const auto& p : curve) out += num(p.delta) + "," + num(p.measure) + "\n";
    return out;
}

std::string energy_csv(std::span<const EnergyEstimate> curve) {
    std::string out = "alpha,value,converged\n";
    for (const auto& e : curve) out += num(e.alpha) + "," + num(e.value) + "," + (e.converged ? "true" : "false") + "\n";
    return out;
}

std::string transversality_csv(const TransversalityResult& result) {
    std::string out = "r,A_hat\n";
    for (std::size_t i = 0; i < result.r.size(); ++i) out += num(result.r[i]) + "," + num(result.a_hat[i]) + "\n";
    return out;
}

json estimate_to_json(const DimensionEstimate& e, bool with_curve) {
    json out = {{"method", to_string(e.method)},
                {"value", e.value},
                {"std_error", e.std_error},
                {"scale_window", {e.r_min, e.r_max}},
                {"points_used", e.points_used},
                {"fit_points", e.fit_points},
                {"r_squared", e.r_squared},
                {"status", to_string(e.status)}};
    if (!e.note.empty()) out["note"] = e.note;
    if (with_curve) out["curve"] = {{"scale", e.curve.scale}, {"value", e.curve.value}};
    return out;
}

json report_to_json(const ExperimentReport& report) {
    json replicas = json::array();
    for (const auto& r : report.replicas) replicas.push_back(replica_json(r));
    return {{"schema_version", kReportSchemaVersion},
            {"tool_version", tool_version()},
            {"config", config_to_json(report.config)},
            {"prediction", prediction_json(report.prediction)},
            {"replicas", replicas},
            {"aggregate", aggregate_json(report.aggregate)},
            {"caveats", report.caveats}};
}

json sweep_to_json(const SweepResult& result) {
    json rows = json::array();
    for (const auto& row : result.rows) {
        json r = {{"value", row.value}, {"seed", row.seed}};
        if (row.report) {
            r["prediction"] = prediction_json(row.report->prediction);
            r["aggregate"] = aggregate_json(row.report->aggregate);
            r["caveats"] = row.report->caveats;
        } else {
            r["error"] = row.error;
        }
        rows.push_back(r);
    }
    return {{"schema_version", kReportSchemaVersion},
            {"tool_version", tool_version()},
            {"parameter", result.parameter},
            {"rows", rows}};
}

std::string report_csv(const ExperimentReport& report) {
    std::string out =
        "replica,error_seed,depth,tail_bound,certified,corr_dim,corr_status,corr_r2,box_dim,box_status,l2_ratio,ac_flag,"
        "support_exponent,energy_1_converged,sobolev_estimate,error\n";
    for (const auto& r : report.replicas) {
        out += std::to_string(r.index) + "," + std::to_string(r.error_seed) + ",";
        if (!r.error.empty()) {
            out += ",,,,,,,,,,,,,\"" + r.error + "\"\n";
            continue;
        }
        out += std::to_string(r.depth) + "," + num(r.tail_bound) + "," + (r.certified ? "true" : "false") + ",";
        out += num(r.correlation.value) + "," + to_string(r.correlation.status) + "," + num(r.correlation.r_squared) + ",";
        out += num(r.box.value) + "," + to_string(r.box.status) + ",";
        out += (r.density ? num(r.density->ratio) + "," + to_string(r.density->flag) : std::string(",")) + ",";
        out += num(r.support_exponent) + ",";
        if (r.fourier) out += std::string(r.fourier->energy_1.converged ? "true" : "false") + "," + num(r.fourier->sobolev.value);
        else out += ",";
        out += ",\n";
    }
    return out;
}

std::string sweep_csv(const SweepResult& result) {
    std::string out = result.parameter +
                      ",seed,regime,entropy,chi,predicted_dim,corr_dim_median,corr_dim_q25,corr_dim_q75,corr_stable,"
                      "box_dim_median,ac_true_rate,ac_false_rate,failed,error\n";
    for (const auto& row : result.rows) {
        out += num(row.value) + "," + std::to_string(row.seed) + ",";
        if (!row.report) {
            out += ",,,,,,,,,,,,\"" + row.error + "\"\n";
            continue;
        }
        const auto& p = row.report->prediction;
        const auto& a = row.report->aggregate;
        out += to_string(p.regime) + "," + num(p.entropy) + "," + num(p.chi) + "," + num(p.predicted_dimension) + ",";
        out += num(a.correlation.median) + "," + num(a.correlation.q25) + "," + num(a.correlation.q75) + "," +
               std::to_string(a.correlation_stable) + ",";
        out += num(a.box.median) + "," + num(a.ac_true_rate) + "," + num(a.ac_false_rate) + "," + std::to_string(a.failed) + ",\n";
    }
    return out;
}

std::string dump_json(const json& value) { return value.dump(2) + "\n"; }

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

} // namespace rifs
