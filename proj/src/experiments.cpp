#include "rifs/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "rifs/error.hpp"
#include "rifs/random.hpp"

namespace rifs {

namespace {

std::string format_number(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

unsigned thread_count(unsigned requested, std::size_t jobs) {
    unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

// Runs job(i) for i < jobs; results are written by index, so the outcome
// does not depend on scheduling.
template <class Job>
void parallel_for(std::size_t jobs, unsigned threads, Job&& job) {
    const unsigned n = thread_count(threads, jobs);
    if (n <= 1) {
        for (std::size_t i = 0; i < jobs; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < jobs; i = next++) job(i);
        });
    }
}

bool fourier_applicable(const ExperimentConfig& cfg) {
    return cfg.estimators.fourier && cfg.ifs.is_homogeneous() && cfg.measure.is_bernoulli();
}

ReplicaResult run_replica(const ExperimentConfig& cfg, std::size_t r) {
    ReplicaResult out;
    out.index = r;
    out.error_seed = derive_seed(cfg.seed, {component(StreamRole::replica), r, component(StreamRole::errors)});
    out.word_seed = derive_seed(cfg.seed, {component(StreamRole::replica), r, component(StreamRole::words)});
    try {
        ErrorRealization y(cfg.error, out.error_seed);
        RandomStream words(out.word_seed);
        const SampleBatch batch = sample_measure(cfg.ifs, cfg.measure, cfg.error, y, cfg.samples, cfg.tol, words);
        out.depth = batch.depth;
        out.tail_bound = batch.tail_bound;
        out.certified = batch.certified;

        const auto& est = cfg.estimators;
        const auto grid = default_scale_grid(batch.values, est.grid_decades, est.grid_per_decade);
        out.correlation = correlation_dimension(batch, grid, est.correlation);
        out.box = box_dimension(batch.values, grid, est.box);
        out.density = density_diagnostics(batch.values, est.bins_coarse, est.bins_fine, est.histogram_trim);
        out.support = support_measure(batch.values, est.support_deltas);
        out.support_exponent = support_decay_exponent(out.support);

        if (cfg.preset && cfg.preset->kind == PresetKind::sinai) {
            SupportCheck check;
            check.bound = sinai_support_bound(cfg.preset->parameter, cfg.preset->eps1);
            check.min_value = batch.values.empty() ? 0.0 : *std::min_element(batch.values.begin(), batch.values.end());
            const auto below = std::count_if(batch.values.begin(), batch.values.end(),
                                             [&](double x) { return x < check.bound - batch.tail_bound; });
            check.fraction_below = batch.values.empty() ? 0.0 : static_cast<double>(below) / static_cast<double>(batch.count());
            out.sinai_support = check;
        }

        if (fourier_applicable(cfg)) {
            const XiGrid xi = XiGrid::standard(est.xi_max, est.xi_nodes);
            const auto power = power_spectrum(cfg.ifs, cfg.measure, y, xi, batch.depth);
            FourierResult f;
            f.energy_1 = energy_integral(1.0, xi, power);
            f.sobolev = sobolev_dimension_estimate(est.alpha_grid, xi, power);
            const auto* law = std::get_if<BernoulliLaw>(&cfg.measure.law());
            f.sobolev.lower_bound = std::abs(std::log(beta(law->p))) / std::abs(lyapunov(cfg.ifs, cfg.measure, cfg.error));
            out.fourier = f;
        }
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

Aggregate aggregate(const std::vector<ReplicaResult>& rows) {
    Aggregate agg;
    agg.replicas = rows.size();
    std::vector<double> corr;
    std::vector<double> box;
    std::vector<double> support;
    std::vector<double> sobolev;
    std::size_t ok = 0;
    std::size_t ac_true = 0;
    std::size_t ac_false = 0;
    std::size_t fourier_rows = 0;
    std::size_t converged = 0;
    std::size_t discordant = 0;
    for (const auto& row : rows) {
        if (!row.error.empty()) {
            ++agg.failed;
            continue;
        }
        ++ok;
        corr.push_back(row.correlation.value);
        if (row.correlation.reported()) ++agg.correlation_stable;
        box.push_back(row.box.value);
        support.push_back(row.support_exponent);
        if (row.density) {
            ac_true += row.density->flag == AcFlag::absolutely_continuous ? 1 : 0;
            ac_false += row.density->flag == AcFlag::singular ? 1 : 0;
        }
        if (row.fourier) {
            ++fourier_rows;
            sobolev.push_back(row.fourier->sobolev.value);
            if (row.fourier->energy_1.converged) {
                ++converged;
                if (row.density && row.density->flag == AcFlag::singular) ++discordant;
            }
        }
    }
    agg.correlation = summarize(corr);
    agg.box = summarize(box);
    agg.support_exponent = summarize(support);
    if (ok > 0) {
        agg.ac_true_rate = static_cast<double>(ac_true) / static_cast<double>(ok);
        agg.ac_false_rate = static_cast<double>(ac_false) / static_cast<double>(ok);
    }
    if (fourier_rows > 0) {
        agg.energy_converged_rate = static_cast<double>(converged) / static_cast<double>(fourier_rows);
        agg.sobolev = summarize(sobolev);
        if (converged > 0) agg.fourier_density_discordance = static_cast<double>(discordant) / static_cast<double>(converged);
    }
    return agg;
}

} // namespace

std::string to_string(Regime regime) {
    switch (regime) {
    case Regime::absolutely_continuous: return "absolutely_continuous";
    case Regime::singular: return "singular";
    default: return "critical";
    }
}

std::string to_string(PresetKind kind) {
    switch (kind) {
    case PresetKind::sinai: return "sinai";
    case PresetKind::arratia: return "arratia";
    default: return "fibonacci";
    }
}

RegimePrediction classify_regime(double entropy, double chi) {
    if (!(chi < 0.0)) throw ConfigError("not contracting on average: chi = " + format_number(chi) + " >= 0");
    RegimePrediction p;
    p.entropy = entropy;
    p.chi = chi;
    p.ratio = entropy / std::abs(chi);
    const double gap = entropy - std::abs(chi);
    if (std::abs(gap) <= kCriticalTolerance) p.regime = Regime::critical;
    else p.regime = gap > 0.0 ? Regime::absolutely_continuous : Regime::singular;
    p.predicted_dimension = std::min(1.0, p.ratio);
    return p;
}

ExperimentConfig sinai_preset(double a, double eps1) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("a: must lie in (0, 1), got " + format_number(a));
    ExperimentConfig cfg(IfsSpec({1.0, 1.0}, {1.0 - a, 1.0 + a}, SeparationClass::distinct_ratios),
                         ShiftMeasure::bernoulli({0.5, 0.5}), ErrorDistribution::perturbed_uniform(eps1));
    cfg.preset = Preset{PresetKind::sinai, a, eps1};
    return cfg;
}

ExperimentConfig arratia_preset(double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw ConfigError("theta: must be positive, got " + format_number(theta));
    ExperimentConfig cfg(IfsSpec({0.0, 1.0}, {1.0, 1.0}, SeparationClass::distinct_digits),
                         ShiftMeasure::bernoulli({0.5, 0.5}), ErrorDistribution::power_law(theta));
    cfg.preset = Preset{PresetKind::arratia, theta, Preset{}.eps1};
    return cfg;
}

ExperimentConfig fibonacci_preset(double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw ConfigError("theta: must be positive, got " + format_number(theta));
    ExperimentConfig cfg(IfsSpec({0.0, 1.0}, {1.0, 1.0}, SeparationClass::distinct_digits),
                         ShiftMeasure::max_entropy_sft(SquareMatrix::from_rows({{1.0, 1.0}, {1.0, 0.0}})),
                         ErrorDistribution::power_law(theta));
    cfg.preset = Preset{PresetKind::fibonacci, theta, Preset{}.eps1};
    return cfg;
}

ExperimentConfig make_preset(const Preset& preset) {
    switch (preset.kind) {
    case PresetKind::sinai: return sinai_preset(preset.parameter, preset.eps1);
    case PresetKind::arratia: return arratia_preset(preset.parameter);
    default: return fibonacci_preset(preset.parameter);
    }
}

double sinai_threshold() { return std::numbers::sqrt3 / 2.0; }

double sinai_predicted_dimension(double a) { return 2.0 * std::numbers::ln2 / std::log(1.0 / (1.0 - a * a)); }

double sinai_support_bound(double a, double eps1) { return 1.0 / (a + eps1 * (1.0 - a)); }

void ExperimentConfig::validate() const {
    std::vector<std::string> problems;
    if (replicas < 1) problems.push_back("run.replicas: must be at least 1");
    if (samples < 2) problems.push_back("run.samples: must be at least 2");
    if (!(tol > 0.0)) problems.push_back("run.tol: must be positive");
    const auto& e = estimators;
    if (!(e.grid_decades > 0.0)) problems.push_back("estimators.grid_decades: must be positive");
    if (!(e.grid_per_decade > 0.0)) problems.push_back("estimators.grid_per_decade: must be positive");
    if (e.bins_coarse == 0 || !(e.bins_coarse < e.bins_fine)) problems.push_back("estimators.bins: need 0 < coarse < fine");
    if (!(e.histogram_trim >= 0.0 && e.histogram_trim < 0.5)) problems.push_back("estimators.histogram_trim: must lie in [0, 0.5)");
    if (!(e.correlation.max_correlation > 0.0 && e.correlation.max_correlation <= 1.0)) {
        problems.push_back("estimators.max_correlation: must lie in (0, 1]");
    }
    if (!(e.correlation.fit.min_r_squared > 0.0 && e.correlation.fit.min_r_squared <= 1.0)) {
        problems.push_back("estimators.min_r_squared: must lie in (0, 1]");
    }
    for (double d : e.support_deltas) {
        if (!(d > 0.0)) {
            problems.push_back("estimators.support_deltas: entries must be positive");
            break;
        }
    }
    if (!(e.xi_max > 1.0)) problems.push_back("estimators.xi_max: must exceed 1");
    if (e.xi_nodes < 100) problems.push_back("estimators.xi_nodes: must be at least 100");
    if (e.alpha_grid.empty()) problems.push_back("estimators.alpha_grid: must not be empty");
    for (std::size_t i = 1; i < e.alpha_grid.size(); ++i) {
        if (!(e.alpha_grid[i] > e.alpha_grid[i - 1])) {
            problems.push_back("estimators.alpha_grid: must be increasing");
            break;
        }
    }
    if (measure.alphabet_size() != ifs.size()) {
        problems.push_back("measure: alphabet size " + std::to_string(measure.alphabet_size()) + " does not match " +
                           std::to_string(ifs.size()) + " maps");
    } else {
        try {
            (void)lyapunov(ifs, measure, error);
        } catch (const ConfigError& err) {
            problems.push_back(err.what());
        }
    }
    if (sweep) {
        if (sweep->values.empty()) problems.push_back("sweep.values: must not be empty");
        try {
            for (double v : sweep->values) (void)with_parameter(*this, sweep->parameter, v);
        } catch (const ConfigError& err) {
            problems.push_back("sweep: " + std::string(err.what()));
        }
    }
    if (!problems.empty()) throw ConfigError(problems);
}

Summary summarize(std::vector<double> values) {
    std::erase_if(values, [](double v) { return !std::isfinite(v); });
    Summary s;
    s.count = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    s.median = quantile(0.5);
    s.q25 = quantile(0.25);
    s.q75 = quantile(0.75);
    double total = 0.0;
    for (double v : values) total += v;
    s.mean = total / static_cast<double>(values.size());
    return s;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
    cfg.validate();
    ExperimentReport report{cfg, classify_regime(entropy(cfg.measure), lyapunov(cfg.ifs, cfg.measure, cfg.error)), {}, {}, {}};
    report.replicas.resize(cfg.replicas);
    parallel_for(cfg.replicas, options.threads, [&](std::size_t r) { report.replicas[r] = run_replica(cfg, r); });
    report.aggregate = aggregate(report.replicas);

    if (report.prediction.regime == Regime::critical) {
        report.caveats.push_back("critical case h = |chi|: the measure is predicted singular with dimension 1; "
                                 "no finite-sample statistic here separates it from absolute continuity");
    }
    report.caveats.push_back("correlation dimension estimates the correlation (D2) exponent; it coincides with the "
                             "Hausdorff dimension only for measures with uniform local scaling");
    if (report.replicas.size() > 0 && !report.replicas.front().certified && report.aggregate.failed < cfg.replicas) {
        report.caveats.push_back("tail bounds are extrapolated from the realized decay rate, not certified");
    }
    if (cfg.preset && cfg.preset->kind == PresetKind::sinai && cfg.preset->eps1 > 0.0) {
        report.caveats.push_back("sinai support bound is adjusted for the perturbation and reported, not asserted");
    }
    return report;
}

ExperimentConfig with_parameter(const ExperimentConfig& base, const std::string& parameter, double value) {
    if (!base.preset) throw ConfigError("sweeps need a preset configuration");
    Preset p = *base.preset;
    if (parameter == "a" && p.kind == PresetKind::sinai) p.parameter = value;
    else if (parameter == "eps1" && p.kind == PresetKind::sinai) p.eps1 = value;
    else if (parameter == "theta" && p.kind != PresetKind::sinai) p.parameter = value;
    else throw ConfigError("parameter '" + parameter + "' does not apply to preset " + to_string(p.kind));
    ExperimentConfig cfg = make_preset(p);
    cfg.replicas = base.replicas;
    cfg.samples = base.samples;
    cfg.tol = base.tol;
    cfg.seed = base.seed;
    cfg.estimators = base.estimators;
    return cfg;
}

SweepResult sweep(const ExperimentConfig& base, const std::string& parameter, const std::vector<double>& values,
                  const RunOptions& options) {
    SweepResult out;
    out.parameter = parameter;
    for (std::size_t g = 0; g < values.size(); ++g) {
        SweepRow row;
        row.value = values[g];
        row.seed = derive_seed(base.seed, {component(StreamRole::grid_point), g});
        try {
            ExperimentConfig cfg = with_parameter(base, parameter, values[g]);
            cfg.seed = row.seed;
            row.report = run_experiment(cfg, options);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

} // namespace rifs
