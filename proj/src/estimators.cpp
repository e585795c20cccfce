#include "rifs/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "rifs/error.hpp"

namespace rifs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct LineFit {
    double slope = kNaN;
    double std_error = kNaN;
    double r_squared = kNaN;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    LineFit fit;
    if (n < 2) return fit;
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) return fit;
    fit.slope = sxy / sxx;
    const double sse = std::max(0.0, syy - fit.slope * sxy);
    fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    fit.std_error = n > 2 ? std::sqrt(sse / static_cast<double>(n - 2) / sxx) : 0.0;
    return fit;
}

std::vector<double> sorted_copy(std::span<const double> values) {
    std::vector<double> s(values.begin(), values.end());
    std::sort(s.begin(), s.end());
    return s;
}

// Fits log(value) against sign * log(scale) over the valid grid points,
// trimming decades at both ends while the window allows it.
void fit_window(DimensionEstimate& est, const std::vector<char>& valid, double sign, const FitOptions& opt) {
    const auto& scale = est.curve.scale;
    const auto& value = est.curve.value;
    std::size_t lo = scale.size();
    std::size_t hi = 0;
    for (std::size_t i = 0; i < scale.size(); ++i) {
        if (!valid[i]) continue;
        lo = std::min(lo, i);
        hi = std::max(hi, i);
    }
    if (lo >= scale.size() || hi <= lo) {
        est.status = FitStatus::undefined;
        est.note = "no resolvable scaling range";
        return;
    }
    const double span = std::log10(scale[hi] / scale[lo]);
    const double trim = std::clamp((span - opt.min_window_decades) / 2.0, 0.0, opt.trim_decades);
    const double w_lo = scale[lo] * std::pow(10.0, trim) * (1.0 - 1e-12);
    const double w_hi = scale[hi] * std::pow(10.0, -trim) * (1.0 + 1e-12);

    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = lo; i <= hi; ++i) {
        if (!valid[i] || scale[i] < w_lo || scale[i] > w_hi) continue;
        xs.push_back(sign * std::log(scale[i]));
        ys.push_back(std::log(value[i]));
    }
    est.fit_points = xs.size();
    if (xs.size() < std::max<std::size_t>(opt.min_points, 2)) {
        est.status = FitStatus::undefined;
        est.note = "too few grid points in the scaling window";
        return;
    }
    est.r_min = std::min(std::exp(sign * xs.front()), std::exp(sign * xs.back()));
    est.r_max = std::max(std::exp(sign * xs.front()), std::exp(sign * xs.back()));
    const LineFit fit = least_squares(xs, ys);
    est.value = fit.slope;
    est.std_error = fit.std_error;
    est.r_squared = fit.r_squared;
    if (!std::isfinite(fit.slope)) {
        est.status = FitStatus::undefined;
        est.note = "degenerate fit";
    } else if (fit.r_squared >= opt.min_r_squared) {
        est.status = FitStatus::ok;
    } else {
        est.status = FitStatus::unstable;
        est.note = "log-log fit below the R^2 threshold";
    }
}

} // namespace

std::string to_string(DimensionMethod method) { return method == DimensionMethod::correlation ? "correlation" : "box"; }

std::string to_string(FitStatus status) {
    switch (status) {
    case FitStatus::ok: return "ok";
    case FitStatus::unstable: return "unstable";
    default: return "undefined";
    }
}

std::string to_string(AcFlag flag) {
    switch (flag) {
    case AcFlag::absolutely_continuous: return "true";
    case AcFlag::singular: return "false";
    default: return "indeterminate";
    }
}

std::vector<double> geometric_grid(double lo, double hi, double per_decade) {
    if (!(lo > 0.0) || !(hi > lo) || !(per_decade > 0.0)) throw std::invalid_argument("geometric_grid: need 0 < lo < hi");
    const double decades = std::log10(hi / lo);
    const auto steps = static_cast<std::size_t>(std::ceil(decades * per_decade - 1e-9));
    std::vector<double> grid(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        grid[i] = lo * std::pow(10.0, decades * static_cast<double>(i) / static_cast<double>(steps));
    }
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

std::vector<double> default_scale_grid(std::span<const double> values, double decades, double per_decade) {
    if (values.empty()) return {};
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    const double diameter = *mx - *mn;
    if (!(diameter > 0.0)) return geometric_grid(std::pow(10.0, -decades), 1.0, per_decade);
    return geometric_grid(diameter * std::pow(10.0, -decades), diameter, per_decade);
}

std::vector<std::uint64_t> correlation_pair_counts(std::span<const double> sorted, std::span<const double> r_grid) {
    std::vector<std::uint64_t> counts(r_grid.size(), 0);
    const std::size_t n = sorted.size();
    for (std::size_t g = 0; g < r_grid.size(); ++g) {
        const double r = r_grid[g];
        std::size_t k = 0;
        std::uint64_t count = 0;
        for (std::size_t l = 0; l < n; ++l) {
            while (sorted[l] - sorted[k] >= r) ++k;
            count += l - k;
        }
        counts[g] = count;
    }
    return counts;
}

std::vector<double> correlation_sum(std::span<const double> values, std::span<const double> r_grid) {
    const std::size_t n = values.size();
    std::vector<double> c(r_grid.size(), 0.0);
    if (n < 2) return c;
    const auto sorted = sorted_copy(values);
    const auto counts = correlation_pair_counts(sorted, r_grid);
    const double norm = 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
    for (std::size_t g = 0; g < r_grid.size(); ++g) c[g] = norm * static_cast<double>(counts[g]);
    return c;
}

std::vector<double> correlation_sum_reference(std::span<const double> values, std::span<const double> r_grid) {
    const std::size_t n = values.size();
    std::vector<double> c(r_grid.size(), 0.0);
    if (n < 2) return c;
    for (std::size_t g = 0; g < r_grid.size(); ++g) {
        std::uint64_t count = 0;
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t l = k + 1; l < n; ++l) count += std::abs(values[k] - values[l]) < r_grid[g] ? 1 : 0;
        }
        c[g] = 2.0 * static_cast<double>(count) / (static_cast<double>(n) * static_cast<double>(n - 1));
    }
    return c;
}

DimensionEstimate correlation_dimension(std::span<const double> values, std::span<const double> r_grid,
                                        const CorrelationOptions& options) {
    DimensionEstimate est;
    est.method = DimensionMethod::correlation;
    est.points_used = values.size();
    if (values.size() < 2) {
        est.note = "fewer than two points";
        return est;
    }
    const auto sorted = sorted_copy(values);
    if (!(sorted.back() > sorted.front())) {
        est.note = "all points identical";
        return est;
    }
    const std::size_t n = sorted.size();
    const auto counts = correlation_pair_counts(sorted, r_grid);
    const double norm = 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1));

    est.curve.scale.assign(r_grid.begin(), r_grid.end());
    est.curve.value.resize(r_grid.size());
    std::vector<char> valid(r_grid.size(), 0);
    for (std::size_t g = 0; g < r_grid.size(); ++g) {
        const double c = norm * static_cast<double>(counts[g]);
        est.curve.value[g] = c;
        valid[g] = c > 0.0 && static_cast<double>(counts[g]) >= options.min_pairs && c <= options.max_correlation &&
                   r_grid[g] >= options.scale_floor;
    }
    fit_window(est, valid, 1.0, options.fit);
    return est;
}

DimensionEstimate correlation_dimension(const SampleBatch& batch, std::span<const double> r_grid,
                                        CorrelationOptions options) {
    options.scale_floor = std::max(options.scale_floor, kTailFloorFactor * batch.tail_bound);
    return correlation_dimension(batch.values, r_grid, options);
}

std::vector<std::uint64_t> box_counts(std::span<const double> sorted, std::span<const double> delta_grid) {
    std::vector<std::uint64_t> counts(delta_grid.size(), 0);
    if (sorted.empty()) return counts;
    const double origin = sorted.front();
    for (std::size_t g = 0; g < delta_grid.size(); ++g) {
        const double delta = delta_grid[g];
        std::uint64_t count = 0;
        double last_cell = -1.0;
        for (double x : sorted) {
            const double cell = std::floor((x - origin) / delta);
            if (cell != last_cell) {
                ++count;
                last_cell = cell;
            }
        }
        counts[g] = count;
    }
    return counts;
}

DimensionEstimate box_dimension(std::span<const double> points, std::span<const double> delta_grid,
                                const BoxOptions& options) {
    DimensionEstimate est;
    est.method = DimensionMethod::box;
    est.points_used = points.size();
    if (points.empty()) {
        est.note = "no points";
        return est;
    }
    const auto sorted = sorted_copy(points);
    const auto counts = box_counts(sorted, delta_grid);
    est.curve.scale.assign(delta_grid.begin(), delta_grid.end());
    est.curve.value.resize(delta_grid.size());
    for (std::size_t g = 0; g < delta_grid.size(); ++g) est.curve.value[g] = static_cast<double>(counts[g]);

    if (!(sorted.back() > sorted.front())) {
        // One occupied cell at every scale.
        est.value = 0.0;
        est.std_error = 0.0;
        est.r_squared = 1.0;
        est.status = FitStatus::ok;
        est.note = "single point";
        if (!delta_grid.empty()) {
            est.r_min = *std::min_element(delta_grid.begin(), delta_grid.end());
            est.r_max = *std::max_element(delta_grid.begin(), delta_grid.end());
            est.fit_points = delta_grid.size();
        }
        return est;
    }
    const double saturation = static_cast<double>(sorted.size()) / options.min_points_per_box;
    std::vector<char> valid(delta_grid.size(), 0);
    for (std::size_t g = 0; g < delta_grid.size(); ++g) {
        const double c = static_cast<double>(counts[g]);
        valid[g] = c >= options.min_boxes && c <= saturation;
    }
    fit_window(est, valid, -1.0, options.fit);
    return est;
}

Histogram make_histogram(std::span<const double> values, std::size_t bins, double lo, double hi) {
    if (bins == 0) throw std::invalid_argument("make_histogram: need at least one bin");
    if (!(hi > lo)) throw std::invalid_argument("make_histogram: empty range");
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.masses.assign(bins, 0.0);
    std::vector<std::uint64_t> counts(bins, 0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (double x : values) {
        if (x < lo || x > hi) continue;
        auto b = static_cast<std::size_t>((x - lo) / width);
        if (b >= bins) b = bins - 1;
        ++counts[b];
        ++h.points;
    }
    if (h.points > 0) {
        for (std::size_t b = 0; b < bins; ++b) h.masses[b] = static_cast<double>(counts[b]) / static_cast<double>(h.points);
    }
    return h;
}

DensityDiagnostics density_diagnostics(std::span<const double> values, std::size_t bins_coarse,
                                       std::size_t bins_fine, double trim) {
    if (values.empty()) throw std::invalid_argument("density_diagnostics: empty batch");
    if (!(bins_coarse < bins_fine) || bins_coarse == 0) throw std::invalid_argument("density_diagnostics: need 0 < B1 < B2");
    if (!(trim >= 0.0 && trim < 0.5)) throw std::invalid_argument("density_diagnostics: trim must lie in [0, 0.5)");

    const auto sorted = sorted_copy(values);
    const std::size_t n = sorted.size();
    const auto lo_idx = static_cast<std::size_t>(std::floor(trim * static_cast<double>(n - 1)));
    const auto hi_idx = static_cast<std::size_t>(std::ceil((1.0 - trim) * static_cast<double>(n - 1)));
    double lo = sorted[lo_idx];
    double hi = sorted[hi_idx];
    if (!(hi > lo)) {
        // Atom: any unit window around it.
        lo -= 0.5;
        hi += 0.5;
    }

    DensityDiagnostics d;
    d.bins_coarse = bins_coarse;
    d.bins_fine = bins_fine;
    d.range_lo = lo;
    d.range_hi = hi;
    auto l2 = [](const Histogram& h) {
        double s = 0.0;
        for (double m : h.masses) s += m * m;
        return s / h.bin_width();
    };
    const Histogram coarse = make_histogram(sorted, bins_coarse, lo, hi);
    const Histogram fine = make_histogram(sorted, bins_fine, lo, hi);
    d.fraction_in_range = static_cast<double>(coarse.points) / static_cast<double>(n);
    d.l2_coarse = l2(coarse);
    d.l2_fine = l2(fine);
    d.max_mass_coarse = *std::max_element(coarse.masses.begin(), coarse.masses.end());
    d.max_mass_fine = *std::max_element(fine.masses.begin(), fine.masses.end());
    d.ratio = d.l2_fine / d.l2_coarse;
    if (d.ratio <= kAcRatioThreshold) d.flag = AcFlag::absolutely_continuous;
    else if (d.ratio > kSingularRatioThreshold) d.flag = AcFlag::singular;
    else d.flag = AcFlag::indeterminate;
    return d;
}

std::vector<SupportPoint> support_measure(std::span<const double> values, std::span<const double> delta_grid) {
    std::vector<SupportPoint> out;
    out.reserve(delta_grid.size());
    const auto sorted = sorted_copy(values);
    for (double delta : delta_grid) {
        double measure = 0.0;
        if (!sorted.empty()) {
            // Union of equal-length intervals around sorted centres.
            measure = 2.0 * delta;
            for (std::size_t k = 1; k < sorted.size(); ++k) measure += std::min(sorted[k] - sorted[k - 1], 2.0 * delta);
        }
        out.push_back({delta, measure});
    }
    return out;
}

double support_decay_exponent(std::span<const SupportPoint> curve, std::size_t tail_points) {
    std::vector<SupportPoint> pts(curve.begin(), curve.end());
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.delta < b.delta; });
    const std::size_t k = std::min(tail_points, pts.size());
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < k; ++i) {
        if (!(pts[i].delta > 0.0) || !(pts[i].measure > 0.0)) continue;
        xs.push_back(std::log(pts[i].delta));
        ys.push_back(std::log(pts[i].measure));
    }
    return least_squares(xs, ys).slope;
}

TransversalityResult transversality_statistic(const IfsSpec& ifs, const ShiftMeasure& mu, const ErrorDistribution& eta,
                                              std::span<const double> r_grid, std::size_t n_pairs, std::size_t n_y,
                                              RandomStream& rng) {
    if (r_grid.empty()) throw std::invalid_argument("transversality_statistic: empty r grid");
    if (!std::is_sorted(r_grid.begin(), r_grid.end())) throw std::invalid_argument("transversality_statistic: r grid must ascend");
    if (n_pairs == 0 || n_y == 0) throw std::invalid_argument("transversality_statistic: need pairs and error draws");
    const double chi = lyapunov(ifs, mu, eta);

    // Depth from the typical decay rate: neglected terms well below r_min.
    const double tol = 1e-3 * r_grid.front();
    const double rho = std::exp(chi);
    std::size_t depth = 0;
    while (kUncertifiedSafetyFactor * ifs.max_abs_digit() * std::pow(rho, static_cast<double>(depth + 1)) / (1.0 - rho) > tol) {
        if (++depth > kDefaultDepthCap) throw NumericError("transversality_statistic: depth cap reached");
    }

    TransversalityResult out;
    out.r.assign(r_grid.begin(), r_grid.end());
    out.depth = depth;
    out.pairs = n_pairs;
    out.error_draws = n_y;
    const std::size_t terms = depth + 1;

    // Shared error realizations, stored as prefix products y_1...y_k.
    std::vector<double> products(n_y * terms);
    for (std::size_t t = 0; t < n_y; ++t) {
        double p = 1.0;
        products[t * terms] = 1.0;
        for (std::size_t k = 1; k < terms; ++k) {
            p *= eta.sample(rng);
            products[t * terms + k] = p;
        }
    }

    const std::size_t g = r_grid.size();
    std::vector<double> totals(g + 1, 0.0);
    std::map<std::size_t, std::pair<std::size_t, std::vector<double>>> by_prefix;
    std::vector<double> coeff(terms);
    std::vector<std::uint64_t> hits(g + 1);
    Word wi(terms);
    Word wj(terms);
    for (std::size_t p = 0; p < n_pairs; ++p) {
        wi[0] = mu.draw_first(rng);
        wj[0] = wi[0];
        for (std::size_t k = 1; k < terms; ++k) wi[k] = mu.draw_next(wi[k - 1], rng);
        for (std::size_t k = 1; k < terms; ++k) wj[k] = mu.draw_next(wj[k - 1], rng);
        const std::size_t prefix = common_prefix_length(wi, wj);

        // Pi_y(i) - Pi_y(j) = sum_k coeff_k * y_1...y_k.
        double li = 1.0;
        double lj = 1.0;
        for (std::size_t k = 0; k < terms; ++k) {
            coeff[k] = ifs.digit(wi[k]) * li - ifs.digit(wj[k]) * lj;
            li *= ifs.ratio(wi[k]);
            lj *= ifs.ratio(wj[k]);
        }
        std::fill(hits.begin(), hits.end(), 0);
        for (std::size_t t = 0; t < n_y; ++t) {
            const double* y = products.data() + t * terms;
            double diff = 0.0;
            for (std::size_t k = 0; k < terms; ++k) diff += coeff[k] * y[k];
            const double phi = std::abs(diff);
            // First grid index with phi < r.
            const auto idx = static_cast<std::size_t>(std::upper_bound(r_grid.begin(), r_grid.end(), phi) - r_grid.begin());
            ++hits[idx];
        }
        auto& slot = by_prefix[prefix];
        if (slot.second.empty()) slot.second.assign(g, 0.0);
        ++slot.first;
        double cumulative = 0.0;
        for (std::size_t r = 0; r < g; ++r) {
            cumulative += static_cast<double>(hits[r]);
            const double frac = cumulative / static_cast<double>(n_y);
            totals[r] += frac;
            slot.second[r] += frac;
        }
    }
    out.a_hat.resize(g);
    for (std::size_t r = 0; r < g; ++r) out.a_hat[r] = totals[r] / static_cast<double>(n_pairs);
    for (auto& [k, slot] : by_prefix) {
        PrefixBreakdown b{k, slot.first, slot.second};
        for (double& v : b.a_hat) v /= static_cast<double>(slot.first);
        out.by_prefix.push_back(std::move(b));
    }
    return out;
}

} // namespace rifs
