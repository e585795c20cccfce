#include "rifs/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rifs/error.hpp"

namespace rifs {

namespace {

constexpr double kProbTol = 1e-12;

void check_probability_vector(std::span<const double> p, const char* what) {
    if (p.empty()) throw ConfigError(std::string(what) + ": empty probability vector");
    double sum = 0.0;
    for (double v : p) {
        if (!std::isfinite(v) || v < 0.0) throw ConfigError(std::string(what) + ": negative or non-finite probability");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kProbTol) {
        std::ostringstream os;
        os << what << ": probabilities sum to " << sum << ", expected 1";
        throw ConfigError(os.str());
    }
}

std::vector<double> cumulative(std::span<const double> p) {
    std::vector<double> cdf(p.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        cdf[i] = acc;
    }
    return cdf;
}

std::size_t draw_index(std::span<const double> cdf, std::span<const double> probs, double u) {
    for (std::size_t i = 0; i < cdf.size(); ++i) {
        if (u < cdf[i] && probs[i] > 0.0) return i;
    }
    // Rounding left the total slightly below 1; fall back to the last
    // symbol with positive probability.
    for (std::size_t i = probs.size(); i-- > 0;) {
        if (probs[i] > 0.0) return i;
    }
    throw std::logic_error("draw_index: no symbol with positive probability");
}

double plogp_sum(std::span<const double> p) {
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log(v);
    }
    return h;
}

std::vector<double> markov_stationary(const SquareMatrix& p) {
    // Lazy chain (P + I)/2 is aperiodic with the same stationary law.
    const std::size_t m = p.size;
    std::vector<double> pi(m, 1.0 / static_cast<double>(m));
    std::vector<double> next(m);
    for (std::size_t it = 0; it < 1000000; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            next[i] += 0.5 * pi[i];
            for (std::size_t j = 0; j < m; ++j) next[j] += 0.5 * pi[i] * p(i, j);
        }
        const double total = std::accumulate(next.begin(), next.end(), 0.0);
        double diff = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            next[i] /= total;
            diff = std::max(diff, std::abs(next[i] - pi[i]));
        }
        pi.swap(next);
        if (diff < 1e-16) break;
    }
    return pi;
}

} // namespace

SquareMatrix::SquareMatrix(std::size_t n, std::vector<double> values) : size(n), entries(std::move(values)) {
    if (entries.size() != n * n) throw std::invalid_argument("SquareMatrix: entry count is not n*n");
}

SquareMatrix SquareMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    std::vector<double> values;
    values.reserve(n * n);
    for (const auto& row : rows) {
        if (row.size() != n) throw ConfigError("matrix is not square");
        values.insert(values.end(), row.begin(), row.end());
    }
    return SquareMatrix(n, std::move(values));
}

std::vector<std::vector<double>> SquareMatrix::rows() const {
    std::vector<std::vector<double>> out(size);
    for (std::size_t r = 0; r < size; ++r) {
        out[r].assign(entries.begin() + static_cast<std::ptrdiff_t>(r * size),
                      entries.begin() + static_cast<std::ptrdiff_t>((r + 1) * size));
    }
    return out;
}

bool is_irreducible(const SquareMatrix& a) {
    const std::size_t n = a.size;
    if (n == 0) return false;
    for (std::size_t source = 0; source < n; ++source) {
        std::vector<char> seen(n, 0);
        std::vector<std::size_t> stack{source};
        seen[source] = 1;
        std::size_t reached = 1;
        while (!stack.empty()) {
            const std::size_t v = stack.back();
            stack.pop_back();
            for (std::size_t w = 0; w < n; ++w) {
                if (a(v, w) > 0.0 && !seen[w]) {
                    seen[w] = 1;
                    ++reached;
                    stack.push_back(w);
                }
            }
        }
        if (reached != n) return false;
    }
    return true;
}

PerronData perron_frobenius(const SquareMatrix& a, double tol, std::size_t max_iterations) {
    const std::size_t n = a.size;
    auto iterate = [&](bool transpose, std::vector<double>& v, std::size_t& iterations) {
        std::vector<double> next(n);
        v.assign(n, 1.0 / static_cast<double>(n));
        for (iterations = 0; iterations < max_iterations; ++iterations) {
            for (std::size_t i = 0; i < n; ++i) {
                double s = v[i];
                for (std::size_t j = 0; j < n; ++j) s += (transpose ? a(j, i) : a(i, j)) * v[j];
                next[i] = s;
            }
            const double total = std::accumulate(next.begin(), next.end(), 0.0);
            double diff = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                next[i] /= total;
                diff = std::max(diff, std::abs(next[i] - v[i]));
            }
            v.swap(next);
            if (diff < tol) return true;
        }
        return false;
    };

    PerronData out;
    std::size_t it_right = 0;
    std::size_t it_left = 0;
    if (!iterate(false, out.right, it_right) || !iterate(true, out.left, it_left)) {
        throw NumericError("Perron power iteration did not converge");
    }
    out.iterations = std::max(it_right, it_left);

    // Eigenvalue from (A v)_i / v_i weighted by v; exact at the fixed point.
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double av = 0.0;
        for (std::size_t j = 0; j < n; ++j) av += a(i, j) * out.right[j];
        num += av;
        den += out.right[i];
    }
    out.eigenvalue = num / den;
    return out;
}

ShiftMeasure ShiftMeasure::bernoulli(std::vector<double> p) {
    check_probability_vector(p, "bernoulli");
    ShiftMeasure mu;
    mu.m_ = p.size();
    mu.start_ = p;
    mu.trans_.reserve(mu.m_ * mu.m_);
    for (std::size_t i = 0; i < mu.m_; ++i) mu.trans_.insert(mu.trans_.end(), p.begin(), p.end());
    mu.law_ = BernoulliLaw{std::move(p)};
    mu.build_cdfs();
    return mu;
}

ShiftMeasure ShiftMeasure::markov(SquareMatrix transition, std::vector<double> stationary) {
    const std::size_t m = transition.size;
    if (m == 0) throw ConfigError("markov: empty transition matrix");
    for (std::size_t i = 0; i < m; ++i) {
        std::span<const double> row(transition.entries.data() + i * m, m);
        check_probability_vector(row, "markov transition row");
    }
    if (!is_irreducible(transition)) throw ConfigError("markov: transition matrix is reducible (chain not ergodic)");
    if (stationary.empty()) {
        stationary = markov_stationary(transition);
    } else {
        if (stationary.size() != m) throw ConfigError("markov: stationary vector has wrong length");
        check_probability_vector(stationary, "markov stationary");
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) s += stationary[i] * transition(i, j);
            if (std::abs(s - stationary[j]) > kProbTol) throw ConfigError("markov: stationary vector does not satisfy pi P = pi");
        }
    }
    ShiftMeasure mu;
    mu.m_ = m;
    mu.start_ = stationary;
    mu.trans_ = transition.entries;
    mu.law_ = MarkovLaw{std::move(transition), std::move(stationary)};
    mu.build_cdfs();
    return mu;
}

ShiftMeasure ShiftMeasure::max_entropy_sft(SquareMatrix adjacency) {
    const std::size_t m = adjacency.size;
    if (m == 0) throw ConfigError("sft: empty adjacency matrix");
    for (double v : adjacency.entries) {
        if (v != 0.0 && v != 1.0) throw ConfigError("sft: adjacency matrix must be 0/1");
    }
    if (!is_irreducible(adjacency)) throw ConfigError("sft: adjacency matrix is reducible (graph not strongly connected)");

    const PerronData perron = perron_frobenius(adjacency);
    const double lambda = perron.eigenvalue;

    // Parry chain: P_ij = A_ij v_j / (lambda v_i), pi_i proportional to u_i v_i.
    ShiftMeasure mu;
    mu.m_ = m;
    mu.perron_ = lambda;
    mu.trans_.assign(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double w = adjacency(i, j) * perron.right[j] / (lambda * perron.right[i]);
            mu.trans_[i * m + j] = w;
            row += w;
        }
        for (std::size_t j = 0; j < m; ++j) mu.trans_[i * m + j] /= row;
    }
    mu.start_.resize(m);
    double norm = 0.0;
    for (std::size_t i = 0; i < m; ++i) norm += perron.left[i] * perron.right[i];
    for (std::size_t i = 0; i < m; ++i) mu.start_[i] = perron.left[i] * perron.right[i] / norm;
    mu.law_ = MaxEntropySftLaw{std::move(adjacency)};
    mu.build_cdfs();
    return mu;
}

void ShiftMeasure::build_cdfs() {
    start_cdf_ = cumulative(start_);
    trans_cdf_.clear();
    trans_cdf_.reserve(m_ * m_);
    for (std::size_t i = 0; i < m_; ++i) {
        const auto row = cumulative(std::span<const double>(trans_.data() + i * m_, m_));
        trans_cdf_.insert(trans_cdf_.end(), row.begin(), row.end());
    }
}

Symbol ShiftMeasure::draw_first(RandomStream& rng) const {
    return static_cast<Symbol>(draw_index(start_cdf_, start_, rng.uniform()) + 1);
}

Symbol ShiftMeasure::draw_next(Symbol previous, RandomStream& rng) const {
    const std::size_t row = previous - 1;
    const std::span<const double> cdf(trans_cdf_.data() + row * m_, m_);
    const std::span<const double> probs(trans_.data() + row * m_, m_);
    return static_cast<Symbol>(draw_index(cdf, probs, rng.uniform()) + 1);
}

std::string ShiftMeasure::describe() const {
    std::ostringstream os;
    auto list = [&os](std::span<const double> v) {
        os << '(';
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
        os << ')';
    };
    if (const auto* b = std::get_if<BernoulliLaw>(&law_)) {
        os << "bernoulli";
        list(b->p);
    } else if (std::holds_alternative<MarkovLaw>(law_)) {
        os << "markov[m=" << m_ << "]";
    } else {
        os << "sft-parry[m=" << m_ << ",perron=" << perron_ << "]";
    }
    return os.str();
}

double entropy(const ShiftMeasure& mu) {
    return std::visit(
        [&mu](const auto& law) -> double {
            using Law = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<Law, BernoulliLaw>) {
                return plogp_sum(law.p);
            } else if constexpr (std::is_same_v<Law, MarkovLaw>) {
                const std::size_t m = law.transition.size;
                double h = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    h += law.stationary[i] *
                         plogp_sum(std::span<const double>(law.transition.entries.data() + i * m, m));
                }
                return h;
            } else {
                return std::log(mu.perron_eigenvalue());
            }
        },
        mu.law());
}

Word sample_sequence(const ShiftMeasure& mu, std::size_t n, RandomStream& rng) {
    Word w;
    w.reserve(n);
    if (n == 0) return w;
    w.push_back(mu.draw_first(rng));
    while (w.size() < n) w.push_back(mu.draw_next(w.back(), rng));
    return w;
}

double cylinder_measure(const ShiftMeasure& mu, const Word& omega) {
    if (omega.empty()) return 1.0;
    for (Symbol s : omega) {
        if (s < 1 || s > mu.alphabet_size()) throw std::invalid_argument("cylinder_measure: symbol out of range");
    }
    double p = mu.stationary()[omega.front() - 1];
    for (std::size_t k = 1; k < omega.size() && p > 0.0; ++k) p *= mu.transition(omega[k - 1], omega[k]);
    return p;
}

std::size_t common_prefix_length(const Word& a, const Word& b) noexcept {
    const std::size_t n = std::min(a.size(), b.size());
    std::size_t k = 0;
    while (k < n && a[k] == b[k]) ++k;
    return k;
}

Word shift(const Word& w, std::size_t k) {
    if (k >= w.size()) return {};
    return Word(w.begin() + static_cast<std::ptrdiff_t>(k), w.end());
}

} // namespace rifs
