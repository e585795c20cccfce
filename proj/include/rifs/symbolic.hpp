#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rifs/random.hpp"

namespace rifs {

/// Symbols are 1-based: the alphabet is {1, ..., m}.
using Symbol = std::uint32_t;

/// A finite word over {1, ..., m}; the empty word is the full-space cylinder.
using Word = std::vector<Symbol>;

/// Row-major square matrix.
struct SquareMatrix {
    std::size_t size = 0;
    std::vector<double> entries;

    SquareMatrix() = default;
    SquareMatrix(std::size_t n, std::vector<double> values);
    static SquareMatrix from_rows(const std::vector<std::vector<double>>& rows);

    double operator()(std::size_t r, std::size_t c) const { return entries[r * size + c]; }
    double& operator()(std::size_t r, std::size_t c) { return entries[r * size + c]; }
    std::vector<std::vector<double>> rows() const;

    bool operator==(const SquareMatrix&) const = default;
};

struct BernoulliLaw {
    std::vector<double> p;
    bool operator==(const BernoulliLaw&) const = default;
};

struct MarkovLaw {
    SquareMatrix transition;
    std::vector<double> stationary;
    bool operator==(const MarkovLaw&) const = default;
};

/// Measure of maximal entropy on the shift of finite type with the given
/// 0/1 adjacency matrix.
struct MaxEntropySftLaw {
    SquareMatrix adjacency;
    bool operator==(const MaxEntropySftLaw&) const = default;
};

using ShiftLaw = std::variant<BernoulliLaw, MarkovLaw, MaxEntropySftLaw>;

/// An ergodic shift-invariant measure on {1..m}^N.
///
/// Every variant is held internally as a stationary Markov chain (start
/// law + transition matrix); a Bernoulli law is a chain with identical
/// rows, and the max-entropy SFT law is its Parry chain. Immutable after
/// construction and safe to share between threads.
class ShiftMeasure {
public:
    static ShiftMeasure bernoulli(std::vector<double> p);
    /// When `stationary` is empty it is computed from the transition matrix.
    static ShiftMeasure markov(SquareMatrix transition, std::vector<double> stationary = {});
    static ShiftMeasure max_entropy_sft(SquareMatrix adjacency);

    const ShiftLaw& law() const noexcept { return law_; }
    bool is_bernoulli() const noexcept { return std::holds_alternative<BernoulliLaw>(law_); }
    std::size_t alphabet_size() const noexcept { return m_; }

    /// Law of the first symbol (stationary vector), 0-based index.
    std::span<const double> stationary() const noexcept { return start_; }
    /// Transition probability between 1-based symbols.
    double transition(Symbol from, Symbol to) const { return trans_[(from - 1) * m_ + (to - 1)]; }
    /// Perron eigenvalue of the adjacency matrix (SFT only; 0 otherwise).
    double perron_eigenvalue() const noexcept { return perron_; }

    Symbol draw_first(RandomStream& rng) const;
    Symbol draw_next(Symbol previous, RandomStream& rng) const;

    std::string describe() const;

    bool operator==(const ShiftMeasure& other) const { return law_ == other.law_; }

private:
    ShiftMeasure() = default;
    void build_cdfs();

    ShiftLaw law_;
    std::size_t m_ = 0;
    std::vector<double> start_;
    std::vector<double> trans_;
    std::vector<double> start_cdf_;
    std::vector<double> trans_cdf_;
    double perron_ = 0.0;
};

/// Natural-log entropy of the measure.
double entropy(const ShiftMeasure& mu);

/// First n coordinates of a mu-distributed sequence.
Word sample_sequence(const ShiftMeasure& mu, std::size_t n, RandomStream& rng);

/// mu[omega]; zero for words that are inadmissible for the measure.
double cylinder_measure(const ShiftMeasure& mu, const Word& omega);

/// Length of the common initial segment of two words.
std::size_t common_prefix_length(const Word& a, const Word& b) noexcept;

/// Left shift applied k times (drops the first k symbols).
Word shift(const Word& w, std::size_t k);

/// Perron eigen-data of an irreducible nonnegative matrix.
struct PerronData {
    double eigenvalue = 0.0;
    std::vector<double> right;  // A v = lambda v, normalized to sum 1
    std::vector<double> left;   // u A = lambda u, normalized to sum 1
    std::size_t iterations = 0;
};

/// Power iteration on A + I (primitive whenever A is irreducible) with
/// convergence tolerance `tol` on the sup-norm of successive iterates.
PerronData perron_frobenius(const SquareMatrix& a, double tol = 1e-14, std::size_t max_iterations = 200000);

/// True when the directed graph with edges {i -> j : a(i, j) > 0} is
/// strongly connected.
bool is_irreducible(const SquareMatrix& a);

} // namespace rifs
