#pragma once
// Generative model of the pooled data problem: label proportions, uniformly
// random label sequences with fixed empirical counts, non-adaptive test
// designs, and the observation channels acting on per-test label counts.
//
// Labels are 0-based in code (0..d-1). The CLI prints them 1-based.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pooled/rng.hpp"

namespace pooled {

using Label = int;
using Count = std::int64_t;

/// Label proportion vector pi on d >= 2 labels.
class Proportions {
public:
    static constexpr double sum_tolerance = 1e-9;

    explicit Proportions(std::vector<double> pi) : pi_(std::move(pi)) {
        if (pi_.size() < 2) throw std::invalid_argument("proportions need at least 2 labels");
        double total = 0.0;
        for (double v : pi_) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::invalid_argument("proportions must be strictly positive");
            total += v;
        }
        if (std::abs(total - 1.0) > sum_tolerance)
            throw std::invalid_argument("proportions must sum to 1 (got " + std::to_string(total) + ")");
    }

    static Proportions uniform(int d) {
        if (d < 2) throw std::invalid_argument("uniform proportions need d >= 2");
        return Proportions(std::vector<double>(static_cast<std::size_t>(d), 1.0 / d));
    }

    int d() const noexcept { return static_cast<int>(pi_.size()); }
    double operator[](std::size_t t) const { return pi_[t]; }
    std::span<const double> values() const noexcept { return pi_; }

private:
    std::vector<double> pi_;
};

/// Items per label for a population of size p; counts sum to p.
struct LabelCounts {
    Count p = 0;
    std::vector<Count> counts;

    int d() const noexcept { return static_cast<int>(counts.size()); }

    static LabelCounts from_counts(std::vector<Count> counts) {
        LabelCounts out;
        for (Count c : counts) {
            if (c < 0) throw std::invalid_argument("label counts must be nonnegative");
            out.p += c;
        }
        out.counts = std::move(counts);
        return out;
    }

    bool operator==(const LabelCounts&) const = default;
};

/// Length-p label vector beta.
struct LabelAssignment {
    std::vector<Label> labels;

    std::size_t size() const noexcept { return labels.size(); }
    bool operator==(const LabelAssignment&) const = default;
};

/// Largest-remainder rounding of pi * p; ties go to the lowest label index.
inline LabelCounts round_proportions(const Proportions& pi, Count p) {
    const int d = pi.d();
    if (p < d) throw std::invalid_argument("population size p must be at least the number of labels d");

    std::vector<Count> counts(static_cast<std::size_t>(d));
    std::vector<double> remainder(static_cast<std::size_t>(d));
    Count assigned = 0;
    for (int t = 0; t < d; ++t) {
        const double scaled = pi[t] * static_cast<double>(p);
        double whole = std::floor(scaled);
        double frac = scaled - whole;
        // Snap floating noise so exact halves tie as intended.
        frac = std::round(frac * 1e9) / 1e9;
        if (frac >= 1.0) {
            whole += 1.0;
            frac = 0.0;
        }
        counts[t] = static_cast<Count>(whole);
        remainder[t] = frac;
        assigned += counts[t];
    }

    std::vector<int> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return remainder[a] > remainder[b]; });

    Count deficit = p - assigned;
    // deficit can be slightly negative only if the sum of pi is above 1 within tolerance.
    for (std::size_t k = 0; deficit > 0; k = (k + 1) % order.size(), --deficit) ++counts[order[k]];
    for (std::size_t k = order.size(); deficit < 0; --deficit) {
        k = (k == 0 ? order.size() : k) - 1;
        while (counts[order[k]] == 0) k = (k == 0 ? order.size() : k) - 1;
        --counts[order[k]];
    }
    return LabelCounts{p, std::move(counts)};
}

/// Uniform draw from B(pi): the label multiset shuffled by Fisher-Yates.
inline LabelAssignment sample_beta(const LabelCounts& counts, Seed seed) {
    LabelAssignment beta;
    beta.labels.reserve(static_cast<std::size_t>(counts.p));
    for (int t = 0; t < counts.d(); ++t)
        beta.labels.insert(beta.labels.end(), static_cast<std::size_t>(counts.counts[t]), t);

    Engine gen = make_engine(seed);
    for (std::size_t i = beta.labels.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(gen, i));
        std::swap(beta.labels[i - 1], beta.labels[j]);
    }
    return beta;
}

struct BernoulliProvenance {
    double q;
    Seed seed;
};
struct ExplicitProvenance {};

/// n x p binary measurement matrix, stored row-major.
class TestDesign {
public:
    TestDesign() = default;

    TestDesign(std::size_t p, std::vector<std::vector<std::uint8_t>> rows)
        : p_(p), n_(rows.size()), provenance_(ExplicitProvenance{}) {
        entries_.reserve(n_ * p_);
        for (const auto& row : rows) {
            if (row.size() != p_) throw std::invalid_argument("design row length must equal p");
            for (auto v : row) {
                if (v > 1) throw std::invalid_argument("design entries must be 0 or 1");
                entries_.push_back(v);
            }
        }
    }

    TestDesign(std::size_t n, std::size_t p, std::vector<std::uint8_t> entries,
               std::variant<BernoulliProvenance, ExplicitProvenance> provenance)
        : p_(p), n_(n), entries_(std::move(entries)), provenance_(provenance) {
        if (entries_.size() != n * p) throw std::invalid_argument("design entry count must be n * p");
    }

    std::size_t n() const noexcept { return n_; }
    std::size_t p() const noexcept { return p_; }

    std::span<const std::uint8_t> row(std::size_t i) const {
        return std::span<const std::uint8_t>(entries_).subspan(i * p_, p_);
    }

    std::size_t popcount(std::size_t i) const {
        auto r = row(i);
        return static_cast<std::size_t>(std::count(r.begin(), r.end(), std::uint8_t{1}));
    }

    const std::variant<BernoulliProvenance, ExplicitProvenance>& provenance() const noexcept {
        return provenance_;
    }

    /// Copy with one more row appended.
    TestDesign with_row(std::span<const std::uint8_t> extra) const {
        if (extra.size() != p_) throw std::invalid_argument("design row length must equal p");
        std::vector<std::uint8_t> e = entries_;
        e.insert(e.end(), extra.begin(), extra.end());
        return TestDesign(n_ + 1, p_, std::move(e), ExplicitProvenance{});
    }

private:
    std::size_t p_ = 0;
    std::size_t n_ = 0;
    std::vector<std::uint8_t> entries_;
    std::variant<BernoulliProvenance, ExplicitProvenance> provenance_ = ExplicitProvenance{};
};

inline TestDesign bernoulli_design(std::size_t n, std::size_t p, double q, Seed seed) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("Bernoulli design needs q in (0, 1)");
    Engine gen = make_engine(seed);
    std::vector<std::uint8_t> entries(n * p);
    for (auto& e : entries) e = bernoulli(gen, q) ? 1 : 0;
    return TestDesign(n, p, std::move(entries), BernoulliProvenance{q, seed});
}

/// N_t(beta, row) for every label t, given d.
inline std::vector<Count> count_labels(const LabelAssignment& beta, std::span<const std::uint8_t> row, int d) {
    if (beta.size() != row.size()) throw std::invalid_argument("label vector and test row lengths differ");
    std::vector<Count> counts(static_cast<std::size_t>(d), 0);
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j]) {
            const Label t = beta.labels[j];
            if (t < 0 || t >= d) throw std::invalid_argument("label out of range");
            ++counts[static_cast<std::size_t>(t)];
        }
    }
    return counts;
}

struct Noiseless {};
/// Y = N + Z with Z ~ N(0, p * sigma2) per entry.
struct Gaussian {
    double sigma2;
};
/// Gaussian result rounded half away from zero, then clipped to {0, ..., p}.
struct ClippedGaussian {
    double sigma2;
};
using NoiseModel = std::variant<Noiseless, Gaussian, ClippedGaussian>;

inline void validate_noise(const NoiseModel& noise) {
    std::visit(
        [](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (!std::is_same_v<M, Noiseless>) {
                if (!(m.sigma2 > 0.0) || !std::isfinite(m.sigma2))
                    throw std::invalid_argument("noise variance sigma2 must be positive");
            }
        },
        noise);
}

inline bool is_noiseless(const NoiseModel& noise) { return std::holds_alternative<Noiseless>(noise); }

/// Outcome matrix Y (n x d). Integral for Noiseless and ClippedGaussian.
struct ObservationMatrix {
    std::size_t n = 0;
    std::size_t d = 0;
    bool integral = true;
    std::vector<double> values;

    double at(std::size_t i, std::size_t t) const { return values[i * d + t]; }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(values).subspan(i * d, d);
    }
};

inline ObservationMatrix observe(const LabelAssignment& beta, const TestDesign& design, int d,
                                 const NoiseModel& noise, Seed seed) {
    validate_noise(noise);
    if (beta.size() != design.p()) throw std::invalid_argument("label vector length must equal design width p");

    ObservationMatrix y;
    y.n = design.n();
    y.d = static_cast<std::size_t>(d);
    y.integral = !std::holds_alternative<Gaussian>(noise);
    y.values.reserve(y.n * y.d);

    const double p = static_cast<double>(design.p());
    Engine gen = make_engine(seed);
    for (std::size_t i = 0; i < design.n(); ++i) {
        const auto counts = count_labels(beta, design.row(i), d);
        for (Count c : counts) {
            double v = static_cast<double>(c);
            if (const auto* g = std::get_if<Gaussian>(&noise)) {
                v += std::sqrt(p * g->sigma2) * standard_normal(gen);
            } else if (const auto* cg = std::get_if<ClippedGaussian>(&noise)) {
                v += std::sqrt(p * cg->sigma2) * standard_normal(gen);
                v = std::clamp(std::round(v), 0.0, p);
            }
            y.values.push_back(v);
        }
    }
    return y;
}

}  // namespace pooled
