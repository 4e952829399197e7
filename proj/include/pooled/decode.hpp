#pragma once
// Exhaustive maximum-likelihood decoding over B(pi) and the exact noiseless
// error-probability oracle. Desk scale only: enumeration is guarded.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pooled/errors.hpp"
#include "pooled/infotheory.hpp"
#include "pooled/model.hpp"
#include "pooled/rng.hpp"

namespace pooled {

inline constexpr double kEnumerationGuard = 1e7;

inline void check_enumeration_guard(const LabelCounts& counts) {
    const double log_b = log_multinomial(counts.counts);
    if (log_b > std::log(kEnumerationGuard) + 1e-9)
        throw GuardExceeded("|B(pi)| = exp(" + std::to_string(log_b) + ") exceeds the enumeration guard of 1e7");
}

/// Streams B(pi) in lexicographic order with O(p) state.
class AssignmentEnumerator {
public:
    explicit AssignmentEnumerator(const LabelCounts& counts) {
        check_enumeration_guard(counts);
        for (int t = 0; t < counts.d(); ++t)
            current_.labels.insert(current_.labels.end(), static_cast<std::size_t>(counts.counts[t]), t);
    }

    /// Writes the next sequence into `out`; false once exhausted.
    bool next(LabelAssignment& out) {
        if (done_) return false;
        out = current_;
        done_ = !std::next_permutation(current_.labels.begin(), current_.labels.end());
        return true;
    }

private:
    LabelAssignment current_;
    bool done_ = false;
};

inline std::vector<LabelAssignment> enumerate_B(const LabelCounts& counts) {
    AssignmentEnumerator it(counts);
    std::vector<LabelAssignment> all;
    LabelAssignment b;
    while (it.next(b)) all.push_back(b);
    return all;
}

/// Every member of B(pi) as per-label bitmasks, for p <= 64. Built once and
/// shared by every decode on the same counts.
class CandidateSet {
public:
    static constexpr std::size_t max_population = 64;

    explicit CandidateSet(const LabelCounts& counts) : d_(static_cast<std::size_t>(counts.d())), p_(static_cast<std::size_t>(counts.p)) {
        if (p_ > max_population) throw std::invalid_argument("bitmask candidate set needs p <= 64");
        AssignmentEnumerator it(counts);
        LabelAssignment b;
        while (it.next(b)) {
            const std::size_t base = masks_.size();
            masks_.resize(base + d_, 0);
            for (std::size_t j = 0; j < p_; ++j) masks_[base + static_cast<std::size_t>(b.labels[j])] |= std::uint64_t{1} << j;
        }
    }

    std::size_t size() const noexcept { return d_ == 0 ? 0 : masks_.size() / d_; }
    std::size_t d() const noexcept { return d_; }
    std::size_t p() const noexcept { return p_; }
    std::span<const std::uint64_t> masks(std::size_t c) const {
        return std::span<const std::uint64_t>(masks_).subspan(c * d_, d_);
    }

    LabelAssignment assignment(std::size_t c) const {
        LabelAssignment b;
        b.labels.assign(p_, 0);
        auto m = masks(c);
        for (std::size_t t = 0; t < d_; ++t)
            for (std::size_t j = 0; j < p_; ++j)
                if (m[t] >> j & 1U) b.labels[j] = static_cast<Label>(t);
        return b;
    }

private:
    std::size_t d_;
    std::size_t p_;
    std::vector<std::uint64_t> masks_;
};

inline std::vector<std::uint64_t> row_masks(const TestDesign& design) {
    if (design.p() > 64) throw std::invalid_argument("row bitmasks need p <= 64");
    std::vector<std::uint64_t> out(design.n(), 0);
    for (std::size_t i = 0; i < design.n(); ++i) {
        auto r = design.row(i);
        for (std::size_t j = 0; j < r.size(); ++j)
            if (r[j]) out[i] |= std::uint64_t{1} << j;
    }
    return out;
}

struct DecodeResult {
    LabelAssignment beta_hat;
    std::size_t tie_count = 0;
    double log_likelihood = neg_infinity;
};

namespace detail {

/// log Q(x) = log P[Z > x] for standard normal Z, accurate far into the tail.
inline double log_upper_tail(double x) {
    if (x == std::numeric_limits<double>::infinity()) return neg_infinity;
    if (x < 30.0) return std::log(0.5 * std::erfc(x / std::numbers::sqrt2));
    const double x2 = x * x;
    return -0.5 * x2 - std::log(x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

/// log P[a <= Z < b] for standard normal Z, a < b (either may be infinite).
inline double log_normal_interval(double a, double b) {
    if (a >= 0.0) {
        const double la = log_upper_tail(a);
        return la + std::log1p(-std::exp(log_upper_tail(b) - la));
    }
    if (b <= 0.0) {
        const double lb = log_upper_tail(-b);
        return lb + std::log1p(-std::exp(log_upper_tail(-a) - lb));
    }
    return std::log1p(-(std::exp(log_upper_tail(-a)) + std::exp(log_upper_tail(b))));
}

/// Per-entry log-likelihood of an observed value given the true count.
class EntryLikelihood {
public:
    EntryLikelihood(const NoiseModel& noise, std::size_t p) : noise_(noise), p_(static_cast<double>(p)) {
        validate_noise(noise);
        if (const auto* g = std::get_if<Gaussian>(&noise)) var_ = p_ * g->sigma2;
        if (const auto* c = std::get_if<ClippedGaussian>(&noise)) var_ = p_ * c->sigma2;
        sd_ = std::sqrt(var_);
    }

    double operator()(double y, Count n) const {
        const double mean = static_cast<double>(n);
        if (std::holds_alternative<Noiseless>(noise_)) return y == mean ? 0.0 : neg_infinity;
        if (std::holds_alternative<Gaussian>(noise_)) {
            const double z = y - mean;
            return -z * z / (2.0 * var_);
        }
        // Rounding cell of y after clipping to {0, ..., p}.
        const double inf = std::numeric_limits<double>::infinity();
        const double lo = y <= 0.0 ? -inf : y - 0.5;
        const double hi = y >= p_ ? inf : y + 0.5;
        return log_normal_interval((lo - mean) / sd_, (hi - mean) / sd_);
    }

private:
    NoiseModel noise_;
    double p_;
    double var_ = 0.0;
    double sd_ = 0.0;
};

/// Keeps a uniformly random member of the running argmax set.
class TieReservoir {
public:
    explicit TieReservoir(Seed seed) : gen_(make_engine(seed)) {}

    /// True when the candidate with this score should become the current pick.
    bool offer(double score) {
        if (score == neg_infinity) return false;
        if (score > best_) {
            best_ = score;
            ties_ = 1;
            return true;
        }
        if (score == best_) {
            ++ties_;
            return uniform_below(gen_, ties_) == 0;
        }
        return false;
    }

    std::size_t ties() const noexcept { return ties_; }
    double best() const noexcept { return best_; }

private:
    Engine gen_;
    double best_ = neg_infinity;
    std::size_t ties_ = 0;
};

}  // namespace detail

/// ML decode against a prebuilt candidate set (p <= 64). Ties are broken
/// uniformly at random with `tie_seed`.
inline DecodeResult ml_decode(const ObservationMatrix& y, const TestDesign& design, const CandidateSet& candidates,
                              const NoiseModel& noise, Seed tie_seed) {
    if (y.n != design.n() || y.d != candidates.d() || design.p() != candidates.p())
        throw std::invalid_argument("observation, design and candidate dimensions disagree");
    const auto rows = row_masks(design);
    const detail::EntryLikelihood lik(noise, design.p());
    const bool exact = is_noiseless(noise);

    detail::TieReservoir ties(tie_seed);
    std::size_t pick = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const auto m = candidates.masks(c);
        double score = 0.0;
        for (std::size_t i = 0; i < rows.size() && score != neg_infinity; ++i) {
            for (std::size_t t = 0; t < y.d; ++t) {
                const auto n = static_cast<Count>(std::popcount(rows[i] & m[t]));
                if (exact) {
                    if (y.values[i * y.d + t] != static_cast<double>(n)) {
                        score = neg_infinity;
                        break;
                    }
                } else {
                    score += lik(y.values[i * y.d + t], n);
                }
            }
        }
        if (ties.offer(score)) pick = c;
    }
    if (ties.ties() == 0) throw DecodeError("no candidate in B(pi) is consistent with the observations");
    return DecodeResult{candidates.assignment(pick), ties.ties(), ties.best()};
}

/// ML decode by streaming enumeration; uses the bitmask path when p <= 64.
inline DecodeResult ml_decode(const ObservationMatrix& y, const TestDesign& design, const LabelCounts& counts,
                              const NoiseModel& noise, Seed tie_seed) {
    if (design.p() <= CandidateSet::max_population)
        return ml_decode(y, design, CandidateSet(counts), noise, tie_seed);

    const detail::EntryLikelihood lik(noise, design.p());
    detail::TieReservoir ties(tie_seed);
    AssignmentEnumerator it(counts);
    LabelAssignment b, best;
    while (it.next(b)) {
        double score = 0.0;
        for (std::size_t i = 0; i < design.n() && score != neg_infinity; ++i) {
            const auto n = count_labels(b, design.row(i), counts.d());
            for (std::size_t t = 0; t < n.size(); ++t) score += lik(y.at(i, t), n[t]);
        }
        if (ties.offer(score)) best = b;
    }
    if (ties.ties() == 0) throw DecodeError("no candidate in B(pi) is consistent with the observations");
    return DecodeResult{std::move(best), ties.ties(), ties.best()};
}

inline std::size_t hamming_distance(const LabelAssignment& a, const LabelAssignment& b) {
    if (a.size() != b.size()) throw std::invalid_argument("label vectors differ in length");
    std::size_t dist = 0;
    for (std::size_t j = 0; j < a.size(); ++j) dist += a.labels[j] != b.labels[j];
    return dist;
}

/// Success under the approximate criterion: at most qmax mislabelled items.
inline bool approx_success(const LabelAssignment& beta_hat, const LabelAssignment& beta, Count qmax) {
    return static_cast<Count>(hamming_distance(beta_hat, beta)) <= qmax;
}

/// Every item gets the most common label (lowest index on ties); needs no tests.
inline LabelAssignment majority_label_decode(const LabelCounts& counts) {
    const auto top = std::max_element(counts.counts.begin(), counts.counts.end()) - counts.counts.begin();
    return LabelAssignment{std::vector<Label>(static_cast<std::size_t>(counts.p), static_cast<Label>(top))};
}

struct OracleResult {
    double pe_exact = 0.0;
    double pe_unique = 0.0;  // P[the observation does not pin beta down]
    std::size_t candidates_total = 0;
    std::size_t classes = 0;
};

/// Exact P_e of noiseless ML with uniform tie-breaking on a fixed design,
/// averaged over beta ~ Uniform(B(pi)).
inline OracleResult exact_pe_oracle(const TestDesign& design, const LabelCounts& counts, Count qmax) {
    if (design.p() != static_cast<std::size_t>(counts.p)) throw std::invalid_argument("design width must equal p");
    std::map<std::vector<Count>, std::vector<std::size_t>> classes;
    std::vector<LabelAssignment> members;
    AssignmentEnumerator it(counts);
    LabelAssignment b;
    std::vector<Count> key;
    while (it.next(b)) {
        key.clear();
        for (std::size_t i = 0; i < design.n(); ++i) {
            const auto n = count_labels(b, design.row(i), counts.d());
            key.insert(key.end(), n.begin(), n.end());
        }
        classes[key].push_back(members.size());
        if (qmax > 0) members.push_back(b);
        else members.emplace_back();
    }

    OracleResult out;
    out.candidates_total = members.size();
    out.classes = classes.size();
    const auto total = static_cast<double>(members.size());
    double success = 0.0;
    double ambiguous = 0.0;
    for (const auto& [k, ids] : classes) {
        const auto s = static_cast<double>(ids.size());
        if (ids.size() > 1) ambiguous += s;
        if (qmax == 0) {
            success += 1.0;  // (s / |B|) * (1 / s) summed without the division
            continue;
        }
        // Uniform truth and uniform pick within the class: average pairwise success.
        double within = 0.0;
        for (auto a : ids)
            for (auto c : ids) within += approx_success(members[a], members[c], qmax) ? 1.0 : 0.0;
        success += within / s;
    }
    out.pe_exact = std::clamp(1.0 - success / total, 0.0, 1.0);
    out.pe_unique = ambiguous / total;
    return out;
}

}  // namespace pooled
