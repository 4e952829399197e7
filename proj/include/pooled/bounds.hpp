#pragma once
// Threshold and converse-bound formulas for the pooled data problem,
// evaluated at finite p. Asymptotic (1 +- o(1)) and eta slack is dropped:
// each report carries the leading-order value and says what was dropped.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pooled/infotheory.hpp"
#include "pooled/model.hpp"

namespace pooled {

enum class BoundStatus {
    ok,
    vacuous,           // negative numerator, clamped to 0
    regime_violation,  // inputs outside the formula's validity region
};

inline const char* to_string(BoundStatus s) {
    switch (s) {
        case BoundStatus::ok: return "ok";
        case BoundStatus::vacuous: return "vacuous";
        case BoundStatus::regime_violation: return "regime_violation";
    }
    return "unknown";
}

struct BoundReport {
    std::string name;
    double n_bound = 0.0;
    std::vector<int> argmax;  // r, a 1-based label subset G, or ell_1, depending on the bound
    std::string regime_note;
    std::vector<std::pair<std::string, double>> inputs;
    BoundStatus status = BoundStatus::ok;
    std::vector<std::pair<std::string, double>> details;

    std::optional<double> detail(const std::string& key) const {
        for (const auto& [k, v] : details)
            if (k == key) return v;
        return std::nullopt;
    }
};

inline constexpr const char* kLeadingOrderNote =
    "leading-order value; (1 - eta) and o(1) slack terms omitted";

/// pi^(r): the largest d-r+1 entries merged into one, then the smallest r-1.
struct PiReduced {
    int r = 0;
    std::vector<double> entries;
};

inline PiReduced pi_reduced(const Proportions& pi, int r) {
    const int d = pi.d();
    if (r < 1 || r > d - 1) throw std::invalid_argument("r must lie in {1, ..., d-1}");
    std::vector<int> order(static_cast<std::size_t>(d));
    for (int t = 0; t < d; ++t) order[t] = t;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return pi[a] > pi[b]; });

    PiReduced out{r, {}};
    const int merged = d - r + 1;
    double head = 0.0;
    for (int k = 0; k < merged; ++k) head += pi[order[k]];
    out.entries.push_back(head);
    for (int k = merged; k < d; ++k) out.entries.push_back(pi[order[k]]);
    return out;
}

/// 2 (H(pi) - H(pi^(r))) / (d - r), in nats. The max over r is left to callers.
inline double f_ratio(const Proportions& pi, int r) {
    const auto red = pi_reduced(pi, r);
    return 2.0 * (shannon_entropy(pi) - shannon_entropy(red.entries)) / static_cast<double>(pi.d() - r);
}

namespace detail {

struct ThresholdScan {
    double value = 0.0;
    int r = 1;
};

/// max_r 2 (p H(pi) - p H(pi^(r)) - log_ball) / (d - r) / log p, first maximiser wins.
inline ThresholdScan threshold_scan(const Proportions& pi, Count p, double log_ball) {
    const double pd = static_cast<double>(p);
    const double h = shannon_entropy(pi);
    ThresholdScan best{-std::numeric_limits<double>::infinity(), 1};
    for (int r = 1; r <= pi.d() - 1; ++r) {
        const double hr = shannon_entropy(pi_reduced(pi, r).entries);
        const double v = 2.0 * (pd * (h - hr) - log_ball) / static_cast<double>(pi.d() - r) / std::log(pd);
        if (v > best.value) best = {v, r};
    }
    return best;
}

inline std::vector<std::pair<std::string, double>> pi_inputs(const Proportions& pi) {
    std::vector<std::pair<std::string, double>> in;
    for (int t = 0; t < pi.d(); ++t) in.emplace_back("pi_" + std::to_string(t + 1), pi[t]);
    return in;
}

}  // namespace detail

/// n* = (p / log p) max_r f(r). Achievability and converse share this value.
inline BoundReport noiseless_threshold(const Proportions& pi, Count p) {
    if (p < 3) throw std::invalid_argument("noiseless threshold needs p >= 3");
    const auto scan = detail::threshold_scan(pi, p, 0.0);
    BoundReport rep;
    rep.name = "noiseless_threshold";
    rep.n_bound = scan.value;
    rep.argmax = {scan.r};
    rep.regime_note = std::string(kLeadingOrderNote) + "; the same n* is sufficient with Bernoulli designs";
    rep.inputs = detail::pi_inputs(pi);
    rep.inputs.emplace_back("p", static_cast<double>(p));
    rep.details.emplace_back("max_f_r", scan.value * std::log(static_cast<double>(p)) / static_cast<double>(p));
    return rep;
}

/// Finite-p lower bound on P_e from counting typical outcomes:
/// 1 - (2 sqrt(p log p) + 1)^{n(d-1)} / |B(pi)| - 2nd/p^2, clamped to [0, 1].
inline double counting_pe_lower(const LabelCounts& counts, Count n) {
    if (n < 0) throw std::invalid_argument("number of tests must be nonnegative");
    const double p = static_cast<double>(counts.p);
    const double d = static_cast<double>(counts.d());
    const double log_b = log_multinomial(counts.counts);
    double typical = 0.0;  // log |Y_A|
    if (n > 0 && counts.p > 1)
        typical = static_cast<double>(n) * (d - 1.0) * std::log(2.0 * std::sqrt(p * std::log(p)) + 1.0);
    const double bound = 1.0 - std::exp(typical - log_b) - 2.0 * static_cast<double>(n) * d / (p * p);
    return std::clamp(bound, 0.0, 1.0);
}

/// (log_cand (1 - delta) - log 2) / mi_per_test, clamped at 0.
inline BoundReport fano_bound(double log_cand, double mi_per_test, double delta) {
    if (!(mi_per_test > 0.0)) throw std::invalid_argument("per-test mutual information must be positive");
    if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in [0, 1)");
    BoundReport rep;
    rep.name = "fano";
    const double numer = log_cand * (1.0 - delta) - std::numbers::ln2;
    rep.n_bound = std::max(0.0, numer / mi_per_test);
    if (numer < 0.0 || delta >= 1.0) rep.status = BoundStatus::vacuous;
    rep.regime_note = "exact Fano form for the given candidate count and per-test information";
    rep.inputs = {{"log_candidates", log_cand}, {"mi_per_test", mi_per_test}, {"delta", delta}};
    return rep;
}

/// Noiseless I(X_0; Y | X_1) for an i.i.d. Bernoulli(q) test: sum_t H(Binomial(ell_t, q)).
/// Row popcount is random under Bernoulli designs, so no coordinate of Y is
/// redundant and all d terms count.
inline double mi_noiseless_bernoulli(const GeniePattern& pattern, double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
    double mi = 0.0;
    for (Count l : pattern.ell())
        if (l > 0) mi += pmf_entropy(binomial_pmf(l, q));
    return mi;
}

/// Same quantity under Y_t = N_t + N(0, p sigma2), by quadrature per label.
inline double mi_gaussian_bernoulli(const GeniePattern& pattern, double q, double sigma2, Count p) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
    if (p < 1) throw std::invalid_argument("p must be positive");
    const double noise_var = static_cast<double>(p) * sigma2;
    double mi = 0.0;
    for (Count l : pattern.ell())
        if (l > 0) mi += gaussian_mixture_information(binomial_pmf(l, q), noise_var);
    return mi;
}

/// n >= (p / log(p q (1-q))) max_r f(r) (1 - delta).
inline BoundReport bernoulli_noiseless_bound(const Proportions& pi, Count p, double q, double delta) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
    BoundReport rep;
    rep.name = "bernoulli_noiseless";
    rep.regime_note = std::string(kLeadingOrderNote) + "; requires q and 1-q to be omega(1/p)";
    rep.inputs = detail::pi_inputs(pi);
    rep.inputs.insert(rep.inputs.end(), {{"p", static_cast<double>(p)}, {"q", q}, {"delta", delta}});
    const double pd = static_cast<double>(p);
    const double eff = pd * q * (1.0 - q);
    if (!(eff > 1.0)) {
        rep.status = BoundStatus::regime_violation;
        rep.regime_note = "p q (1-q) <= 1: formula regime violated";
        return rep;
    }
    double best = -1.0;
    int best_r = 1;
    for (int r = 1; r <= pi.d() - 1; ++r) {
        const double f = f_ratio(pi, r);
        if (f > best) best = f, best_r = r;
    }
    rep.n_bound = std::max(0.0, pd / std::log(eff) * best * (1.0 - delta));
    rep.argmax = {best_r};
    return rep;
}

/// A label subset G (|G| >= 2) and the restricted problem it induces.
struct SubsetRestriction {
    std::vector<int> labels;  // 0-based
    double p_G = 0.0;         // p * sum_{t in G} pi_t
    std::vector<double> pi_G;
};

inline SubsetRestriction restrict_to(const Proportions& pi, Count p, std::uint32_t mask) {
    SubsetRestriction g;
    double mass = 0.0;
    for (int t = 0; t < pi.d(); ++t)
        if (mask & (1u << t)) g.labels.push_back(t), mass += pi[t];
    if (g.labels.size() < 2) throw std::invalid_argument("subset restriction needs |G| >= 2");
    g.p_G = static_cast<double>(p) * mass;
    for (int t : g.labels) g.pi_G.push_back(pi[t] / mass);
    return g;
}

/// n >= max_G p_G H(pi_G) / sum_{t in G} 1/2 log(1 + pi_t / (4 sigma2)) (1 - delta).
inline BoundReport gaussian_subset_bound(const Proportions& pi, Count p, double sigma2, double delta) {
    if (pi.d() > 20) throw std::invalid_argument("subset scan is limited to d <= 20");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
    const std::uint32_t full = (1u << pi.d());
    double best = -1.0;
    std::uint32_t best_mask = 0;
    // Masks ascend, so ties resolve to the smallest mask.
    for (std::uint32_t mask = 0; mask < full; ++mask) {
        if (std::popcount(mask) < 2) continue;
        const auto g = restrict_to(pi, p, mask);
        double denom = 0.0;
        for (int t : g.labels) denom += 0.5 * std::log1p(pi[t] / (4.0 * sigma2));
        const double v = g.p_G * shannon_entropy(g.pi_G) / denom;
        if (v > best) best = v, best_mask = mask;
    }
    BoundReport rep;
    rep.name = "gaussian_subset";
    rep.n_bound = std::max(0.0, best * (1.0 - delta));
    for (int t = 0; t < pi.d(); ++t)
        if (best_mask & (1u << t)) rep.argmax.push_back(t + 1);
    rep.regime_note = std::string(kLeadingOrderNote) + "; Gaussian noise N(0, p sigma2)";
    rep.inputs = detail::pi_inputs(pi);
    rep.inputs.insert(rep.inputs.end(), {{"p", static_cast<double>(p)}, {"sigma2", sigma2}, {"delta", delta}});
    return rep;
}

/// n >= 4 p sigma2 log p (1 - delta): the cost of locating a single item.
/// `largest_count` (items of the label kept fully unknown) enables the exact
/// finite-p Fano form (log(k + 1)(1 - delta) - log 2) * 4 p sigma2.
inline BoundReport gaussian_single_item_bound(Count p, double sigma2, double delta,
                                              std::optional<Count> largest_count = std::nullopt) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
    if (p < 2) throw std::invalid_argument("p must be at least 2");
    const double pd = static_cast<double>(p);
    BoundReport rep;
    rep.name = "gaussian_single_item";
    rep.n_bound = std::max(0.0, 4.0 * pd * sigma2 * std::log(pd) * (1.0 - delta));
    rep.regime_note = std::string(kLeadingOrderNote) + "; log(p pi_1 + 1) replaced by log p";
    rep.inputs = {{"p", pd}, {"sigma2", sigma2}, {"delta", delta}};
    if (largest_count) {
        const double numer = std::log(static_cast<double>(*largest_count) + 1.0) * (1.0 - delta) - std::numbers::ln2;
        rep.details.emplace_back("fano_exact", std::max(0.0, numer * 4.0 * pd * sigma2));
        rep.inputs.emplace_back("largest_count", static_cast<double>(*largest_count));
    }
    return rep;
}

struct NoiselessVariant {};
struct FanoVariant {
    double mi_per_test;
};
using ApproxVariant = std::variant<NoiselessVariant, FanoVariant>;

/// Approximate recovery within Hamming distance qmax. The noiseless variant
/// subtracts the Hamming-ball term from the counting argument; the Fano
/// variant subtracts it from log |B(pi)| inside the Fano numerator.
inline BoundReport approx_recovery_threshold(const Proportions& pi, Count p, Count qmax, double delta,
                                             const ApproxVariant& variant) {
    if (p < 3) throw std::invalid_argument("approximate recovery threshold needs p >= 3");
    const double ball = log_hamming_ball(p, pi.d(), qmax);
    BoundReport rep;
    rep.inputs = detail::pi_inputs(pi);
    rep.inputs.insert(rep.inputs.end(), {{"p", static_cast<double>(p)}, {"qmax", static_cast<double>(qmax)}});
    rep.details.emplace_back("log_hamming_ball", ball);

    if (std::holds_alternative<NoiselessVariant>(variant)) {
        const auto scan = detail::threshold_scan(pi, p, ball);
        rep.name = "approx_recovery_noiseless";
        rep.n_bound = std::max(0.0, scan.value);
        if (scan.value <= 0.0) rep.status = BoundStatus::vacuous;
        rep.argmax = {scan.r};
        rep.regime_note = kLeadingOrderNote;
        return rep;
    }
    const double mi = std::get<FanoVariant>(variant).mi_per_test;
    const double log_b = log_multinomial(round_proportions(pi, p).counts);
    auto fano = fano_bound(log_b - ball, mi, delta);
    rep.name = "approx_recovery_fano";
    rep.n_bound = fano.n_bound;
    rep.status = fano.status;
    rep.regime_note = "Fano form with the Hamming-ball term subtracted from log |B(pi)|";
    rep.inputs.insert(rep.inputs.end(), {{"delta", delta}, {"mi_per_test", mi}});
    return rep;
}

/// n >= max_{ell_1} (log C(p-k+ell_1, ell_1)(1 - delta) - log 2) / I(ell_1).
inline BoundReport group_testing_bound(Count p, Count k, double delta,
                                       const std::function<double(Count)>& channel_mi) {
    if (k < 1 || k > p) throw std::invalid_argument("group testing needs 1 <= k <= p");
    BoundReport rep;
    rep.name = "group_testing";
    double best = -std::numeric_limits<double>::infinity();
    Count best_l = 1;
    for (Count l = 1; l <= k; ++l) {
        const double mi = channel_mi(l);
        if (!(mi > 0.0)) throw std::invalid_argument("channel mutual information must be positive");
        const double v = (log_binomial(p - k + l, l) * (1.0 - delta) - std::numbers::ln2) / mi;
        if (v >= best) best = v, best_l = l;
    }
    rep.n_bound = std::max(0.0, best);
    if (best < 0.0) rep.status = BoundStatus::vacuous;
    rep.argmax = {static_cast<int>(best_l)};
    rep.regime_note = "exact maximum over ell_1 in {1, ..., k}";
    rep.inputs = {{"p", static_cast<double>(p)}, {"k", static_cast<double>(k)}, {"delta", delta}};
    return rep;
}

/// Fano bound with Bernoulli(q) tests, scanning patterns where each ell_t is
/// 0 or counts[t] (at least two labels unknown). Noiseless when sigma2 is empty.
inline BoundReport bernoulli_fano_scan(const LabelCounts& counts, double q, double delta,
                                       std::optional<double> sigma2 = std::nullopt) {
    const int d = counts.d();
    if (d > 20) throw std::invalid_argument("pattern scan is limited to d <= 20");
    BoundReport best;
    best.n_bound = -1.0;
    for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
        std::vector<Count> ell(static_cast<std::size_t>(d), 0);
        for (int t = 0; t < d; ++t)
            if (mask & (1u << t)) ell[t] = counts.counts[t];
        GeniePattern pattern(ell, counts);
        if (pattern.support_size() < 2) continue;
        const double mi = sigma2 ? mi_gaussian_bernoulli(pattern, q, *sigma2, counts.p)
                                 : mi_noiseless_bernoulli(pattern, q);
        if (!(mi > 0.0)) continue;
        auto rep = fano_bound(log_B_ell(pattern), mi, delta);
        if (rep.n_bound > best.n_bound) {
            best = rep;
            best.argmax.clear();
            for (int t = 0; t < d; ++t)
                if (mask & (1u << t)) best.argmax.push_back(t + 1);
        }
    }
    best.n_bound = std::max(0.0, best.n_bound);
    best.name = sigma2 ? "bernoulli_fano_gaussian" : "bernoulli_fano_noiseless";
    best.regime_note = "exact Fano form with exact per-test information, ell_t in {0, count_t}";
    best.inputs = {{"p", static_cast<double>(counts.p)}, {"q", q}, {"delta", delta}};
    if (sigma2) best.inputs.emplace_back("sigma2", *sigma2);
    return best;
}

}  // namespace pooled
