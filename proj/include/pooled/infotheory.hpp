#pragma once
// Exact combinatorics and entropy primitives. Everything is in nats and in
// the log domain; factorials are never materialised.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pooled/errors.hpp"
#include "pooled/model.hpp"

namespace pooled {

inline constexpr double neg_infinity = -std::numeric_limits<double>::infinity();

/// log C(n, k); -inf outside 0 <= k <= n.
inline double log_binomial(Count n, Count k) {
    if (k < 0 || k > n) return neg_infinity;
    if (k == 0 || k == n) return 0.0;
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

/// log of sum(exp(terms)); -inf for an empty or all -inf input.
inline double log_sum_exp(std::span<const double> terms) {
    double peak = neg_infinity;
    for (double v : terms) peak = std::max(peak, v);
    if (peak == neg_infinity) return neg_infinity;
    double acc = 0.0;
    for (double v : terms) acc += std::exp(v - peak);
    return peak + std::log(acc);
}

/// log((sum c)! / prod c!) = log of the number of sequences with these counts.
inline double log_multinomial(std::span<const Count> counts) {
    Count total = 0;
    double acc = 0.0;
    for (Count c : counts) {
        if (c < 0) throw std::invalid_argument("multinomial counts must be nonnegative");
        total += c;
        acc -= std::lgamma(static_cast<double>(c) + 1.0);
    }
    acc += std::lgamma(static_cast<double>(total) + 1.0);
    // Single-nonzero inputs are exactly one sequence.
    if (std::count_if(counts.begin(), counts.end(), [](Count c) { return c > 0; }) <= 1) return 0.0;
    return acc;
}

/// Shannon entropy of a probability vector, 0 log 0 = 0.
inline double shannon_entropy(std::span<const double> probs) {
    double h = 0.0;
    for (double v : probs)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

inline double shannon_entropy(const Proportions& pi) { return shannon_entropy(pi.values()); }

/// Per-label numbers of items left unknown by a genie, within a LabelCounts context.
class GeniePattern {
public:
    GeniePattern(std::vector<Count> ell, LabelCounts context) : ell_(std::move(ell)), context_(std::move(context)) {
        if (ell_.size() != context_.counts.size())
            throw std::invalid_argument("genie pattern length must equal the number of labels");
        for (std::size_t t = 0; t < ell_.size(); ++t)
            if (ell_[t] < 0 || ell_[t] > context_.counts[t])
                throw std::invalid_argument("genie pattern entry out of range [0, count]");
    }

    /// Pattern with no context bound: each label has exactly ell_t items.
    static GeniePattern unbounded(std::vector<Count> ell) {
        auto ctx = LabelCounts::from_counts(ell);
        return GeniePattern(std::move(ell), std::move(ctx));
    }

    std::span<const Count> ell() const noexcept { return ell_; }
    const LabelCounts& context() const noexcept { return context_; }
    int d() const noexcept { return static_cast<int>(ell_.size()); }

    /// Number of labels with at least one unknown item.
    int support_size() const {
        return static_cast<int>(std::count_if(ell_.begin(), ell_.end(), [](Count c) { return c > 0; }));
    }

private:
    std::vector<Count> ell_;
    LabelCounts context_;
};

/// log |B_ell(pi)|: completions of the masked positions.
inline double log_B_ell(const GeniePattern& pattern) { return log_multinomial(pattern.ell()); }

/// Probabilities on the contiguous support [lo, lo + probs.size()).
struct DiscretePmf {
    Count lo = 0;
    std::vector<double> probs;

    Count hi() const noexcept { return lo + static_cast<Count>(probs.size()) - 1; }

    double mean() const {
        double m = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) m += probs[i] * static_cast<double>(lo + static_cast<Count>(i));
        return m;
    }

    double variance() const {
        const double m = mean();
        double v = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            const double x = static_cast<double>(lo + static_cast<Count>(i)) - m;
            v += probs[i] * x * x;
        }
        return v;
    }

    static DiscretePmf point_mass(Count at) { return DiscretePmf{at, {1.0}}; }
};

/// Number of special items among m draws without replacement from p items, k special.
inline DiscretePmf hypergeometric_pmf(Count k, Count m, Count p) {
    if (p < 0 || k < 0 || m < 0 || k > p || m > p)
        throw std::invalid_argument("hypergeometric needs 0 <= k, m <= p");
    const Count lo = std::max<Count>(0, k + m - p);
    const Count hi = std::min(k, m);
    DiscretePmf pmf{lo, {}};
    pmf.probs.reserve(static_cast<std::size_t>(hi - lo + 1));
    const double denom = log_binomial(p, m);
    for (Count j = lo; j <= hi; ++j)
        pmf.probs.push_back(std::exp(log_binomial(k, j) + log_binomial(p - k, m - j) - denom));
    return pmf;
}

/// k (m/p) ((p-m)/p) ((p-k)/(p-1)); bounded by k/4.
inline double hypergeometric_variance(Count k, Count m, Count p) {
    if (p < 0 || k < 0 || m < 0 || k > p || m > p) throw std::invalid_argument("hypergeometric needs 0 <= k, m <= p");
    if (p < 2) return 0.0;
    const double pd = static_cast<double>(p);
    return static_cast<double>(k) * (static_cast<double>(m) / pd) * (static_cast<double>(p - m) / pd) *
           (static_cast<double>(p - k) / (pd - 1.0));
}

inline DiscretePmf binomial_pmf(Count n, double q) {
    if (n < 0) throw std::invalid_argument("binomial needs n >= 0");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("binomial needs q in [0, 1]");
    if (q == 0.0) return DiscretePmf::point_mass(0);
    if (q == 1.0) return DiscretePmf::point_mass(n);
    DiscretePmf pmf{0, {}};
    pmf.probs.reserve(static_cast<std::size_t>(n + 1));
    const double lq = std::log(q);
    const double l1q = std::log1p(-q);
    for (Count j = 0; j <= n; ++j)
        pmf.probs.push_back(
            std::exp(log_binomial(n, j) + static_cast<double>(j) * lq + static_cast<double>(n - j) * l1q));
    return pmf;
}

inline double pmf_entropy(const DiscretePmf& pmf) { return shannon_entropy(pmf.probs); }

/// Entropy ceiling for an integer-valued variable: 1/2 log(2 pi e (Var + 1/12)).
inline double massey_bound(double variance) {
    if (!(variance >= 0.0)) throw std::invalid_argument("variance must be nonnegative");
    return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * (variance + 1.0 / 12.0));
}

/// log sum_{j=0}^{qmax} C(p, j) (d-1)^j, the size of a Hamming ball in [d]^p.
inline double log_hamming_ball(Count p, int d, Count qmax) {
    if (qmax < 0 || qmax > p) throw std::invalid_argument("Hamming radius must lie in [0, p]");
    if (d < 1) throw std::invalid_argument("alphabet size must be positive");
    if (qmax == 0 || d == 1) return 0.0;
    const double log_alt = std::log(static_cast<double>(d - 1));
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(qmax + 1));
    for (Count j = 0; j <= qmax; ++j) terms.push_back(log_binomial(p, j) + static_cast<double>(j) * log_alt);
    return log_sum_exp(terms);
}

namespace detail {

struct SimpsonPanel {
    double a, b, fa, fm, fb, whole;
};

/// Adaptive Simpson on [a, b] with absolute tolerance tol; throws on depth exhaustion.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 48) {
    auto simpson = [](double a, double b, double fa, double fm, double fb) {
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    };
    struct Frame {
        SimpsonPanel panel;
        double tol;
        int depth;
    };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    std::vector<Frame> stack{{{a, b, fa, fm, fb, simpson(a, b, fa, fm, fb)}, tol, 0}};
    double total = 0.0;
    while (!stack.empty()) {
        const Frame fr = stack.back();
        stack.pop_back();
        const auto& s = fr.panel;
        const double m = 0.5 * (s.a + s.b);
        const double lm = f(0.5 * (s.a + m));
        const double rm = f(0.5 * (m + s.b));
        const double left = simpson(s.a, m, s.fa, lm, s.fm);
        const double right = simpson(m, s.b, s.fm, rm, s.fb);
        const double err = left + right - s.whole;
        if (std::abs(err) <= 15.0 * fr.tol) {
            total += left + right + err / 15.0;
        } else if (fr.depth >= max_depth) {
            throw QuadratureError("adaptive Simpson did not converge on [" + std::to_string(s.a) + ", " +
                                  std::to_string(s.b) + "]");
        } else {
            stack.push_back({{s.a, m, s.fa, lm, s.fm, left}, 0.5 * fr.tol, fr.depth + 1});
            stack.push_back({{m, s.b, s.fm, rm, s.fb, right}, 0.5 * fr.tol, fr.depth + 1});
        }
    }
    return total;
}

}  // namespace detail

/// I(J; J + Z) for J ~ weights and Z ~ N(0, noise_var), i.e. the differential
/// entropy of the mixture minus that of the noise. Integrated in noise-standard
/// units over [min - 8 sd, max + 8 sd] as sum_j w_j phi_j log(phi_j / f), which
/// keeps full relative precision when the result is tiny.
inline double gaussian_mixture_information(const DiscretePmf& weights, double noise_var, double tol = 1e-11) {
    if (!(noise_var > 0.0) || !std::isfinite(noise_var)) throw std::invalid_argument("noise variance must be positive");

    std::vector<double> loc, logw, w;
    for (std::size_t i = 0; i < weights.probs.size(); ++i) {
        // Components this light cannot move the integral at the working tolerance.
        if (weights.probs[i] <= 1e-18) continue;
        loc.push_back(static_cast<double>(weights.lo + static_cast<Count>(i)));
        w.push_back(weights.probs[i]);
        logw.push_back(std::log(weights.probs[i]));
    }
    if (loc.size() <= 1) return 0.0;

    const double sd = std::sqrt(noise_var);
    const double centre = loc.front();
    for (double& x : loc) x = (x - centre) / sd;  // unit-variance coordinates

    std::vector<double> expo(loc.size());
    auto integrand = [&](double u) {
        double peak = neg_infinity;
        for (std::size_t j = 0; j < loc.size(); ++j) {
            const double z = u - loc[j];
            expo[j] = -0.5 * z * z;
            peak = std::max(peak, expo[j] + logw[j]);
        }
        double acc = 0.0;
        for (std::size_t j = 0; j < loc.size(); ++j) acc += std::exp(expo[j] + logw[j] - peak);
        const double log_mix = peak + std::log(acc);  // log f up to the shared normal constant
        double out = 0.0;
        for (std::size_t j = 0; j < loc.size(); ++j) {
            const double dens = w[j] * std::exp(expo[j]);
            if (dens > 0.0) out += dens * (expo[j] - log_mix);
        }
        return out / std::sqrt(2.0 * std::numbers::pi);
    };

    const double a = loc.front() - 8.0;
    const double b = loc.back() + 8.0;
    // Panels no wider than one noise sd so narrow components are never skipped.
    const auto panels = static_cast<std::size_t>(std::ceil(b - a));
    const double width = (b - a) / static_cast<double>(panels);
    const double panel_tol = tol / static_cast<double>(panels);
    double total = 0.0;
    for (std::size_t k = 0; k < panels; ++k) {
        const double lo = a + width * static_cast<double>(k);
        total += detail::adaptive_simpson(integrand, lo, lo + width, panel_tol);
    }
    return std::max(total, 0.0);
}

/// Differential entropy (nats) of sum_j w_j N(j, noise_var).
inline double gaussian_mixture_entropy(const DiscretePmf& weights, double noise_var) {
    if (!(noise_var > 0.0) || !std::isfinite(noise_var)) throw std::invalid_argument("noise variance must be positive");
    return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * noise_var) +
           gaussian_mixture_information(weights, noise_var);
}

}  // namespace pooled
