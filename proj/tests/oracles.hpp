#pragma once
// Test-only reference computations. Each one takes a route independent of
// the library code it is compared against (enumeration, plain loops, fixed
// grids), and none of them calls the function under test.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace oracle {

/// Every length-p word over d symbols, as vectors.
inline std::vector<std::vector<int>> all_words(int p, int d) {
    std::vector<std::vector<int>> out;
    std::vector<int> w(static_cast<std::size_t>(p), 0);
    while (true) {
        out.push_back(w);
        int k = 0;
        while (k < p && ++w[k] == d) w[k++] = 0;
        if (k == p) break;
    }
    return out;
}

/// Number of words in [d]^p with exactly these symbol counts, by enumeration.
inline std::size_t count_sequences(const std::vector<int>& counts) {
    int p = 0;
    for (int c : counts) p += c;
    const int d = static_cast<int>(counts.size());
    std::size_t total = 0;
    for (const auto& w : all_words(p, d)) {
        std::vector<int> seen(counts.size(), 0);
        for (int s : w) ++seen[s];
        total += seen == counts;
    }
    return total;
}

/// Size of the Hamming ball of radius r around (0, ..., 0) in [d]^p, by enumeration.
inline std::size_t hamming_ball_size(int p, int d, int r) {
    std::size_t total = 0;
    for (const auto& w : all_words(p, d)) {
        int dist = 0;
        for (int s : w) dist += s != 0;
        total += dist <= r;
    }
    return total;
}

/// I(X0; Y | X1) for a noiseless pooled test: X0 has ell_t Bernoulli(q)
/// entries in class t, X1 has extra_t, and Y_t counts the ones of class t.
/// Computed by enumerating every (X0, X1) pattern.
inline double brute_force_mi(const std::vector<int>& ell, const std::vector<int>& extra, double q) {
    const int d = static_cast<int>(ell.size());
    int n0 = 0, n1 = 0;
    for (int t = 0; t < d; ++t) n0 += ell[t], n1 += extra[t];
    auto popcount_by_class = [&](std::uint32_t bits, const std::vector<int>& sizes) {
        std::vector<int> out(static_cast<std::size_t>(d), 0);
        int pos = 0;
        for (int t = 0; t < d; ++t)
            for (int k = 0; k < sizes[t]; ++k, ++pos) out[t] += (bits >> pos) & 1U;
        return out;
    };
    auto weight = [&](std::uint32_t bits, int len) {
        int ones = 0;
        for (int k = 0; k < len; ++k) ones += (bits >> k) & 1U;
        return std::pow(q, ones) * std::pow(1.0 - q, len - ones);
    };

    double h_cond = 0.0;  // H(Y | X1); H(Y | X0, X1) = 0
    for (std::uint32_t x1 = 0; x1 < (1U << n1); ++x1) {
        const double w1 = weight(x1, n1);
        const auto base = popcount_by_class(x1, extra);
        std::map<std::vector<int>, double> law;
        for (std::uint32_t x0 = 0; x0 < (1U << n0); ++x0) {
            auto y = popcount_by_class(x0, ell);
            for (int t = 0; t < d; ++t) y[t] += base[t];
            law[y] += weight(x0, n0);
        }
        double h = 0.0;
        for (const auto& [y, pr] : law)
            if (pr > 0) h -= pr * std::log(pr);
        h_cond += w1 * h;
    }
    return h_cond;
}

/// I(J; J + Z), J on integer atoms with weights w, Z ~ N(0, var): trapezoid
/// rule on a fixed fine grid in long double, as h(mixture) - h(noise).
inline double trapezoid_mixture_mi(const std::vector<double>& w, double var) {
    using ld = long double;
    const ld sd = std::sqrt(static_cast<ld>(var));
    const ld lo = -12.0L * sd;
    const ld hi = static_cast<ld>(w.size() - 1) + 12.0L * sd;
    const ld step = std::min<ld>(0.01L * sd, 0.01L);
    const auto steps = static_cast<long>(std::ceil((hi - lo) / step));
    const ld h = (hi - lo) / static_cast<ld>(steps);
    const ld norm = 1.0L / (sd * std::sqrt(2.0L * std::numbers::pi_v<ld>));
    ld acc = 0.0L;
    for (long k = 0; k <= steps; ++k) {
        const ld y = lo + h * static_cast<ld>(k);
        ld f = 0.0L;
        for (std::size_t j = 0; j < w.size(); ++j) {
            const ld z = (y - static_cast<ld>(j)) / sd;
            f += static_cast<ld>(w[j]) * norm * std::exp(-0.5L * z * z);
        }
        const ld term = f > 0 ? -f * std::log(f) : 0.0L;
        acc += (k == 0 || k == steps) ? 0.5L * term : term;
    }
    const ld entropy = acc * h;
    const ld noise = 0.5L * std::log(2.0L * std::numbers::pi_v<ld> * std::numbers::e_v<ld> * static_cast<ld>(var));
    return static_cast<double>(entropy - noise);
}

/// Upper-tail p-value of Pearson's chi-square statistic.
inline double chi_square_p_value(const std::vector<double>& observed, const std::vector<double>& expected) {
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double diff = observed[i] - expected[i];
        stat += diff * diff / expected[i];
    }
    boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace oracle
