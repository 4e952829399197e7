#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "oracles.hpp"
#include "pooled/infotheory.hpp"
#include "pooled/model.hpp"

using namespace pooled;

namespace {

std::vector<Count> counts_of(std::initializer_list<Count> c) { return std::vector<Count>(c); }

/// Smallest l-infinity distance from p * pi over all nonnegative integer vectors summing to p.
double best_linf(const Proportions& pi, Count p) {
    const int d = pi.d();
    double best = 1e300;
    std::vector<Count> c(static_cast<std::size_t>(d), 0);
    auto rec = [&](auto&& self, int t, Count left) -> void {
        if (t == d - 1) {
            c[t] = left;
            double dist = 0.0;
            for (int s = 0; s < d; ++s) dist = std::max(dist, std::abs(static_cast<double>(c[s]) - pi[s] * p));
            best = std::min(best, dist);
            return;
        }
        for (Count v = 0; v <= left; ++v) {
            c[t] = v;
            self(self, t + 1, left - v);
        }
    };
    rec(rec, 0, p);
    return best;
}

}  // namespace

TEST(Proportions, RejectsInvalidVectors) {
    EXPECT_THROW(Proportions({1.0}), std::invalid_argument);
    EXPECT_THROW(Proportions({0.5, 0.6}), std::invalid_argument);
    EXPECT_THROW(Proportions({1.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(Proportions({1.5, -0.5}), std::invalid_argument);
    EXPECT_THROW(Proportions::uniform(1), std::invalid_argument);
    EXPECT_NO_THROW(Proportions({0.3, 0.3, 0.4}));
}

TEST(RoundProportions, ExactMultiples) {
    EXPECT_EQ(round_proportions(Proportions({0.5, 0.5}), 4).counts, counts_of({2, 2}));
    EXPECT_EQ(round_proportions(Proportions({0.49, 0.49, 0.02}), 100).counts, counts_of({49, 49, 2}));
}

TEST(RoundProportions, HalfTieGoesToLowestIndex) {
    EXPECT_EQ(round_proportions(Proportions({0.5, 0.5}), 5).counts, counts_of({3, 2}));
    EXPECT_EQ(round_proportions(Proportions::uniform(3), 4).counts, counts_of({2, 1, 1}));
}

TEST(RoundProportions, RejectsPopulationSmallerThanLabels) {
    EXPECT_THROW(round_proportions(Proportions::uniform(3), 2), std::invalid_argument);
}

TEST(RoundProportions, SumsToPAndIsLinfOptimal) {
    Engine gen = make_engine(11);
    for (int trial = 0; trial < 300; ++trial) {
        const int d = 2 + static_cast<int>(uniform_below(gen, 3));
        const Count p = d + static_cast<Count>(uniform_below(gen, 14));
        std::vector<double> v(static_cast<std::size_t>(d));
        double s = 0.0;
        for (auto& x : v) s += (x = 0.05 + uniform01(gen));
        for (auto& x : v) x /= s;
        const Proportions pi(v);
        const auto c = round_proportions(pi, p);
        EXPECT_EQ(std::accumulate(c.counts.begin(), c.counts.end(), Count{0}), p);
        double dist = 0.0;
        for (int t = 0; t < d; ++t) dist = std::max(dist, std::abs(static_cast<double>(c.counts[t]) - pi[t] * p));
        EXPECT_LE(dist, best_linf(pi, p) + 1e-9) << "d=" << d << " p=" << p;
    }
}

TEST(SampleBeta, SingleSequence) {
    const auto beta = sample_beta(LabelCounts::from_counts({1, 0}), 3);
    EXPECT_EQ(beta.labels, std::vector<Label>{0});
}

TEST(SampleBeta, DeterministicGivenSeed) {
    const auto c = LabelCounts::from_counts({5, 4, 3});
    EXPECT_EQ(sample_beta(c, 99).labels, sample_beta(c, 99).labels);
    EXPECT_NE(sample_beta(c, 99).labels, sample_beta(c, 100).labels);
}

namespace {

void expect_uniform_over_B(const LabelCounts& counts, std::size_t draws) {
    std::map<std::vector<Label>, double> freq;
    for (std::size_t k = 0; k < draws; ++k) freq[sample_beta(counts, derive_seed(5, k, StreamTag::labels)).labels] += 1;
    std::vector<int> cs(counts.counts.begin(), counts.counts.end());
    const auto cells = oracle::count_sequences(cs);
    ASSERT_EQ(freq.size(), cells);
    std::vector<double> obs, expected;
    for (const auto& [seq, f] : freq) {
        obs.push_back(f);
        expected.push_back(static_cast<double>(draws) / static_cast<double>(cells));
        EXPECT_NEAR(f / draws, 1.0 / cells, 3.0 * std::sqrt((1.0 / cells) * (1.0 - 1.0 / cells) / draws));
    }
    EXPECT_GT(oracle::chi_square_p_value(obs, expected), 0.001);
}

}  // namespace

TEST(SampleBeta, UniformOverTwoTwo) { expect_uniform_over_B(LabelCounts::from_counts({2, 2}), 60000); }

TEST(SampleBeta, UniformOverPermutations) { expect_uniform_over_B(LabelCounts::from_counts({1, 1, 1}), 60000); }

TEST(SampleBeta, MarginalsAreExchangeable) {
    const auto counts = LabelCounts::from_counts({3, 2, 1});
    const std::size_t draws = 30000;
    std::vector<std::vector<double>> freq(6, std::vector<double>(3, 0.0));
    for (std::size_t k = 0; k < draws; ++k) {
        const auto b = sample_beta(counts, derive_seed(17, k, StreamTag::labels));
        for (std::size_t j = 0; j < 6; ++j) freq[j][b.labels[j]] += 1;
    }
    for (std::size_t j = 0; j < 6; ++j)
        for (int t = 0; t < 3; ++t) {
            const double expect = static_cast<double>(counts.counts[t]) / 6.0;
            EXPECT_NEAR(freq[j][t] / draws, expect, 4.0 * std::sqrt(expect * (1 - expect) / draws));
        }
}

TEST(BernoulliDesign, EmptyAndRejectsBadQ) {
    EXPECT_EQ(bernoulli_design(0, 5, 0.5, 1).n(), 0u);
    EXPECT_THROW(bernoulli_design(3, 5, 0.0, 1), std::invalid_argument);
    EXPECT_THROW(bernoulli_design(3, 5, 1.0, 1), std::invalid_argument);
}

TEST(BernoulliDesign, MeanPopcount) {
    const auto x = bernoulli_design(1000, 20, 0.5, 4);
    double total = 0.0;
    for (std::size_t i = 0; i < x.n(); ++i) total += static_cast<double>(x.popcount(i));
    const double sd = std::sqrt(20 * 0.25 / 1000.0);
    EXPECT_NEAR(total / 1000.0, 10.0, 3.0 * sd);
}

TEST(BernoulliDesign, EntryMean) {
    const auto x = bernoulli_design(1000, 100, 0.25, 8);
    double ones = 0.0;
    for (std::size_t i = 0; i < x.n(); ++i) ones += static_cast<double>(x.popcount(i));
    EXPECT_NEAR(ones / 1e5, 0.25, 3.0 * std::sqrt(0.25 * 0.75 / 1e5));
    EXPECT_EQ(bernoulli_design(10, 10, 0.3, 8).row(3)[4], bernoulli_design(10, 10, 0.3, 8).row(3)[4]);
}

TEST(TestDesign, RejectsMalformedRows) {
    EXPECT_THROW(TestDesign(3, {{1, 0}}), std::invalid_argument);
    EXPECT_THROW(TestDesign(2, {{1, 2}}), std::invalid_argument);
    const TestDesign x(2, {{1, 0}});
    const std::vector<std::uint8_t> extra{1, 1};
    EXPECT_EQ(x.with_row(extra).n(), 2u);
    EXPECT_EQ(x.with_row(extra).popcount(1), 2u);
}

TEST(CountLabels, Examples) {
    const std::vector<std::uint8_t> r1{1, 1, 0, 0}, r2{1, 1, 1, 1}, r3{0, 0, 0};
    EXPECT_EQ(count_labels(LabelAssignment{{0, 1, 0, 1}}, r1, 2), counts_of({1, 1}));
    EXPECT_EQ(count_labels(LabelAssignment{{0, 0, 1, 1}}, r2, 2), counts_of({2, 2}));
    EXPECT_EQ(count_labels(LabelAssignment{{0, 1, 2}}, r3, 3), counts_of({0, 0, 0}));
    EXPECT_THROW(count_labels(LabelAssignment{{0, 1}}, r3, 2), std::invalid_argument);
}

TEST(Observe, NoiselessRowsAreCountVectors) {
    const TestDesign x(4, {{1, 1, 0, 0}});
    const auto y = observe(LabelAssignment{{0, 1, 0, 1}}, x, 2, Noiseless{}, 1);
    EXPECT_EQ(y.values, (std::vector<double>{1, 1}));

    const auto counts = LabelCounts::from_counts({4, 3, 3});
    const auto big = bernoulli_design(50, 10, 0.4, 2);
    const auto beta = sample_beta(counts, 3);
    const auto y2 = observe(beta, big, 3, Noiseless{}, 4);
    for (std::size_t i = 0; i < big.n(); ++i) {
        double s = 0.0;
        for (double v : y2.row(i)) s += v;
        EXPECT_EQ(s, static_cast<double>(big.popcount(i)));
    }
}

TEST(Observe, GaussianMoments) {
    const TestDesign x(4, std::vector<std::vector<std::uint8_t>>(50000, {1, 0, 1, 1}));
    const LabelAssignment beta{{0, 1, 0, 1}};
    const auto y = observe(beta, x, 2, Gaussian{1.0}, 21);
    EXPECT_FALSE(y.integral);
    double sum = 0.0, sq = 0.0;
    const std::vector<double> truth{2, 1};
    for (std::size_t i = 0; i < y.n; ++i)
        for (std::size_t t = 0; t < 2; ++t) {
            const double z = y.at(i, t) - truth[t];
            sum += z, sq += z * z;
        }
    const double m = 1e5;
    const double mean = sum / m;
    const double var = sq / m - mean * mean;
    EXPECT_NEAR(mean, 0.0, 3.0 * std::sqrt(4.0 / m));
    EXPECT_NEAR(var, 4.0, 0.05 * 4.0);
}

TEST(Observe, ClippedStaysInRange) {
    const auto counts = LabelCounts::from_counts({3, 3});
    const auto x = bernoulli_design(200, 6, 0.5, 5);
    const auto y = observe(sample_beta(counts, 6), x, 2, ClippedGaussian{2.0}, 7);
    EXPECT_TRUE(y.integral);
    for (double v : y.values) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 6.0);
        EXPECT_EQ(v, std::round(v));
    }
}

TEST(Observe, RejectsBadInputs) {
    const TestDesign x(3, {{1, 1, 0}});
    EXPECT_THROW(observe(LabelAssignment{{0, 1}}, x, 2, Noiseless{}, 1), std::invalid_argument);
    EXPECT_THROW(observe(LabelAssignment{{0, 1, 0}}, x, 2, Gaussian{0.0}, 1), std::invalid_argument);
    EXPECT_THROW(observe(LabelAssignment{{0, 1, 0}}, x, 2, ClippedGaussian{-1.0}, 1), std::invalid_argument);
}

TEST(Observe, ConditionalLawIsHypergeometric) {
    // counts (k, p - k), a fixed row with m ones: N_1 ~ Hypergeometric(k, m, p).
    const Count p = 12, k = 5;
    const std::size_t m = 7, draws = 40000;
    std::vector<std::uint8_t> row(p, 0);
    std::fill(row.begin(), row.begin() + m, 1);
    const auto counts = LabelCounts::from_counts({k, p - k});
    const auto pmf = hypergeometric_pmf(k, static_cast<Count>(m), p);
    std::vector<double> obs(pmf.probs.size(), 0.0);
    for (std::size_t s = 0; s < draws; ++s) {
        const auto n = count_labels(sample_beta(counts, derive_seed(3, s, StreamTag::labels)), row, 2);
        obs[static_cast<std::size_t>(n[0] - pmf.lo)] += 1;
    }
    // Pool sparse tail cells so every expected count is at least 5.
    std::vector<double> o, e;
    double acc_o = 0, acc_e = 0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        acc_o += obs[i], acc_e += pmf.probs[i] * draws;
        if (acc_e >= 5) o.push_back(acc_o), e.push_back(acc_e), acc_o = acc_e = 0;
    }
    if (acc_e > 0) o.back() += acc_o, e.back() += acc_e;
    EXPECT_GT(oracle::chi_square_p_value(o, e), 0.001);
}

TEST(Observe, ConcentrationTailIsRare) {
    // P[|N_t - mean| > sqrt(p log p)] <= 2 / p^2 for beta uniform on B(pi).
    for (Count p : {16, 36}) {
        const auto counts = round_proportions(Proportions({0.5, 0.3, 0.2}), p);
        std::vector<std::uint8_t> row(static_cast<std::size_t>(p), 0);
        for (Count j = 0; j < p; j += 2) row[j] = 1;
        const double m = static_cast<double>(p / 2);
        const double radius = std::sqrt(p * std::log(static_cast<double>(p)));
        std::size_t hits = 0;
        const std::size_t draws = 20000;
        for (std::size_t s = 0; s < draws; ++s) {
            const auto n = count_labels(sample_beta(counts, derive_seed(9, s, StreamTag::labels)), row, 3);
            for (int t = 0; t < 3; ++t)
                if (std::abs(static_cast<double>(n[t]) - m * counts.counts[t] / static_cast<double>(p)) > radius) {
                    ++hits;
                    break;
                }
        }
        const double bound = 2.0 / static_cast<double>(p * p);
        EXPECT_LE(static_cast<double>(hits) / draws, bound + 3.0 * std::sqrt(bound * (1 - bound) / draws));
    }
}
