#pragma once
// Seeded Monte Carlo harness: per-trial error indicators, Wilson intervals,
// n-sweeps, and the data behind the f(r) curves.
//
// Trial outcomes depend only on (config, trial_index); thread count changes
// scheduling, never results.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pooled/bounds.hpp"
#include "pooled/decode.hpp"
#include "pooled/model.hpp"
#include "pooled/rng.hpp"

namespace pooled {

enum class DecoderKind { ml, majority };

struct ExperimentConfig {
    Proportions pi = Proportions::uniform(2);
    Count p = 2;
    std::size_t n = 0;
    double q = 0.5;
    NoiseModel noise = Noiseless{};
    Count qmax = 0;
    std::size_t trials = 1;
    Seed master_seed = 0;
    /// When set, every trial uses this design instead of a fresh Bernoulli draw.
    std::optional<TestDesign> fixed_design;
    DecoderKind decoder = DecoderKind::ml;

    LabelCounts counts() const { return round_proportions(pi, p); }

    void validate() const {
        if (trials < 1) throw std::invalid_argument("trials must be at least 1");
        if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
        if (qmax < 0 || qmax > p) throw std::invalid_argument("qmax must lie in [0, p]");
        validate_noise(noise);
        if (fixed_design && fixed_design->p() != static_cast<std::size_t>(p))
            throw std::invalid_argument("fixed design width must equal p");
        round_proportions(pi, p);
    }
};

struct PeEstimate {
    double pe_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    std::size_t trials = 0;
    std::size_t failures = 0;

    double half_width() const { return 0.5 * (ci_high - ci_low); }
};

/// 95% Wilson score interval.
inline PeEstimate wilson_estimate(std::size_t failures, std::size_t trials) {
    constexpr double z = 1.959963984540054;
    PeEstimate e;
    e.trials = trials;
    e.failures = failures;
    const double nt = static_cast<double>(trials);
    const double ph = static_cast<double>(failures) / nt;
    const double denom = 1.0 + z * z / nt;
    const double centre = (ph + z * z / (2.0 * nt)) / denom;
    const double half = z * std::sqrt(ph * (1.0 - ph) / nt + z * z / (4.0 * nt * nt)) / denom;
    e.pe_hat = ph;
    e.ci_low = std::max(0.0, std::min(ph, centre - half));
    e.ci_high = std::min(1.0, std::max(ph, centre + half));
    return e;
}

/// Per-config state reused across trials: rounded counts and, for p <= 64, the candidate bitmasks.
class TrialRunner {
public:
    explicit TrialRunner(ExperimentConfig config) : config_(std::move(config)) {
        config_.validate();
        counts_ = config_.counts();
        if (config_.decoder == DecoderKind::ml && static_cast<std::size_t>(config_.p) <= CandidateSet::max_population)
            candidates_ = std::make_shared<CandidateSet>(counts_);
        else if (config_.decoder == DecoderKind::ml)
            check_enumeration_guard(counts_);
    }

    const ExperimentConfig& config() const noexcept { return config_; }

    /// Same runner (sharing the candidate set) with a different number of tests.
    TrialRunner with_tests(std::size_t n) const {
        TrialRunner copy = *this;
        copy.config_.n = n;
        return copy;
    }
    const LabelCounts& counts() const noexcept { return counts_; }

    /// True on success under the config's qmax criterion.
    bool run(std::uint64_t trial_index) const {
        const Seed master = config_.master_seed;
        const auto beta = sample_beta(counts_, derive_seed(master, trial_index, StreamTag::labels));
        if (config_.decoder == DecoderKind::majority)
            return approx_success(majority_label_decode(counts_), beta, config_.qmax);

        const auto p = static_cast<std::size_t>(config_.p);
        const TestDesign design = config_.fixed_design
                                      ? *config_.fixed_design
                                      : bernoulli_design(config_.n, p, config_.q,
                                                         derive_seed(master, trial_index, StreamTag::design));
        const auto y = observe(beta, design, counts_.d(), config_.noise,
                               derive_seed(master, trial_index, StreamTag::noise));
        const Seed tie = derive_seed(master, trial_index, StreamTag::tie_break);
        const auto result = candidates_ ? ml_decode(y, design, *candidates_, config_.noise, tie)
                                        : ml_decode(y, design, counts_, config_.noise, tie);
        return approx_success(result.beta_hat, beta, config_.qmax);
    }

private:
    ExperimentConfig config_;
    LabelCounts counts_;
    std::shared_ptr<const CandidateSet> candidates_;
};

inline bool run_trial(const ExperimentConfig& config, std::uint64_t trial_index) {
    return TrialRunner(config).run(trial_index);
}

inline std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Failure count over trials [0, trials), split into contiguous blocks per worker.
inline std::size_t count_failures(const TrialRunner& runner, std::size_t trials, std::size_t threads) {
    threads = std::min(resolve_threads(threads), trials);
    std::vector<std::size_t> failures(threads, 0);
    auto work = [&](std::size_t w) {
        const std::size_t begin = trials * w / threads;
        const std::size_t end = trials * (w + 1) / threads;
        for (std::size_t k = begin; k < end; ++k) failures[w] += runner.run(k) ? 0 : 1;
    };
    if (threads <= 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w);
    }
    std::size_t total = 0;
    for (auto f : failures) total += f;
    return total;
}

inline PeEstimate estimate_pe(const ExperimentConfig& config, std::size_t threads = 1) {
    TrialRunner runner(config);
    return wilson_estimate(count_failures(runner, config.trials, threads), config.trials);
}

/// Pool-adjacent-violators fit of a nonincreasing sequence with weights.
inline std::vector<double> isotonic_nonincreasing(const std::vector<double>& values, const std::vector<double>& weights) {
    struct Block {
        double mean, weight;
        std::size_t len;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < values.size(); ++i) {
        blocks.push_back({values[i], weights[i], 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean < blocks.back().mean) {
            auto b = blocks.back();
            blocks.pop_back();
            auto& a = blocks.back();
            a.mean = (a.mean * a.weight + b.mean * b.weight) / (a.weight + b.weight);
            a.weight += b.weight;
            a.len += b.len;
        }
    }
    std::vector<double> fit;
    for (const auto& b : blocks) fit.insert(fit.end(), b.len, b.mean);
    return fit;
}

struct TrendTest {
    double statistic = 0.0;  // trial-weighted squared distance to the nonincreasing fit
    double p_value = 1.0;    // parametric bootstrap under the fitted curve
};

/// Parametric bootstrap of the isotonic residual: resample failures from
/// Binomial(trials, fit) and count how often the residual is at least as large.
inline TrendTest isotonic_trend_test(const std::vector<PeEstimate>& estimates, Seed seed, std::size_t replicates = 1000) {
    std::vector<double> values, weights;
    for (const auto& e : estimates) values.push_back(e.pe_hat), weights.push_back(static_cast<double>(e.trials));
    auto residual = [&](const std::vector<double>& v) {
        const auto fit = isotonic_nonincreasing(v, weights);
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += weights[i] * (v[i] - fit[i]) * (v[i] - fit[i]);
        return s;
    };
    TrendTest out;
    out.statistic = residual(values);
    const auto fit = isotonic_nonincreasing(values, weights);
    Engine gen = make_engine(derive_seed(seed, 0, StreamTag::bootstrap));
    std::size_t exceed = 0;
    std::vector<double> sim(values.size());
    for (std::size_t r = 0; r < replicates; ++r) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::size_t f = 0;
            for (std::size_t k = 0; k < estimates[i].trials; ++k) f += bernoulli(gen, fit[i]) ? 1 : 0;
            sim[i] = static_cast<double>(f) / weights[i];
        }
        if (residual(sim) >= out.statistic - 1e-15) ++exceed;
    }
    out.p_value = (static_cast<double>(exceed) + 1.0) / (static_cast<double>(replicates) + 1.0);
    return out;
}

struct SweepResult {
    std::vector<std::size_t> n_grid;
    std::vector<PeEstimate> estimates;
    double n_star_formula = 0.0;
    std::optional<double> n_cross;  // first downward crossing of pe = 0.5
    TrendTest trend;
};

/// Linear interpolation at the first grid step where pe_hat drops through 0.5.
inline std::optional<double> half_crossing(const std::vector<std::size_t>& grid, const std::vector<PeEstimate>& est) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (est[i].pe_hat == 0.5) return static_cast<double>(grid[i]);
        if (i > 0 && est[i - 1].pe_hat > 0.5 && est[i].pe_hat < 0.5) {
            const double x0 = static_cast<double>(grid[i - 1]), x1 = static_cast<double>(grid[i]);
            const double y0 = est[i - 1].pe_hat, y1 = est[i].pe_hat;
            return x0 + (0.5 - y0) * (x1 - x0) / (y1 - y0);
        }
    }
    return std::nullopt;
}

/// One estimate per grid point; trials at each point use the same trial
/// indices, so different configs with the same seed are paired.
inline SweepResult sweep_n(const ExperimentConfig& config, const std::vector<std::size_t>& n_grid, std::size_t threads = 1) {
    if (n_grid.empty()) throw std::invalid_argument("sweep grid must be nonempty");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1]) throw std::invalid_argument("sweep grid must be strictly increasing");

    SweepResult out;
    out.n_grid = n_grid;
    out.n_star_formula = config.p >= 3 ? noiseless_threshold(config.pi, config.p).n_bound : 0.0;
    // The candidate set depends only on the counts; build it once.
    const TrialRunner base(config);
    for (auto n : n_grid) {
        const TrialRunner runner = base.with_tests(n);
        out.estimates.push_back(wilson_estimate(count_failures(runner, config.trials, threads), config.trials));
    }
    out.n_cross = half_crossing(out.n_grid, out.estimates);
    out.trend = isotonic_trend_test(out.estimates, config.master_seed);
    return out;
}

/// CSV with columns n,trials,failures,pe_hat,ci_low,ci_high; reals at 6 significant digits.
inline std::string sweep_csv(const SweepResult& sweep) {
    std::string out = "n,trials,failures,pe_hat,ci_low,ci_high\n";
    char line[256];
    for (std::size_t i = 0; i < sweep.n_grid.size(); ++i) {
        const auto& e = sweep.estimates[i];
        std::snprintf(line, sizeof line, "%zu,%zu,%zu,%.6g,%.6g,%.6g\n", sweep.n_grid[i], e.trials, e.failures,
                      e.pe_hat, e.ci_low, e.ci_high);
        out += line;
    }
    return out;
}

struct Figure1Row {
    std::string pi_id;
    int r = 0;
    double f_r = 0.0;
};

/// The (0.49, 0.49, 0.0025 x 8) vector used for the highly non-uniform curve.
inline Proportions figure1_nonuniform() {
    std::vector<double> v{0.49, 0.49};
    v.insert(v.end(), 8, 0.0025);
    return Proportions(std::move(v));
}

/// Flat Dirichlet draw via normalised exponentials.
inline Proportions random_simplex_point(int d, Seed seed) {
    Engine gen = make_engine(seed);
    std::vector<double> v(static_cast<std::size_t>(d));
    double total = 0.0;
    for (auto& x : v) total += (x = standard_exponential(gen));
    for (auto& x : v) x /= total;
    return Proportions(std::move(v));
}

/// f(r) for r = 1..d-1: uniform pi, the non-uniform vector when d = 10, and
/// num_random simplex-uniform draws.
inline std::vector<Figure1Row> figure1_data(int d, std::size_t num_random, Seed seed) {
    if (d < 2) throw std::invalid_argument("figure data needs d >= 2");
    std::vector<std::pair<std::string, Proportions>> curves;
    curves.emplace_back("uniform", Proportions::uniform(d));
    if (d == 10) curves.emplace_back("nonuniform", figure1_nonuniform());
    for (std::size_t k = 0; k < num_random; ++k)
        curves.emplace_back("random" + std::to_string(k + 1), random_simplex_point(d, derive_seed(seed, k, StreamTag::simplex)));

    std::vector<Figure1Row> rows;
    for (const auto& [id, pi] : curves)
        for (int r = 1; r <= d - 1; ++r) rows.push_back({id, r, f_ratio(pi, r)});
    return rows;
}

inline std::string figure1_csv(const std::vector<Figure1Row>& rows) {
    std::string out = "pi_id,r,f_r\n";
    char line[256];
    for (const auto& row : rows) {
        std::snprintf(line, sizeof line, "%s,%d,%.6g\n", row.pi_id.c_str(), row.r, row.f_r);
        out += line;
    }
    return out;
}

}  // namespace pooled
