// pooled: bounds, simulation, sweeps, the exact oracle and f(r) curve data
// for the pooled data problem.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cli_support.hpp"
#include "pooled/bounds.hpp"
#include "pooled/decode.hpp"
#include "pooled/experiments.hpp"
#include "pooled/report_json.hpp"

namespace {

using namespace pooled;
using nlohmann::json;

struct Options {
    std::string pi = "uniform:2";
    long long p = 0;
    std::string n = "0";
    double q = 0.5;
    std::optional<double> bounds_q;
    std::optional<double> sigma2;
    std::string noise = "none";
    std::optional<long long> qmax;
    double delta = 0.0;
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::string format;  // per-subcommand default
    std::string design = "bernoulli";
    std::string out;
    int d = 10;
    std::size_t random = 3;
};

void emit(const Options& opt, const std::string& text) {
    if (opt.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(opt.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file " + opt.out);
    f << text;
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
    return s;
}

ExperimentConfig make_config(const Options& opt) {
    ExperimentConfig cfg;
    cfg.pi = cli::parse_pi(opt.pi);
    cfg.p = opt.p;
    cfg.q = opt.q;
    cfg.noise = cli::parse_noise(opt.noise, opt.sigma2);
    cfg.qmax = opt.qmax.value_or(0);
    cfg.trials = opt.trials;
    cfg.master_seed = opt.seed;
    cfg.fixed_design = cli::parse_design(opt.design, static_cast<std::size_t>(opt.p));
    cfg.validate();
    return cfg;
}

int cmd_bounds(const Options& opt) {
    const auto pi = cli::parse_pi(opt.pi);
    const Count p = opt.p;
    std::vector<BoundReport> reports;
    auto attempt = [&](const char* name, auto&& fn) {
        try {
            reports.push_back(fn());
        } catch (const QuadratureError&) {
            throw;
        } catch (const std::exception& e) {
            BoundReport rep;
            rep.name = name;
            rep.status = BoundStatus::regime_violation;
            rep.regime_note = e.what();
            reports.push_back(rep);
        }
    };

    attempt("noiseless_threshold", [&] { return noiseless_threshold(pi, p); });
    if (opt.qmax) {
        attempt("approx_recovery_noiseless",
                [&] { return approx_recovery_threshold(pi, p, *opt.qmax, opt.delta, NoiselessVariant{}); });
    }
    const auto counts = round_proportions(pi, p);
    if (opt.sigma2) {
        attempt("gaussian_subset", [&] { return gaussian_subset_bound(pi, p, *opt.sigma2, opt.delta); });
        const Count largest = *std::max_element(counts.counts.begin(), counts.counts.end());
        attempt("gaussian_single_item", [&] { return gaussian_single_item_bound(p, *opt.sigma2, opt.delta, largest); });
    }
    if (opt.bounds_q) {
        const double q = *opt.bounds_q;
        attempt("bernoulli_noiseless", [&] { return bernoulli_noiseless_bound(pi, p, q, opt.delta); });
        attempt("bernoulli_fano_noiseless", [&] { return bernoulli_fano_scan(counts, q, opt.delta); });
        if (opt.qmax) {
            attempt("approx_recovery_fano", [&] {
                const double mi = mi_noiseless_bernoulli(GeniePattern(counts.counts, counts), q);
                return approx_recovery_threshold(pi, p, *opt.qmax, opt.delta, FanoVariant{mi});
            });
        }
        // Exact Gaussian information needs one quadrature per label; keep it to moderate p.
        if (opt.sigma2 && p <= 10000)
            attempt("bernoulli_fano_gaussian", [&] { return bernoulli_fano_scan(counts, q, opt.delta, *opt.sigma2); });
    }

    if (opt.format == "csv") {
        std::string out = "name,n_bound,argmax,status\n";
        for (const auto& r : reports)
            out += r.name + "," + fmt6(r.n_bound) + "," + join_ints(r.argmax) + "," + to_string(r.status) + "\n";
        emit(opt, out);
    } else {
        json arr = json::array();
        for (const auto& r : reports) arr.push_back(to_json(r));
        emit(opt, json{{"bounds", arr}}.dump(2) + "\n");
    }
    return cli::ok;
}

int cmd_simulate(const Options& opt) {
    auto cfg = make_config(opt);
    const auto grid = cli::parse_range(opt.n);
    if (grid.size() != 1) throw std::invalid_argument("simulate takes a single --n; use sweep for ranges");
    cfg.n = grid.front();
    if (cfg.fixed_design) cfg.n = cfg.fixed_design->n();
    const auto est = estimate_pe(cfg, opt.threads);
    if (opt.format == "csv") {
        emit(opt, "n,trials,failures,pe_hat,ci_low,ci_high\n" + std::to_string(cfg.n) + "," +
                      std::to_string(est.trials) + "," + std::to_string(est.failures) + "," + fmt6(est.pe_hat) +
                      "," + fmt6(est.ci_low) + "," + fmt6(est.ci_high) + "\n");
    } else {
        json j = to_json(est);
        j["n"] = cfg.n;
        if (cfg.p >= 3) j["counting_pe_lower"] = counting_pe_lower(cfg.counts(), static_cast<Count>(cfg.n));
        emit(opt, j.dump(2) + "\n");
    }
    return cli::ok;
}

int cmd_sweep(const Options& opt) {
    const auto cfg = make_config(opt);
    if (cfg.fixed_design) throw std::invalid_argument("sweep draws a fresh Bernoulli design per trial; use --design bernoulli");
    const auto result = sweep_n(cfg, cli::parse_range(opt.n), opt.threads);
    if (opt.format == "csv") emit(opt, sweep_csv(result));
    else emit(opt, to_json(result).dump(2) + "\n");
    return cli::ok;
}

int cmd_oracle(const Options& opt) {
    const auto pi = cli::parse_pi(opt.pi);
    const auto counts = round_proportions(pi, opt.p);
    auto design = cli::parse_design(opt.design, static_cast<std::size_t>(opt.p));
    if (!design) {
        const auto grid = cli::parse_range(opt.n);
        if (grid.size() != 1) throw std::invalid_argument("oracle takes a single --n");
        design = bernoulli_design(grid.front(), static_cast<std::size_t>(opt.p), opt.q,
                                  derive_seed(opt.seed, 0, StreamTag::design));
    }
    const auto res = exact_pe_oracle(*design, counts, opt.qmax.value_or(0));
    if (opt.format == "csv") {
        emit(opt, "pe_exact,pe_unique,candidates_total,classes\n" + fmt6(res.pe_exact) + "," + fmt6(res.pe_unique) +
                      "," + std::to_string(res.candidates_total) + "," + std::to_string(res.classes) + "\n");
    } else {
        emit(opt, to_json(res).dump(2) + "\n");
    }
    return cli::ok;
}

int cmd_figure1(const Options& opt) {
    const auto rows = figure1_data(opt.d, opt.random, opt.seed);
    if (opt.format == "json") {
        json arr = json::array();
        for (const auto& r : rows) arr.push_back({{"pi_id", r.pi_id}, {"r", r.r}, {"f_r", r.f_r}});
        emit(opt, arr.dump(2) + "\n");
    } else {
        emit(opt, figure1_csv(rows));
    }
    return cli::ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bounds, simulation and exact oracles for the pooled data problem"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--out", opt.out, "Write output to FILE instead of stdout");
    };
    auto add_problem = [&](CLI::App* sub) {
        sub->add_option("--pi", opt.pi, "Label proportions: comma list, uniform:d, or fig1");
        sub->add_option("--p", opt.p, "Population size")->required()->check(CLI::PositiveNumber);
    };
    auto add_sim = [&](CLI::App* sub) {
        sub->add_option("--n", opt.n, "Number of tests (single value or a:b)");
        sub->add_option("--q", opt.q, "Bernoulli design inclusion probability");
        sub->add_option("--sigma2", opt.sigma2, "Noise level sigma^2 (variance p * sigma2)");
        sub->add_option("--noise", opt.noise, "Noise model")->check(CLI::IsMember({"none", "gaussian", "clipped"}));
        sub->add_option("--qmax", opt.qmax, "Allowed Hamming errors");
        sub->add_option("--trials", opt.trials, "Monte Carlo trials per point")->check(CLI::PositiveNumber);
        sub->add_option("--seed", opt.seed, "Master seed");
        sub->add_option("--threads", opt.threads, "Worker threads (output does not depend on it)");
        sub->add_option("--design", opt.design, "bernoulli or rows:<bits>,<bits>,...");
    };

    auto* bounds = app.add_subcommand("bounds", "Evaluate every applicable threshold and lower bound");
    add_problem(bounds);
    add_common(bounds);
    bounds->add_option("--q", opt.bounds_q, "Bernoulli design inclusion probability");
    bounds->add_option("--sigma2", opt.sigma2, "Gaussian noise level");
    bounds->add_option("--qmax", opt.qmax, "Allowed Hamming errors");
    bounds->add_option("--delta", opt.delta, "Target error probability")->check(CLI::Range(0.0, 1.0));

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of the ML error probability");
    auto* sweep = app.add_subcommand("sweep", "Error probability across a range of test counts");
    auto* oracle = app.add_subcommand("oracle", "Exact noiseless error probability by enumeration");
    for (auto* sub : {simulate, sweep, oracle}) {
        add_problem(sub);
        add_sim(sub);
        add_common(sub);
    }

    auto* figure1 = app.add_subcommand("figure1", "f(r) curves for uniform, non-uniform and random pi");
    figure1->add_option("--d", opt.d, "Number of labels")->check(CLI::Range(2, 20));
    figure1->add_option("--random", opt.random, "Number of random simplex draws");
    figure1->add_option("--seed", opt.seed, "Seed for the random draws");
    add_common(figure1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::usage;
    }
    if (opt.format.empty()) opt.format = (figure1->parsed() || sweep->parsed()) ? "csv" : "json";

    try {
        if (bounds->parsed()) return cmd_bounds(opt);
        if (simulate->parsed()) return cmd_simulate(opt);
        if (sweep->parsed()) return cmd_sweep(opt);
        if (oracle->parsed()) return cmd_oracle(opt);
        if (figure1->parsed()) return cmd_figure1(opt);
    } catch (const GuardExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::guard;
    } catch (const QuadratureError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::numeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return cli::usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::failure;
    }
    return cli::usage;
}
