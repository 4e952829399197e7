#pragma once
// Argument parsing helpers for the pooled CLI, kept separate so tests can
// exercise them without spawning the binary.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pooled/experiments.hpp"
#include "pooled/model.hpp"

namespace pooled::cli {

enum ExitCode : int { ok = 0, failure = 1, usage = 2, guard = 3, numeric = 4 };

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return parts;
}

inline double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a number: '" + s + "'");
    }
    if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

inline long long parse_integer(const std::string& s) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("not an integer: '" + s + "'");
    }
    if (used != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
    return v;
}

/// "0.5,0.5", "uniform:d" or "fig1".
inline Proportions parse_pi(const std::string& text) {
    if (text == "fig1") return figure1_nonuniform();
    if (text.rfind("uniform:", 0) == 0) {
        const auto d = parse_integer(text.substr(8));
        if (d < 2) throw std::invalid_argument("uniform:d needs d >= 2");
        return Proportions::uniform(static_cast<int>(d));
    }
    std::vector<double> values;
    for (const auto& part : split(text, ',')) values.push_back(parse_double(part));
    return Proportions(std::move(values));
}

/// "7" or "a:b" (inclusive).
inline std::vector<std::size_t> parse_range(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() > 2) throw std::invalid_argument("range must be 'n' or 'a:b'");
    const auto lo = parse_integer(parts.front());
    const auto hi = parts.size() == 2 ? parse_integer(parts.back()) : lo;
    if (lo < 0 || hi < lo) throw std::invalid_argument("range needs 0 <= a <= b");
    std::vector<std::size_t> out;
    for (auto n = lo; n <= hi; ++n) out.push_back(static_cast<std::size_t>(n));
    return out;
}

/// "rows:1100,0011" -> explicit design; "bernoulli" -> nullopt.
inline std::optional<TestDesign> parse_design(const std::string& text, std::size_t p) {
    if (text == "bernoulli") return std::nullopt;
    if (text.rfind("rows:", 0) != 0) throw std::invalid_argument("design must be 'bernoulli' or 'rows:<bits>,<bits>,...'");
    const std::string body = text.substr(5);
    std::vector<std::vector<std::uint8_t>> rows;
    if (!body.empty()) {
        for (const auto& bits : split(body, ',')) {
            std::vector<std::uint8_t> row;
            for (char c : bits) {
                if (c != '0' && c != '1') throw std::invalid_argument("design rows must contain only 0 and 1");
                row.push_back(static_cast<std::uint8_t>(c - '0'));
            }
            if (row.size() != p) throw std::invalid_argument("design row '" + bits + "' must have length p");
            rows.push_back(std::move(row));
        }
    }
    return TestDesign(p, std::move(rows));
}

inline NoiseModel parse_noise(const std::string& kind, std::optional<double> sigma2) {
    if (kind == "none") return Noiseless{};
    if (!sigma2) throw std::invalid_argument("--noise " + kind + " requires --sigma2");
    if (kind == "gaussian") return Gaussian{*sigma2};
    if (kind == "clipped") return ClippedGaussian{*sigma2};
    throw std::invalid_argument("--noise must be none, gaussian or clipped");
}

}  // namespace pooled::cli
