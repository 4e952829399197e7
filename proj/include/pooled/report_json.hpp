#pragma once
// JSON encodings for reports and sweep results (nlohmann::json).
// Field names are part of the CLI contract; see docs/schema.json.

#include "json.hpp"

#include "pooled/bounds.hpp"
#include "pooled/experiments.hpp"

namespace pooled {

inline nlohmann::json to_json(const BoundReport& rep) {
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& [k, v] : rep.inputs) inputs[k] = v;
    nlohmann::json details = nlohmann::json::object();
    for (const auto& [k, v] : rep.details) details[k] = v;
    return {
        {"name", rep.name},
        {"n_bound", rep.n_bound},
        {"argmax", rep.argmax},
        {"regime_note", rep.regime_note},
        {"inputs", inputs},
        {"status", to_string(rep.status)},
        {"details", details},
    };
}

inline nlohmann::json to_json(const PeEstimate& e) {
    return {{"pe_hat", e.pe_hat}, {"ci_low", e.ci_low}, {"ci_high", e.ci_high},
            {"trials", e.trials}, {"failures", e.failures}};
}

inline nlohmann::json to_json(const SweepResult& s) {
    nlohmann::json est = nlohmann::json::array();
    for (const auto& e : s.estimates) est.push_back(to_json(e));
    return {
        {"n_grid", s.n_grid},
        {"estimates", est},
        {"n_star_formula", s.n_star_formula},
        {"n_cross", s.n_cross ? nlohmann::json(*s.n_cross) : nlohmann::json(nullptr)},
        {"trend", {{"statistic", s.trend.statistic}, {"p_value", s.trend.p_value}}},
    };
}

inline nlohmann::json to_json(const OracleResult& o) {
    return {{"pe_exact", o.pe_exact}, {"pe_unique", o.pe_unique},
            {"candidates_total", o.candidates_total}, {"classes", o.classes}};
}

}  // namespace pooled
