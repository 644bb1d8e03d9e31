#pragma once

//
// Per-step decay table for an extraction trace, re-checking every proved
// envelope from the recorded numbers alone.
//

#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "greedy.hpp"

namespace wpc {

// Relative slack applied to every envelope check.
inline constexpr double bound_slack = 1e-9;

struct DecayRow
{
    std::size_t k = 0;
    std::string node;
    double remainder_trace = 0.0;
    double remainder_hs = 0.0;
    double bound_trace = 0.0;
    double bound_hs = 0.0;
    std::optional<double> gamma;

    bool monotone_ok = true;       // remainders nonincreasing
    bool difference_ok = true;          // ||A - D||^2 <= ||A||^2 - ||D||^2
    bool trace_envelope_ok = true; // tr R^(k) <= (1 - 1/N)^k tr R
    bool trace_step_ok = true;     // tr R^(k) <= (1 - 1/N) tr R^(k-1)
    bool hs_step_ok = true;        // ||R^(k)||^2 <= (1 - 1/(gamma N)) ||R^(k-1)||^2
    bool hs_uniform_ok = true;     // ||R^(k)||^2 <= (1 - 1/N^2)^k ||R||^2
    bool gamma_ok = true;          // 1 <= gamma <= N

    bool bound_satisfied() const
    {
        return monotone_ok && difference_ok && trace_envelope_ok && trace_step_ok && hs_step_ok &&
               hs_uniform_ok && gamma_ok;
    }

    // Name of the first failed check, empty when all pass.
    std::string first_failure() const
    {
        if (!monotone_ok)
            return "monotone remainder";
        if (!difference_ok)
            return "HS difference inequality";
        if (!trace_envelope_ok)
            return "trace envelope";
        if (!trace_step_ok)
            return "trace one-step factor";
        if (!hs_step_ok)
            return "HS one-step factor";
        if (!hs_uniform_ok)
            return "HS uniform envelope";
        if (!gamma_ok)
            return "coherence range";
        return {};
    }
};

struct DecayReport
{
    std::vector<DecayRow> rows;
    std::optional<std::size_t> first_violation; // step k
    std::string violated_check;

    bool ok() const { return !first_violation.has_value(); }

    std::string summary() const
    {
        if (rows.empty())
            return "no steps";
        if (ok())
            return std::to_string(rows.size()) + " steps, all bounds satisfied";
        return "step " + std::to_string(*first_violation) + " violates the " + violated_check;
    }
};

inline DecayReport decay_report(const ExtractionTrace& tr)
{
    DecayReport rep;
    const double nn = double(tr.node_count);
    const double init_tr = tr.initial_trace;
    const double init_hs2 = tr.initial_hs * tr.initial_hs;
    double prev_tr = init_tr;
    double prev_hs2 = init_hs2;

    for (const auto& s : tr.steps) {
        DecayRow row;
        row.k = s.k;
        row.node = s.node.label();
        row.remainder_trace = s.remainder_trace;
        row.remainder_hs = s.remainder_hs;
        row.bound_trace = s.bound_trace;
        row.bound_hs = s.bound_hs;
        row.gamma = s.gamma;

        const double rem_hs2 = s.remainder_hs * s.remainder_hs;
        row.monotone_ok = s.remainder_trace <= prev_tr * (1.0 + bound_slack) + 1e-15 * init_tr &&
                          rem_hs2 <= prev_hs2 * (1.0 + bound_slack) + 1e-30 * init_hs2;
        row.difference_ok = rem_hs2 <= prev_hs2 - s.extracted_hs * s.extracted_hs + bound_slack * prev_hs2;

        if (tr.mode == ExtractionMode::trace_greedy) {
            row.trace_envelope_ok = s.remainder_trace <= s.bound_trace + bound_slack * init_tr;
            row.trace_step_ok = s.remainder_trace <= (1.0 - 1.0 / nn) * prev_tr + bound_slack * prev_tr;
        }
        if (tr.mode == ExtractionMode::hs_greedy) {
            const double g = s.gamma.value_or(nn);
            row.hs_step_ok = rem_hs2 <= (1.0 - 1.0 / (g * nn)) * prev_hs2 + bound_slack * prev_hs2;
            row.hs_uniform_ok = rem_hs2 <= s.bound_hs * s.bound_hs + bound_slack * init_hs2;
            row.gamma_ok = s.gamma && *s.gamma >= 1.0 - bound_slack && *s.gamma <= nn + bound_slack;
        }

        if (!row.bound_satisfied() && !rep.first_violation) {
            rep.first_violation = s.k;
            rep.violated_check = row.first_failure();
        }
        prev_tr = s.remainder_trace;
        prev_hs2 = rem_hs2;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

inline nlohmann::json decay_report_json(const ExtractionTrace& tr)
{
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : tr.steps) {
        nlohmann::json gamma = s.gamma ? nlohmann::json(*s.gamma) : nlohmann::json(nullptr);
        steps.push_back({{"k", s.k},
                         {"node", s.node.label()},
                         {"extracted_trace", s.extracted_trace},
                         {"extracted_hs", s.extracted_hs},
                         {"remainder_trace", s.remainder_trace},
                         {"remainder_hs", s.remainder_hs},
                         {"gamma", gamma},
                         {"bound_trace", s.bound_trace},
                         {"bound_hs", s.bound_hs}});
    }
    const DecayReport rep = decay_report(tr);
    nlohmann::json summary = {{"steps", tr.steps.size()}, {"bounds_ok", rep.ok()}, {"text", rep.summary()}};
    if (rep.first_violation) {
        summary["first_violation"] = *rep.first_violation;
        summary["violated_check"] = rep.violated_check;
    }
    return {{"mode", to_string(tr.mode)},
            {"depth", tr.depth ? nlohmann::json(*tr.depth) : nlohmann::json(nullptr)},
            {"N_n", tr.node_count},
            {"initial", {{"trace", tr.initial_trace}, {"hs", tr.initial_hs}}},
            {"steps", steps},
            {"summary", summary}};
}

// Shortest representation that round-trips, independent of locale.
inline std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string decay_report_csv(const ExtractionTrace& tr)
{
    std::ostringstream out;
    out << "k,node,extracted_trace,extracted_hs,remainder_trace,remainder_hs,gamma,bound_trace,bound_hs\n";
    for (const auto& s : tr.steps) {
        out << s.k << ',' << s.node.label() << ',' << format_double(s.extracted_trace) << ','
            << format_double(s.extracted_hs) << ',' << format_double(s.remainder_trace) << ','
            << format_double(s.remainder_hs) << ',' << (s.gamma ? format_double(*s.gamma) : "") << ','
            << format_double(s.bound_trace) << ',' << format_double(s.bound_hs) << '\n';
    }
    return out.str();
}

} // namespace wpc
