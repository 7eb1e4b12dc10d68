#pragma once

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetfuse/metrics.hpp"
#include "hetfuse/simulation.hpp"

namespace hetfuse {

/// Round-trip-exact double formatting so reruns are byte-identical.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_metrics_csv(const std::string& path, const std::vector<RunMetrics>& runs) {
    std::ofstream out(path, std::ios::binary);
    out << "run,step,agent,nees,rmse_contrib,min_eig_vs_cent,bytes_sent\n";
    for (const auto& rm : runs) {
        if (rm.failed) continue;
        for (std::size_t k = 0; k < rm.records.size(); ++k)
            for (std::size_t a = 0; a < rm.records[k].size(); ++a) {
                const auto& r = rm.records[k][a];
                out << rm.run_index << ',' << (k + 1) << ',' << a << ',' << fmt_double(r.nees)
                    << ',' << fmt_double(r.err_sq_relevant) << ','
                    << fmt_double(r.min_eig_vs_cent) << ',' << r.bytes_sent << '\n';
            }
    }
}

struct MethodSummary {
    int failed_runs = 0;
    std::vector<double> in_bounds_fraction;  // per agent
    double cent_in_bounds_fraction = 0.0;
    double global_min_eig = 0.0;
    std::int64_t bytes_per_run = 0;
    std::vector<std::vector<double>> rmse_per_agent;  // [agent][step]
    std::vector<int> agent_dof;
    int cent_dof = 0;
};

/// Per-step mean-NEES test against chi-square bounds, PSD conservativeness
/// and RMSE aggregation over one method's Monte-Carlo batch.
inline MethodSummary summarize(const std::vector<RunMetrics>& runs, double alpha = 0.05) {
    MethodSummary s;
    std::vector<const RunMetrics*> ok;
    for (const auto& r : runs)
        if (r.failed)
            ++s.failed_runs;
        else
            ok.push_back(&r);
    if (ok.empty()) return s;

    const int steps = static_cast<int>(ok.front()->records.size());
    const int agents = static_cast<int>(ok.front()->records.front().size());
    const int m = static_cast<int>(ok.size());
    s.agent_dof = ok.front()->agent_dof;
    s.cent_dof = ok.front()->cent_dof;

    s.in_bounds_fraction.assign(agents, 0.0);
    s.rmse_per_agent.assign(agents, std::vector<double>(steps, 0.0));
    s.global_min_eig = std::numeric_limits<double>::infinity();
    s.bytes_per_run = 0;

    for (int a = 0; a < agents; ++a) {
        const auto [lo, hi] = nees_bounds(m, s.agent_dof[a], alpha);
        int inside = 0;
        for (int k = 0; k < steps; ++k) {
            double mean_nees = 0.0, sq = 0.0;
            std::int64_t n_rel = 0;
            for (const auto* r : ok) {
                const auto& rec = r->records[k][a];
                mean_nees += rec.nees;
                sq += rec.err_sq_relevant;
                n_rel = rec.n_relevant;
                s.global_min_eig = std::min(s.global_min_eig, rec.min_eig_vs_cent);
            }
            mean_nees /= m;
            if (mean_nees >= lo && mean_nees <= hi) ++inside;
            s.rmse_per_agent[a][k] = std::sqrt(sq / (static_cast<double>(m) * n_rel));
        }
        s.in_bounds_fraction[a] = static_cast<double>(inside) / steps;
    }
    {
        const auto [lo, hi] = nees_bounds(m, s.cent_dof, alpha);
        int inside = 0;
        for (int k = 0; k < steps; ++k) {
            double mean_nees = 0.0;
            for (const auto* r : ok) mean_nees += r->cent_nees[k];
            mean_nees /= m;
            if (mean_nees >= lo && mean_nees <= hi) ++inside;
        }
        s.cent_in_bounds_fraction = static_cast<double>(inside) / steps;
    }
    for (int k = 0; k < steps; ++k)
        for (int a = 0; a < agents; ++a) s.bytes_per_run += ok.front()->records[k][a].bytes_sent;
    return s;
}

inline nlohmann::json summary_json(const ScenarioConfig& c, const MethodSpec& spec,
                                   const MethodSummary& s) {
    nlohmann::json j;
    j["method"] = method_name(spec.method);
    j["window"] = policy_name(spec.policy);
    j["failed_runs"] = s.failed_runs;
    j["nees_in_bounds_fraction"] = s.in_bounds_fraction;
    j["centralized_nees_in_bounds_fraction"] = s.cent_in_bounds_fraction;
    j["min_eig_vs_centralized"] = s.global_min_eig;
    j["bytes_per_run"] = s.bytes_per_run;
    j["rmse_per_agent"] = s.rmse_per_agent;
    const AccountingRow row = scenario_accounting(c, spec.method);
    j["accounting"] = {{"bytes_per_round", row.bytes_per_round},
                       {"pct_of_cf", row.pct_of_cf},
                       {"max_agent_states", row.max_agent_states},
                       {"compute_pct_of_cf", row.compute_pct_of_cf}};
    return j;
}

} // namespace hetfuse
