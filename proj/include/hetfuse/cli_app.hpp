#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hetfuse/reporting.hpp"
#include "hetfuse/simulation.hpp"

namespace hetfuse::cli {

inline FusionMethod parse_method(const std::string& s) {
    if (s == "cf") return FusionMethod::CF;
    if (s == "fcf") return FusionMethod::FCF;
    if (s == "bdf") return FusionMethod::BDF;
    if (s == "abdf") return FusionMethod::ApproxBDF;
    if (s == "hscf") return FusionMethod::HSCF;
    throw ConfigError("unknown fusion method '" + s + "' (expected cf,fcf,bdf,abdf,hscf)");
}

inline WindowPolicy parse_policy(const std::string& s) {
    if (s == "full") return WindowPolicy::FullHistory;
    if (s == "cons1") return WindowPolicy::Conservative1;
    if (s == "plain1") return WindowPolicy::Plain1;
    throw ConfigError("unknown window policy '" + s + "' (expected full,cons1,plain1)");
}

inline ScenarioConfig load_scenario(const std::string& preset, const std::string& config_path) {
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot open config file '" + config_path + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("cannot parse '" + config_path + "': " + e.what());
        }
        return scenario_from_json(j);
    }
    return scenario_by_name(preset);
}

inline int cmd_account(const ScenarioConfig& config, std::ostream& os) {
    os << "scenario: " << config.name << "\n";
    const std::vector<FusionMethod> methods = {FusionMethod::CF, FusionMethod::BDF,
                                               FusionMethod::ApproxBDF, FusionMethod::HSCF};
    char line[160];
    std::snprintf(line, sizeof(line), "%-10s %14s %10s %8s %14s\n", "method", "bytes/round",
                  "%CF", "states", "compute %CF");
    os << line;
    for (FusionMethod m : methods) {
        const AccountingRow row = scenario_accounting(config, m);
        std::snprintf(line, sizeof(line), "%-10s %14lld %10.4g %8d %14.4g\n",
                      method_name(m).c_str(), static_cast<long long>(row.bytes_per_round),
                      row.pct_of_cf, row.max_agent_states, row.compute_pct_of_cf);
        os << line;
    }
    return 0;
}

inline int cmd_validate(const ScenarioConfig& config, std::ostream& os) {
    const auto violations = validate_topology(config.topology());
    if (violations.empty()) {
        os << "scenario '" << config.name << "': topology ok ("
           << config.topology().full_set().total_dim() << " global states)\n";
        return 0;
    }
    for (const auto& v : violations) os << "violation: " << v << "\n";
    return 2;
}

inline int cmd_run(const ScenarioConfig& config, const std::vector<std::string>& method_names,
                   int runs, std::uint64_t seed, const std::string& window,
                   const std::string& out_dir, std::ostream& os) {
    if (config.accounting_only)
        throw ConfigError("scenario '" + config.name +
                          "' has no sensor specification; it supports `account` only");
    std::vector<MethodSpec> specs;
    for (const auto& name : method_names) {
        const FusionMethod m = parse_method(name);
        specs.push_back({m, window.empty() ? default_policy(m) : parse_policy(window)});
    }
    if (specs.empty()) throw ConfigError("no fusion methods requested");

    std::filesystem::create_directories(out_dir);
    nlohmann::json summary;
    summary["scenario"] = config.name;
    summary["runs"] = runs;
    summary["seed"] = seed;
    summary["steps"] = config.steps;

    bool numerical_failure = false;
    for (const auto& spec : specs) {
        const auto batch = monte_carlo(config, spec, runs, seed);
        write_metrics_csv(out_dir + "/metrics_" + method_name(spec.method) + ".csv", batch);
        const MethodSummary ms = summarize(batch);
        summary["methods"][spec.label()] = summary_json(config, spec, ms);
        if (ms.failed_runs > 0) {
            numerical_failure = true;
            for (const auto& rm : batch)
                if (rm.failed)
                    std::cerr << "run " << rm.run_index << " (" << spec.label()
                              << ") failed: " << rm.error << "\n";
        }
        os << spec.label() << ": " << runs - ms.failed_runs << "/" << runs
           << " runs ok, min eig vs centralized " << ms.global_min_eig << "\n";
    }
    std::ofstream out(out_dir + "/summary.json", std::ios::binary);
    out << summary.dump(2) << "\n";
    os << "wrote " << out_dir << "/summary.json\n";
    return numerical_failure ? 3 : 0;
}

inline int main(int argc, const char* const* argv) {
    CLI::App app{"hetfuse: heterogeneous decentralized fusion simulator"};
    app.require_subcommand(1);

    std::string scenario = "static-5x6";
    std::string config_path;
    std::string methods = "bdf,hscf";
    std::string window;
    std::string out_dir = "out";
    int runs = 1;
    std::uint64_t seed = 0;

    auto add_scenario_opts = [&](CLI::App* sub) {
        sub->add_option("--scenario", scenario, "preset name");
        sub->add_option("--config", config_path, "scenario JSON path (overrides --scenario)");
    };

    CLI::App* run = app.add_subcommand("run", "simulate Monte-Carlo batches");
    add_scenario_opts(run);
    run->add_option("--methods", methods, "comma-separated: cf,fcf,bdf,abdf,hscf");
    run->add_option("--runs", runs, "Monte-Carlo runs")->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "master seed");
    run->add_option("--window", window, "window policy: full|cons1|plain1");
    run->add_option("--out", out_dir, "output directory");

    CLI::App* account = app.add_subcommand("account", "analytic communication/computation table");
    add_scenario_opts(account);

    CLI::App* validate = app.add_subcommand("validate", "topology assumption checks");
    add_scenario_opts(validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const ScenarioConfig config = load_scenario(scenario, config_path);
        if (run->parsed()) {
            std::vector<std::string> names;
            std::stringstream ss(methods);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) names.push_back(item);
            return cmd_run(config, names, runs, seed, window, out_dir, std::cout);
        }
        if (account->parsed()) return cmd_account(config, std::cout);
        if (validate->parsed()) return cmd_validate(config, std::cout);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const FusionError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

} // namespace hetfuse::cli
