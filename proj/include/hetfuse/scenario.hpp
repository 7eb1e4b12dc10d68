#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetfuse/dynamics.hpp"
#include "hetfuse/errors.hpp"
#include "hetfuse/topology.hpp"

namespace hetfuse {

enum class TargetKind { Static2D, Dynamic4D };

struct AgentSpec {
    std::vector<int> tracked_targets;
    Eigen::Vector2d r_target{1.0, 1.0};    // diagonal of R^1 (m^2)
    Eigen::Vector2d r_landmark{1.0, 1.0};  // diagonal of R^2 (m^2)
};

struct PriorSpec {
    double target_pos_var = 100.0;  // m^2
    double target_vel_var = 10.0;   // (m/s)^2
    double bias_var = 5.0;          // m^2
};

/// Declarative experiment description: topology, task assignments, target
/// model, noise levels, priors and horizon. Presets cover the tracking
/// scenarios and the three accounting-scale problems.
struct ScenarioConfig {
    std::string name = "custom";
    int n_agents = 0;
    int n_targets = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<AgentSpec> agents;
    TargetKind target_kind = TargetKind::Static2D;
    int bias_dim = 2;
    std::vector<Eigen::Vector2d> target_positions;  // initial east/north truth
    double dt = 1.0;
    double q_scale = 0.08;
    ControlLaw control;
    PriorSpec priors;
    int steps = 50;
    bool accounting_only = false;  // scale presets without sensor specs

    int target_dim() const { return target_kind == TargetKind::Static2D ? 2 : 4; }
    bool dynamic() const { return target_kind == TargetKind::Dynamic4D; }

    LinearDynamics dynamics() const {
        return LinearDynamics::double_integrator_2d(dt, q_scale, control);
    }

    Variable target_var(int t, int tag = 0) const { return Variable::target(t, target_dim(), tag); }
    Variable bias_var_of(int agent) const { return Variable::bias(agent, bias_dim); }

    /// Base-level task set of one agent: tracked targets plus own bias.
    VariableSet task_base(int agent) const {
        std::vector<Variable> vs;
        for (int t : agents.at(agent).tracked_targets) vs.push_back(target_var(t));
        vs.push_back(bias_var_of(agent));
        return VariableSet(std::move(vs));
    }

    TreeTopology topology() const {
        std::vector<VariableSet> tasks;
        tasks.reserve(agents.size());
        for (int a = 0; a < n_agents; ++a) tasks.push_back(task_base(a));
        return TreeTopology(n_agents, edges, std::move(tasks));
    }

    void validate() const {
        if (n_agents <= 0 || static_cast<int>(agents.size()) != n_agents)
            throw ConfigError("scenario '" + name + "': inconsistent agent count");
        for (const auto& a : agents) {
            if (a.tracked_targets.empty())
                throw ConfigError("scenario '" + name + "': agent with no tracked targets");
            for (int t : a.tracked_targets)
                if (t < 0 || t >= n_targets)
                    throw ConfigError("scenario '" + name + "': tracked target out of range");
        }
        if (!accounting_only) {
            if (bias_dim != 2)
                throw ConfigError("scenario '" + name +
                                  "': simulation requires 2-dimensional bias states");
            if (static_cast<int>(target_positions.size()) != n_targets)
                throw ConfigError("scenario '" + name + "': needs one initial position per target");
            for (const auto& a : agents)
                if (a.r_target.minCoeff() <= 0.0 || a.r_landmark.minCoeff() <= 0.0)
                    throw ConfigError("scenario '" + name + "': noise covariances must be PD");
            if (priors.target_pos_var <= 0 || priors.target_vel_var <= 0 || priors.bias_var <= 0)
                throw ConfigError("scenario '" + name + "': prior covariances must be PD");
            if (steps < 1) throw ConfigError("scenario '" + name + "': steps must be >= 1");
        }
        const auto violations = validate_topology(topology());
        if (!violations.empty()) {
            std::string msg = "scenario '" + name + "' topology invalid:";
            for (const auto& v : violations) msg += "\n  - " + v;
            throw ConfigError(msg);
        }
    }
};

namespace presets {

/// Five-agent chain tracking six stationary 2-D targets, with the per-agent
/// assignments and measurement noise levels of the tracking study.
inline ScenarioConfig static_5x6() {
    ScenarioConfig c;
    c.name = "static-5x6";
    c.n_agents = 5;
    c.n_targets = 6;
    c.target_kind = TargetKind::Static2D;
    c.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}};
    c.agents = {
        {{0, 1}, {1.0, 10.0}, {3.0, 3.0}},
        {{1, 2}, {3.0, 3.0}, {3.0, 3.0}},
        {{2, 3, 4}, {4.0, 4.0}, {2.0, 2.0}},
        {{3, 4}, {10.0, 1.0}, {4.0, 4.0}},
        {{4, 5}, {2.0, 2.0}, {5.0, 5.0}},
    };
    c.target_positions = {{0.0, 0.0},  {20.0, 15.0}, {40.0, -5.0},
                          {60.0, 10.0}, {80.0, 0.0},  {100.0, 20.0}};
    c.steps = 50;
    return c;
}

/// Two agents, one dynamic target; noise levels of the first two agents.
inline ScenarioConfig dynamic_2x1() {
    ScenarioConfig c;
    c.name = "dynamic-2x1";
    c.n_agents = 2;
    c.n_targets = 1;
    c.target_kind = TargetKind::Dynamic4D;
    c.edges = {{0, 1}};
    c.agents = {
        {{0}, {1.0, 10.0}, {3.0, 3.0}},
        {{0}, {3.0, 3.0}, {3.0, 3.0}},
    };
    c.target_positions = {{0.0, 0.0}};
    c.steps = 50;
    return c;
}

/// Four agents, five dynamic targets (28 global states), assignments and
/// noise of the first four agents of the tracking study.
inline ScenarioConfig dynamic_4x5() {
    ScenarioConfig c;
    c.name = "dynamic-4x5";
    c.n_agents = 4;
    c.n_targets = 5;
    c.target_kind = TargetKind::Dynamic4D;
    c.edges = {{0, 1}, {1, 2}, {2, 3}};
    c.agents = {
        {{0, 1}, {1.0, 10.0}, {3.0, 3.0}},
        {{1, 2}, {3.0, 3.0}, {3.0, 3.0}},
        {{2, 3, 4}, {4.0, 4.0}, {2.0, 2.0}},
        {{3, 4}, {10.0, 1.0}, {4.0, 4.0}},
    };
    c.target_positions = {{0.0, 0.0}, {20.0, 15.0}, {40.0, -5.0}, {60.0, 10.0}, {80.0, 0.0}};
    c.steps = 50;
    return c;
}

/// Communication/computation scale problems: a chain of n_a agents with
/// 6-state biases and 4-state targets, each agent tracking `per_agent`
/// targets and sharing exactly one with its neighbor.
inline ScenarioConfig table2_scale(const std::string& name, int n_agents, int per_agent) {
    ScenarioConfig c;
    c.name = name;
    c.n_agents = n_agents;
    c.target_kind = TargetKind::Dynamic4D;
    c.bias_dim = 6;
    c.accounting_only = true;
    c.n_targets = n_agents * (per_agent - 1) + 1;
    if (per_agent == 1) c.n_targets = 1;
    for (int a = 0; a + 1 < n_agents; ++a) c.edges.emplace_back(a, a + 1);
    for (int a = 0; a < n_agents; ++a) {
        AgentSpec s;
        const int first = a * (per_agent - 1);
        for (int k = 0; k < per_agent; ++k) s.tracked_targets.push_back(per_agent == 1 ? 0 : first + k);
        c.agents.push_back(s);
    }
    return c;
}

inline ScenarioConfig table2_small() { return table2_scale("table2-small", 2, 1); }
inline ScenarioConfig table2_medium() { return table2_scale("table2-medium", 10, 2); }
inline ScenarioConfig table2_large() { return table2_scale("table2-large", 25, 3); }

} // namespace presets

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
    ScenarioConfig c;
    try {
        c.name = j.value("name", "custom");
        const auto& topo = j.at("topology");
        c.n_agents = topo.at("n_agents").get<int>();
        for (const auto& e : topo.at("edges"))
            c.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());

        const auto& targets = j.at("targets");
        c.n_targets = targets.at("count").get<int>();
        const std::string kind = targets.value("kind", "static-2d");
        if (kind == "static-2d")
            c.target_kind = TargetKind::Static2D;
        else if (kind == "dynamic-4d")
            c.target_kind = TargetKind::Dynamic4D;
        else
            throw ConfigError("unknown target kind '" + kind + "'");
        if (targets.contains("initial_positions"))
            for (const auto& p : targets.at("initial_positions"))
                c.target_positions.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());

        for (const auto& a : j.at("agents")) {
            AgentSpec s;
            for (const auto& t : a.at("tracked")) s.tracked_targets.push_back(t.get<int>());
            if (a.contains("r_target"))
                s.r_target = {a.at("r_target").at(0).get<double>(),
                              a.at("r_target").at(1).get<double>()};
            if (a.contains("r_landmark"))
                s.r_landmark = {a.at("r_landmark").at(0).get<double>(),
                                a.at("r_landmark").at(1).get<double>()};
            c.agents.push_back(s);
        }
        c.bias_dim = j.value("bias_dim", 2);

        if (j.contains("dynamics")) {
            const auto& d = j.at("dynamics");
            c.dt = d.value("dt", 1.0);
            c.q_scale = d.value("q_scale", 0.08);
            if (d.contains("control")) {
                const auto& u = d.at("control");
                c.control.amp_east = u.value("amp_east", 1.0);
                c.control.amp_north = u.value("amp_north", 1.0);
                c.control.freq_east = u.value("freq_east", 0.1);
                c.control.freq_north = u.value("freq_north", 0.1);
            }
        }
        if (j.contains("priors")) {
            const auto& p = j.at("priors");
            c.priors.target_pos_var = p.value("target_pos_var", 100.0);
            c.priors.target_vel_var = p.value("target_vel_var", 10.0);
            c.priors.bias_var = p.value("bias_var", 5.0);
        }
        if (j.contains("sim")) c.steps = j.at("sim").value("steps", 50);
        c.accounting_only = j.value("accounting_only", false);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed scenario config: ") + e.what());
    }
    c.validate();
    return c;
}

inline ScenarioConfig scenario_by_name(const std::string& name) {
    if (name == "static-5x6") return presets::static_5x6();
    if (name == "dynamic-2x1") return presets::dynamic_2x1();
    if (name == "dynamic-4x5") return presets::dynamic_4x5();
    if (name == "table2-small") return presets::table2_small();
    if (name == "table2-medium") return presets::table2_medium();
    if (name == "table2-large") return presets::table2_large();
    throw ConfigError("unknown scenario preset '" + name + "'");
}

} // namespace hetfuse
