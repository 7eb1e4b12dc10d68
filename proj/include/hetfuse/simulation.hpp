#pragma once

#include <atomic>
#include <cstdlib>
#include <map>
#include <random>
#include <thread>
#include <utility>
#include <vector>

#include "hetfuse/fusion.hpp"
#include "hetfuse/metrics.hpp"
#include "hetfuse/scenario.hpp"

namespace hetfuse {

enum class WindowPolicy { FullHistory, Conservative1, Plain1 };

inline std::string policy_name(WindowPolicy p) {
    switch (p) {
        case WindowPolicy::FullHistory: return "full";
        case WindowPolicy::Conservative1: return "cons1";
        case WindowPolicy::Plain1: return "plain1";
    }
    return "?";
}

/// Conservative filtering is what makes BDF-style marginalization safe;
/// the heterogeneous-state and homogeneous variants filter plainly.
inline WindowPolicy default_policy(FusionMethod m) {
    switch (m) {
        case FusionMethod::BDF:
        case FusionMethod::ApproxBDF: return WindowPolicy::Conservative1;
        default: return WindowPolicy::Plain1;
    }
}

struct MethodSpec {
    FusionMethod method;
    WindowPolicy policy;
    std::string label() const { return method_name(method) + "-" + policy_name(policy); }
};

/// Ground truth and every measurement of one Monte-Carlo run, drawn up
/// front so every fusion method processes identical data.
struct RunData {
    // truth[tag][target]; static scenarios hold a single constant tag row
    std::vector<std::vector<VectorXd>> truth;
    std::vector<VectorXd> bias_truth;         // per agent
    std::vector<VectorXd> target_prior_mean;  // per target

    struct AgentMeas {
        std::vector<std::pair<int, Eigen::Vector2d>> target_meas;  // (target, y)
        Eigen::Vector2d landmark;
    };
    std::vector<std::vector<AgentMeas>> meas;  // [step-1][agent]

    const VectorXd& truth_at(int target, int tag) const {
        return truth[truth.size() == 1 ? 0 : static_cast<std::size_t>(tag)][target];
    }
};

namespace detail {

inline VectorXd draw_normal(std::mt19937_64& rng, const VectorXd& sqrt_diag) {
    std::normal_distribution<double> n01(0.0, 1.0);
    VectorXd out(sqrt_diag.size());
    for (int i = 0; i < out.size(); ++i) out(i) = sqrt_diag(i) * n01(rng);
    return out;
}

inline VectorXd prior_sqrt_diag(const ScenarioConfig& c) {
    if (c.target_kind == TargetKind::Static2D) {
        VectorXd d(2);
        d << std::sqrt(c.priors.target_pos_var), std::sqrt(c.priors.target_pos_var);
        return d;
    }
    VectorXd d(4);
    d << std::sqrt(c.priors.target_pos_var), std::sqrt(c.priors.target_vel_var),
        std::sqrt(c.priors.target_pos_var), std::sqrt(c.priors.target_vel_var);
    return d;
}

inline Eigen::Vector2d position_of(const VectorXd& target_state) {
    if (target_state.size() == 2) return target_state;
    return {target_state(0), target_state(2)};
}

} // namespace detail

inline RunData make_run_data(const ScenarioConfig& c, std::uint64_t master_seed, int run_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed & 0xffffffffu),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(run_index)};
    std::mt19937_64 rng(seq);

    RunData rd;
    const int td = c.target_dim();
    const VectorXd prior_sd = detail::prior_sqrt_diag(c);
    const Eigen::Vector2d bias_sd{std::sqrt(c.priors.bias_var), std::sqrt(c.priors.bias_var)};

    // initial truth and prior means (prior mean = truth + drawn offset)
    std::vector<VectorXd> truth0(c.n_targets);
    for (int t = 0; t < c.n_targets; ++t) {
        VectorXd x0 = VectorXd::Zero(td);
        if (td == 2)
            x0 = c.target_positions[t];
        else {
            x0(0) = c.target_positions[t](0);
            x0(2) = c.target_positions[t](1);
        }
        truth0[t] = x0;
        rd.target_prior_mean.push_back(x0 + detail::draw_normal(rng, prior_sd));
    }
    for (int a = 0; a < c.n_agents; ++a)
        rd.bias_truth.push_back(detail::draw_normal(rng, bias_sd));

    if (c.dynamic()) {
        const LinearDynamics dyn = c.dynamics();
        const VectorXd q_sd = dyn.Q.diagonal().cwiseSqrt();
        rd.truth.resize(c.steps + 1);
        rd.truth[0] = truth0;
        for (int k = 1; k <= c.steps; ++k) {
            rd.truth[k].resize(c.n_targets);
            const Eigen::Vector2d u = dyn.control.at(k, dyn.dt);
            for (int t = 0; t < c.n_targets; ++t)
                rd.truth[k][t] =
                    dyn.F * rd.truth[k - 1][t] + dyn.G * u + detail::draw_normal(rng, q_sd);
        }
    } else {
        rd.truth.push_back(truth0);
    }

    rd.meas.resize(c.steps);
    for (int k = 1; k <= c.steps; ++k) {
        rd.meas[k - 1].resize(c.n_agents);
        const int tag = c.dynamic() ? k : 0;
        for (int a = 0; a < c.n_agents; ++a) {
            auto& am = rd.meas[k - 1][a];
            const auto& spec = c.agents[a];
            for (int t : spec.tracked_targets) {
                const Eigen::Vector2d noise =
                    detail::draw_normal(rng, spec.r_target.cwiseSqrt());
                am.target_meas.emplace_back(
                    t, Eigen::Vector2d(detail::position_of(rd.truth_at(t, tag)) +
                                       Eigen::Vector2d(rd.bias_truth[a]) + noise));
            }
            am.landmark = Eigen::Vector2d(rd.bias_truth[a]) +
                          Eigen::Vector2d(detail::draw_normal(rng, spec.r_landmark.cwiseSqrt()));
        }
    }
    return rd;
}

/// Shared prior in information form over the given base variables
/// (block-diagonal: independent targets and biases).
inline InfoGaussian prior_info(const ScenarioConfig& c, const RunData& rd,
                               const VariableSet& vars) {
    InfoGaussian g = InfoGaussian::zero(vars);
    const VectorXd prior_sd = detail::prior_sqrt_diag(c);
    for (const auto& v : vars.vars()) {
        const int off = vars.offset_of(v);
        if (v.kind == VarKind::TargetState) {
            for (int i = 0; i < v.dim; ++i) {
                const double var = prior_sd(i) * prior_sd(i);
                g.lambda(off + i, off + i) = 1.0 / var;
                g.zeta(off + i) = rd.target_prior_mean[v.entity](i) / var;
            }
        } else {
            for (int i = 0; i < v.dim; ++i)
                g.lambda(off + i, off + i) = 1.0 / c.priors.bias_var;
            // bias prior mean is zero
        }
    }
    return g;
}

struct NetworkState {
    FusionMethod method;
    WindowPolicy policy;
    TreeTopology topo;
    std::vector<AgentState> agents;
};

inline NetworkState make_network(const ScenarioConfig& c, FusionMethod method,
                                 WindowPolicy policy, const RunData& rd) {
    NetworkState net;
    net.method = method;
    net.policy = policy;
    net.topo = c.topology();

    const VariableSet full_base = net.topo.full_set();
    for (int a = 0; a < c.n_agents; ++a) {
        AgentState st;
        st.id = a;
        st.method = method;
        st.observed_targets = c.agents[a].tracked_targets;
        const VariableSet scope = full_state_scope(method) ? full_base : c.task_base(a);
        st.local = prior_info(c, rd, scope);
        net.agents.push_back(std::move(st));
    }
    for (const auto& [i, j] : net.topo.edges()) {
        ChannelState ch;
        ch.edge = {i, j};
        ch.channel_vars = channel_base_set(net.topo, method, i, j);
        ch.common = prior_info(c, rd, ch.channel_vars);
        net.agents[i].channels.emplace(j, ch);
        net.agents[j].channels.emplace(i, ch);
        if (method == FusionMethod::FCF) net.agents[i].fcf_joint_toward.push_back(j);
    }
    return net;
}

/// Measurement models for one agent at a given time tag.
inline MeasModel target_meas_model(const ScenarioConfig& c, int agent, int target, int tag) {
    MeasModel m;
    m.agent = agent;
    m.target = target;
    m.measured = VariableSet({c.target_var(target, tag), c.bias_var_of(agent)});
    const int td = c.target_dim();
    MatrixXd h = MatrixXd::Zero(2, td + 2);
    if (td == 2) {
        h.block(0, 0, 2, 2).setIdentity();
    } else {
        h(0, 0) = 1.0;  // east position
        h(1, 2) = 1.0;  // north position
    }
    h.block(0, td, 2, 2).setIdentity();  // additive bias
    m.H = h;
    m.R = c.agents[agent].r_target.asDiagonal();
    return m;
}

inline MeasModel landmark_meas_model(const ScenarioConfig& c, int agent) {
    MeasModel m;
    m.agent = agent;
    m.measured = VariableSet({c.bias_var_of(agent)});
    m.H = MatrixXd::Identity(2, 2);
    m.R = c.agents[agent].r_landmark.asDiagonal();
    return m;
}

namespace detail {

inline void apply_measurements(InfoGaussian& state, const ScenarioConfig& c,
                               const RunData::AgentMeas& am, int agent, int tag) {
    for (const auto& [t, y] : am.target_meas) {
        if (!state.vars.contains(c.target_var(t, tag))) continue;
        state = info_update(state, target_meas_model(c, agent, t, tag), y);
    }
    state = info_update(state, landmark_meas_model(c, agent), am.landmark);
}

inline std::vector<int> scope_targets(const VariableSet& vars) {
    std::vector<int> out;
    for (const auto& v : vars.vars())
        if (v.kind == VarKind::TargetState) {
            bool seen = false;
            for (int t : out) seen = seen || (t == v.entity);
            if (!seen) out.push_back(v.entity);
        }
    return out;
}

} // namespace detail

/// One full sweep of the per-step algorithm: propagate local and channel
/// states, filter the window per policy, apply measurements, exchange
/// messages built from pre-fusion states, fuse, and update the channels.
/// Returns the per-agent bytes sent this step.
inline std::vector<std::int64_t> run_step(NetworkState& net, const ScenarioConfig& c,
                                          const RunData& rd, int step) {
    const int tag = c.dynamic() ? step : 0;
    const LinearDynamics dyn = c.dynamics();

    if (c.dynamic()) {
        for (auto& agent : net.agents) {
            agent.local = ias_predict(agent.local, detail::scope_targets(agent.local.vars), dyn,
                                      step);
            for (auto& [nb, ch] : agent.channels)
                predict_common(ch, dyn, step, net.policy == WindowPolicy::FullHistory);
        }
        if (net.policy != WindowPolicy::FullHistory) {
            for (auto& agent : net.agents) {
                const VariableSet stale = stale_target_vars(agent.local.vars, step);
                if (net.policy == WindowPolicy::Conservative1)
                    agent.local = conservative_marginalize(
                        agent.local, stale, SparsityPattern::bias_pairs(agent.local.vars));
                else
                    agent.local = window_marginalize(agent.local, stale);
            }
        }
    }

    for (auto& agent : net.agents)
        detail::apply_measurements(agent.local, c, rd.meas[step - 1][agent.id], agent.id, tag);

    // assumption 2: all messages leave before any incoming message is fused
    std::map<std::pair<int, int>, Message> msgs;
    std::vector<std::int64_t> bytes(net.agents.size(), 0);
    for (auto& agent : net.agents)
        for (int nb : net.topo.neighbors(agent.id)) {
            Message m = build_message(agent, net.topo, nb, step);
            bytes[agent.id] += message_bytes(m.payload.vars.total_dim());
            msgs.emplace(std::make_pair(agent.id, nb), std::move(m));
        }

    for (auto& agent : net.agents)
        for (int nb : net.topo.neighbors(agent.id))  // ascending sender id
            fuse(agent, net.topo, msgs.at({nb, agent.id}), agent.channels.at(nb));

    for (const auto& [i, j] : net.topo.edges()) {
        const InfoGaussian fm = fused_channel_marginal(net.agents[i].channels.at(j),
                                                       msgs.at({i, j}), msgs.at({j, i}));
        update_common(net.agents[i].channels.at(j), fm);
        update_common(net.agents[j].channels.at(i), fm);
    }
    return bytes;
}

/// Centralized reference: one estimator over the full state conditioned on
/// every agent's measurements; dynamic targets are filtered with plain
/// window-1 marginalization.
struct CentralizedOracle {
    InfoGaussian state;

    static CentralizedOracle init(const ScenarioConfig& c, const RunData& rd) {
        CentralizedOracle o;
        o.state = prior_info(c, rd, c.topology().full_set());
        return o;
    }

    void step(const ScenarioConfig& c, const RunData& rd, int step) {
        const int tag = c.dynamic() ? step : 0;
        if (c.dynamic()) {
            state = ias_predict(state, detail::scope_targets(state.vars), c.dynamics(), step);
            state = window_marginalize(state, stale_target_vars(state.vars, step));
        }
        for (int a = 0; a < c.n_agents; ++a)
            detail::apply_measurements(state, c, rd.meas[step - 1][a], a, tag);
    }
};

/// Stacks the true values of the given current-time variables.
inline VectorXd truth_stack(const VariableSet& vars, const RunData& rd, int tag) {
    VectorXd out(vars.total_dim());
    int off = 0;
    for (const auto& v : vars.vars()) {
        if (v.kind == VarKind::TargetState)
            out.segment(off, v.dim) = rd.truth_at(v.entity, tag);
        else
            out.segment(off, v.dim) = rd.bias_truth[v.entity];
        off += v.dim;
    }
    return out;
}

/// Runs one Monte-Carlo realization of one method and fills the metric
/// records against a centralized reference computed on the same data.
inline RunMetrics simulate_run(const ScenarioConfig& c, const MethodSpec& spec,
                               std::uint64_t master_seed, int run_index) {
    RunMetrics rm;
    rm.run_index = run_index;
    try {
        const RunData rd = make_run_data(c, master_seed, run_index);
        NetworkState net = make_network(c, spec.method, spec.policy, rd);
        CentralizedOracle cent = CentralizedOracle::init(c, rd);

        rm.records.resize(c.steps);
        rm.cent_nees.resize(c.steps);
        rm.agent_dof.resize(c.n_agents);

        for (int k = 1; k <= c.steps; ++k) {
            const int tag = c.dynamic() ? k : 0;
            const auto bytes = run_step(net, c, rd, k);
            cent.step(c, rd, k);

            const VariableSet cent_cur = current_vars(cent.state.vars, tag);
            const MomentGaussian cent_mom = to_moments(
                cent_cur == cent.state.vars ? cent.state : marginalize(cent.state, cent_cur));
            const VectorXd cent_err = cent_mom.mu - truth_stack(cent_cur, rd, tag);
            rm.cent_nees[k - 1] = nees(cent_err, cent_mom.sigma);
            rm.cent_dof = cent_cur.total_dim();

            rm.records[k - 1].resize(c.n_agents);
            for (int a = 0; a < c.n_agents; ++a) {
                const AgentState& agent = net.agents[a];
                const VariableSet cur = current_vars(agent.local.vars, tag);
                const MomentGaussian mom = to_moments(
                    cur == agent.local.vars ? agent.local : marginalize(agent.local, cur));
                const VectorXd err = mom.mu - truth_stack(cur, rd, tag);

                StepAgentRecord rec;
                rec.nees = nees(err, mom.sigma);
                rec.bytes_sent = bytes[a];
                rm.agent_dof[a] = cur.total_dim();

                // locally relevant subset: observed targets plus own bias
                const VariableSet relevant = lift_base(c.task_base(a), cur);
                const auto rel_idx = cur.indices_of(relevant);
                double sq = 0.0;
                for (int idx : rel_idx) sq += err(idx) * err(idx);
                rec.err_sq_relevant = sq;
                rec.n_relevant = static_cast<int>(rel_idx.size());

                const auto cur_in_cent = cent_cur.indices_of(cur);
                const MatrixXd cent_sub = detail::pick(cent_mom.sigma, cur_in_cent, cur_in_cent);
                rec.min_eig_vs_cent = conservativeness(mom.sigma, cent_sub);
                rm.records[k - 1][a] = rec;
            }
        }
    } catch (const FusionError& e) {
        rm.failed = true;
        rm.error = e.what();
    }
    return rm;
}

inline int thread_budget() {
    if (const char* env = std::getenv("HETFUSE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

/// Independent seeded runs dispatched to a worker pool; the result layout
/// depends only on (config, seed, runs), never on the worker count.
inline std::vector<RunMetrics> monte_carlo(const ScenarioConfig& c, const MethodSpec& spec,
                                           int runs, std::uint64_t master_seed) {
    if (runs < 1) throw ConfigError("monte_carlo: runs must be >= 1");
    std::vector<RunMetrics> out(runs);
    const int n_threads = std::min(thread_budget(), runs);
    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            const int idx = next.fetch_add(1);
            if (idx >= runs) break;
            out[idx] = simulate_run(c, spec, master_seed, idx);
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads - 1; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

} // namespace hetfuse
