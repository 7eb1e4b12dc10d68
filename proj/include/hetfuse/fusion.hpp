#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hetfuse/conservative.hpp"
#include "hetfuse/dynamics.hpp"
#include "hetfuse/info_gaussian.hpp"
#include "hetfuse/topology.hpp"

namespace hetfuse {

enum class FusionMethod { CF, FCF, BDF, ApproxBDF, HSCF };

inline std::string method_name(FusionMethod m) {
    switch (m) {
        case FusionMethod::CF: return "cf";
        case FusionMethod::FCF: return "fcf";
        case FusionMethod::BDF: return "bdf";
        case FusionMethod::ApproxBDF: return "abdf";
        case FusionMethod::HSCF: return "hscf";
    }
    return "?";
}

/// Does the method keep a local pdf over the full global state vector?
/// Only the heterogeneous-state variant restricts itself to the task set.
inline bool full_state_scope(FusionMethod m) { return m != FusionMethod::HSCF; }

/// Window variables whose (kind, entity) identity appears in a base-level
/// set. Base sets come from the topology (untagged targets + biases); the
/// lift picks up every time-tagged copy present in the window.
inline VariableSet lift_base(const VariableSet& base, const VariableSet& window) {
    return window.filtered([&base](const Variable& v) {
        for (const auto& b : base.vars())
            if (b.kind == v.kind && b.entity == v.entity) return true;
        return false;
    });
}

/// Common-information estimate tracked on one tree edge. Both endpoints
/// hold a copy and run identical arithmetic, so the copies stay equal.
struct ChannelState {
    std::pair<int, int> edge;
    VariableSet channel_vars;
    InfoGaussian common;
};

struct Message {
    int sender = -1;
    int receiver = -1;
    int step = 0;
    FusionMethod method = FusionMethod::CF;
    InfoGaussian payload;
};

/// One agent's local estimate, channel filters, and fusion configuration.
struct AgentState {
    int id = -1;
    FusionMethod method = FusionMethod::CF;
    std::vector<int> observed_targets;
    InfoGaussian local;
    std::map<int, ChannelState> channels;  // keyed by neighbor id

    // F-CF only: neighbors toward which this agent is the designated
    // joint sender (sends its full joint; receives the reduced marginal).
    std::vector<int> fcf_joint_toward;

    // step index of the last rebuild-from-task-marginal (BDF/F-CF fusion)
    int rebuilt_at_step = -1;

    bool fcf_sends_joint_to(int neighbor) const {
        for (int n : fcf_joint_toward)
            if (n == neighbor) return true;
        return false;
    }

    /// Task variables within the current window: every copy of an observed
    /// target plus the own bias.
    VariableSet task_vars() const {
        return local.vars.filtered([this](const Variable& v) {
            if (v.kind == VarKind::BiasState) return v.entity == id;
            for (int t : observed_targets)
                if (v.entity == t) return true;
            return false;
        });
    }
};

/// Base-level variable set a message from `sender` to `receiver` covers.
inline VariableSet message_base_set(const TreeTopology& topo, FusionMethod method, int sender,
                                    int receiver, bool fcf_joint_direction = false) {
    switch (method) {
        case FusionMethod::CF:
            return topo.full_set();
        case FusionMethod::FCF:
            return fcf_joint_direction ? topo.full_set()
                                       : topo.subtree_union(sender, receiver, sender);
        case FusionMethod::BDF:
            // task set plus pass-through states = sender-side subtree union
            return topo.subtree_union(sender, receiver, sender);
        case FusionMethod::ApproxBDF:
        case FusionMethod::HSCF:
            return topo.common_set(sender, receiver);
    }
    return {};
}

/// Base-level set the channel on edge (i, j) tracks common information over.
inline VariableSet channel_base_set(const TreeTopology& topo, FusionMethod method, int i, int j) {
    if (method == FusionMethod::CF) return topo.full_set();
    return topo.common_set(i, j);
}

/// Builds the outgoing message for one edge from the agent's pre-fusion
/// state. The payload is the marginal over the method's message set.
inline Message build_message(const AgentState& agent, const TreeTopology& topo, int receiver,
                             int step) {
    Message m;
    m.sender = agent.id;
    m.receiver = receiver;
    m.step = step;
    m.method = agent.method;
    const VariableSet base = message_base_set(topo, agent.method, agent.id, receiver,
                                              agent.fcf_sends_joint_to(receiver));
    const VariableSet want = lift_base(base, agent.local.vars);
    m.payload = (want == agent.local.vars) ? agent.local : marginalize(agent.local, want);
    return m;
}

/// Fuses one incoming message into the agent's local estimate.
///
/// CF adds the full-state payload and subtracts the tracked common
/// information. BDF (and F-CF) rebuild the local joint once per step from
/// the agent's own task-set marginal, then add each neighbor-side joint and
/// subtract the common-set information; an F-CF full joint is first reduced
/// to the sender-side union. The approximate variants fuse the common-set
/// marginal and recombine it with the locally held conditional.
inline void fuse(AgentState& agent, const TreeTopology& topo, const Message& msg,
                 const ChannelState& channel) {
    const std::pair<int, int> endpoints{std::min(msg.sender, msg.receiver),
                                        std::max(msg.sender, msg.receiver)};
    if (channel.edge != endpoints)
        throw UnknownEdge("fuse: channel edge does not match message endpoints");

    switch (agent.method) {
        case FusionMethod::CF: {
            if (!(msg.payload.vars == agent.local.vars))
                throw DimensionMismatch("fuse: homogeneous payload over " +
                                        msg.payload.vars.describe() + ", local over " +
                                        agent.local.vars.describe());
            add_embedded(agent.local, msg.payload, +1.0);
            add_embedded(agent.local, channel.common, -1.0);
            break;
        }
        case FusionMethod::FCF:
        case FusionMethod::BDF: {
            if (agent.rebuilt_at_step < msg.step) {
                const VariableSet task = agent.task_vars();
                InfoGaussian own = marginalize(agent.local, task);
                InfoGaussian rebuilt = InfoGaussian::zero(agent.local.vars);
                add_embedded(rebuilt, own);
                agent.local = std::move(rebuilt);
                agent.rebuilt_at_step = msg.step;
            }
            const VariableSet want =
                lift_base(topo.subtree_union(msg.sender, msg.receiver, msg.sender),
                          msg.payload.vars);
            const InfoGaussian part =
                (want == msg.payload.vars) ? msg.payload : marginalize(msg.payload, want);
            add_embedded(agent.local, part, +1.0);
            add_embedded(agent.local, channel.common, -1.0);
            break;
        }
        case FusionMethod::ApproxBDF:
        case FusionMethod::HSCF: {
            if (!(msg.payload.vars == channel.channel_vars))
                throw DimensionMismatch("fuse: payload over " + msg.payload.vars.describe() +
                                        " does not match channel set " +
                                        channel.channel_vars.describe());
            // fused marginal over the common set, then recombination with
            // the locally held conditional over the remaining variables
            InfoGaussian fused_marg = marginalize(agent.local, channel.channel_vars);
            fused_marg = fused_marg + msg.payload - channel.common;
            const ConditionalInfo cond = condition_on(agent.local, channel.channel_vars);
            agent.local = recombine(fused_marg, cond);
            break;
        }
    }
    agent.local.lambda = symmetrized(agent.local.lambda);
    require_psd(agent.local, "fuse");
}

/// Replaces the tracked common information after a completed exchange.
inline void update_common(ChannelState& channel, const InfoGaussian& fused_marginal) {
    if (!(fused_marginal.vars == channel.channel_vars))
        throw DimensionMismatch("update_common: marginal over " +
                                fused_marginal.vars.describe() + ", channel over " +
                                channel.channel_vars.describe());
    channel.common = fused_marginal;
}

/// Fused marginal over the channel set from the two pre-fusion payloads:
/// both endpoints evaluate the same symmetric expression, keeping their
/// channel copies identical.
inline InfoGaussian fused_channel_marginal(const ChannelState& channel, const Message& one_way,
                                           const Message& other_way) {
    auto part = [&](const Message& m) {
        return (m.payload.vars == channel.channel_vars)
                   ? m.payload
                   : marginalize(m.payload, channel.channel_vars);
    };
    return part(one_way) + part(other_way) - channel.common;
}

/// Time-propagates the channel's common estimate with the same prediction
/// pipeline the agents use, then (for filtering policies) marginalizes the
/// stale copies. The channel is never sparsified or deflated.
inline void predict_common(ChannelState& channel, const LinearDynamics& dyn, int new_tag,
                           bool keep_full_window) {
    std::vector<int> targets;
    for (const auto& v : channel.channel_vars.vars())
        if (v.kind == VarKind::TargetState) {
            bool seen = false;
            for (int t : targets) seen = seen || (t == v.entity);
            if (!seen) targets.push_back(v.entity);
        }
    if (targets.empty()) return;  // static channel: nothing to propagate

    InfoGaussian grown = ias_predict(channel.common, targets, dyn, new_tag);
    if (!keep_full_window) {
        const VariableSet stale = stale_target_vars(grown.vars, new_tag);
        grown = window_marginalize(grown, stale);
    }
    channel.common = std::move(grown);
    channel.channel_vars = channel.common.vars;
}

} // namespace hetfuse
