#pragma once

#include <map>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hetfuse/errors.hpp"
#include "hetfuse/variables.hpp"

namespace hetfuse {

/// Bilateral tree-structured communication network with per-agent task sets
/// (targets observed plus own bias). Agents are indexed 0..n_agents-1.
class TreeTopology {
public:
    TreeTopology() = default;
    TreeTopology(int n_agents, std::vector<std::pair<int, int>> edges,
                 std::vector<VariableSet> task_sets)
        : n_agents_(n_agents), edges_(std::move(edges)), task_sets_(std::move(task_sets)) {
        for (auto& e : edges_)
            if (e.first > e.second) std::swap(e.first, e.second);
        neighbors_.assign(n_agents_, {});
        for (const auto& [a, b] : edges_) {
            neighbors_[a].push_back(b);
            neighbors_[b].push_back(a);
        }
        for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
    }

    int n_agents() const { return n_agents_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int agent) const { return neighbors_.at(agent); }
    const VariableSet& task_set(int agent) const { return task_sets_.at(agent); }

    /// Union of all agents' task sets.
    VariableSet full_set() const {
        VariableSet out;
        for (const auto& t : task_sets_) out = out.set_union(t);
        return out;
    }

    bool has_edge(int i, int j) const {
        auto e = std::minmax(i, j);
        for (const auto& [a, b] : edges_)
            if (a == e.first && b == e.second) return true;
        return false;
    }

    /// Agents on `side`'s half of the cut obtained by removing edge (i, j).
    std::vector<int> subtree_agents(int i, int j, int side) const {
        require_edge(i, j);
        const int other = (side == i) ? j : i;
        std::vector<bool> seen(n_agents_, false);
        std::queue<int> q;
        q.push(side);
        seen[side] = true;
        std::vector<int> out;
        while (!q.empty()) {
            int a = q.front();
            q.pop();
            out.push_back(a);
            for (int b : neighbors_[a]) {
                if (a == side && b == other) continue;
                if (!seen[b]) {
                    seen[b] = true;
                    q.push(b);
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Union of task sets over `side`'s half of the cut edge.
    VariableSet subtree_union(int i, int j, int side) const {
        VariableSet out;
        for (int a : subtree_agents(i, j, side)) out = out.set_union(task_sets_[a]);
        return out;
    }

    /// Common set over an edge: intersection of the endpoint task sets.
    VariableSet common_set(int i, int j) const {
        require_edge(i, j);
        return task_sets_.at(i).set_intersection(task_sets_.at(j));
    }

    /// States agent `from` relays toward `to` without observing them itself.
    VariableSet passthrough_set(int from, int to) const {
        return subtree_union(from, to, from).set_difference(task_sets_.at(from));
    }

    /// Graph distance between two agents (-1 if disconnected).
    int distance(int a, int b) const {
        std::vector<int> dist(n_agents_, -1);
        std::queue<int> q;
        q.push(a);
        dist[a] = 0;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            if (u == b) return dist[u];
            for (int v : neighbors_[u])
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    q.push(v);
                }
        }
        return dist[b];
    }

private:
    void require_edge(int i, int j) const {
        if (!has_edge(i, j))
            throw UnknownEdge("no edge between agents " + std::to_string(i) + " and " +
                              std::to_string(j));
    }

    int n_agents_ = 0;
    std::vector<std::pair<int, int>> edges_;
    std::vector<VariableSet> task_sets_;
    std::vector<std::vector<int>> neighbors_;
};

/// Checks the structural assumptions the fusion rules rely on: connected
/// acyclic graph, at least one shared variable per edge, and the overlap
/// chain rule (agents holding a variable form a connected subtree).
/// Violations are returned as data, not thrown.
inline std::vector<std::string> validate_topology(const TreeTopology& t) {
    std::vector<std::string> violations;
    const int n = t.n_agents();

    if (static_cast<int>(t.edges().size()) != n - 1)
        violations.push_back("tree must have n-1 edges: got " +
                             std::to_string(t.edges().size()) + " for " + std::to_string(n) +
                             " agents");

    // connectivity + cycle detection via BFS forest
    if (n > 0) {
        std::vector<int> comp(n, -1);
        int n_comp = 0;
        bool cycle = false;
        for (int s = 0; s < n; ++s) {
            if (comp[s] >= 0) continue;
            std::queue<std::pair<int, int>> q;  // (node, parent)
            q.push({s, -1});
            comp[s] = n_comp;
            while (!q.empty()) {
                auto [u, parent] = q.front();
                q.pop();
                bool skipped_parent_once = false;
                for (int v : t.neighbors(u)) {
                    if (v == parent && !skipped_parent_once) {
                        skipped_parent_once = true;
                        continue;
                    }
                    if (comp[v] >= 0) {
                        cycle = true;
                        continue;
                    }
                    comp[v] = n_comp;
                    q.push({v, u});
                }
            }
            ++n_comp;
        }
        if (n_comp > 1)
            violations.push_back("network is disconnected (" + std::to_string(n_comp) +
                                 " components)");
        if (cycle) violations.push_back("network contains a cycle");

        // every edge's endpoints share at least one variable
        for (const auto& [a, b] : t.edges()) {
            if (t.task_set(a).set_intersection(t.task_set(b)).empty())
                violations.push_back("agents " + std::to_string(a) + " and " + std::to_string(b) +
                                     " share an edge but no variable");
        }

        // overlap chain rule: holders of each variable form a connected subtree
        if (n_comp == 1 && !cycle) {
            std::map<std::int64_t, std::pair<Variable, std::vector<int>>> holders;
            for (int a = 0; a < n; ++a) {
                for (const auto& v : t.task_set(a).vars()) {
                    holders[v.id].first = v;
                    holders[v.id].second.push_back(a);
                }
            }
            for (const auto& [id, entry] : holders) {
                const auto& [var, agents] = entry;
                if (agents.size() < 2) continue;
                std::set<int> holder_set(agents.begin(), agents.end());
                std::queue<int> q;
                std::set<int> seen;
                q.push(agents.front());
                seen.insert(agents.front());
                while (!q.empty()) {
                    int u = q.front();
                    q.pop();
                    for (int v : t.neighbors(u))
                        if (holder_set.count(v) && !seen.count(v)) {
                            seen.insert(v);
                            q.push(v);
                        }
                }
                if (seen.size() != holder_set.size())
                    violations.push_back("variable " + var.name() +
                                         " violates the overlap chain rule: holding agents are "
                                         "not connected within the tree");
            }
        }
    }
    return violations;
}

} // namespace hetfuse
