#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "hetfuse/errors.hpp"

namespace hetfuse {

enum class VarKind { TargetState, BiasState };

/// One scalar-block random variable: a target state (optionally a
/// time-tagged copy of it) or an agent's static measurement bias.
///
/// The id is a deterministic function of (kind, entity, time_tag), so
/// independently constructed agents agree on block ordering without any
/// negotiation. Ordering by id puts target copies first (newest time tag
/// leading) and bias blocks last.
struct Variable {
    std::int64_t id = -1;
    int dim = 0;
    VarKind kind = VarKind::TargetState;
    int entity = -1;   // target index or agent index
    int time_tag = 0;  // time-step copy index; 0 for static variables

    static constexpr std::int64_t kMaxEntities = 1 << 12;
    static constexpr std::int64_t kMaxTimeTags = 1 << 20;

    static Variable target(int target_index, int dim, int time_tag = 0) {
        Variable v;
        v.kind = VarKind::TargetState;
        v.entity = target_index;
        v.time_tag = time_tag;
        v.dim = dim;
        // newer copies get smaller ids so they sort to the front
        v.id = (kMaxTimeTags - 1 - time_tag) * kMaxEntities + target_index;
        return v;
    }

    static Variable bias(int agent_index, int dim) {
        Variable v;
        v.kind = VarKind::BiasState;
        v.entity = agent_index;
        v.time_tag = 0;
        v.dim = dim;
        v.id = kMaxTimeTags * kMaxEntities + agent_index;
        return v;
    }

    std::string name() const {
        if (kind == VarKind::BiasState) return "s" + std::to_string(entity);
        return "x" + std::to_string(entity) + "@" + std::to_string(time_tag);
    }

    friend bool operator==(const Variable& a, const Variable& b) { return a.id == b.id; }
    friend bool operator<(const Variable& a, const Variable& b) { return a.id < b.id; }
};

/// Ordered set of variables, kept sorted by global id. The block layout of
/// every information vector/matrix in the library follows this order.
class VariableSet {
public:
    VariableSet() = default;

    explicit VariableSet(std::vector<Variable> vars) : vars_(std::move(vars)) {
        std::sort(vars_.begin(), vars_.end());
        for (std::size_t i = 1; i < vars_.size(); ++i) {
            if (vars_[i].id == vars_[i - 1].id)
                throw UnknownVariable("duplicate variable " + vars_[i].name() + " in set");
        }
    }

    const std::vector<Variable>& vars() const { return vars_; }
    std::size_t size() const { return vars_.size(); }
    bool empty() const { return vars_.empty(); }

    int total_dim() const {
        int n = 0;
        for (const auto& v : vars_) n += v.dim;
        return n;
    }

    bool contains(const Variable& v) const {
        auto it = std::lower_bound(vars_.begin(), vars_.end(), v);
        return it != vars_.end() && it->id == v.id;
    }

    bool contains_all(const VariableSet& other) const {
        for (const auto& v : other.vars_)
            if (!contains(v)) return false;
        return true;
    }

    /// Scalar offset of a variable's block within the stacked layout.
    int offset_of(const Variable& v) const {
        int off = 0;
        for (const auto& u : vars_) {
            if (u.id == v.id) return off;
            off += u.dim;
        }
        throw UnknownVariable("variable " + v.name() + " not in set");
    }

    /// Scalar indices covered by a subset, in this set's canonical order.
    std::vector<int> indices_of(const VariableSet& subset) const {
        std::vector<int> idx;
        idx.reserve(static_cast<std::size_t>(subset.total_dim()));
        for (const auto& v : subset.vars_) {
            int off = offset_of(v);
            for (int k = 0; k < v.dim; ++k) idx.push_back(off + k);
        }
        return idx;
    }

    VariableSet set_union(const VariableSet& other) const {
        std::vector<Variable> out;
        std::set_union(vars_.begin(), vars_.end(), other.vars_.begin(), other.vars_.end(),
                       std::back_inserter(out));
        return VariableSet(std::move(out));
    }

    VariableSet set_intersection(const VariableSet& other) const {
        std::vector<Variable> out;
        std::set_intersection(vars_.begin(), vars_.end(), other.vars_.begin(), other.vars_.end(),
                              std::back_inserter(out));
        return VariableSet(std::move(out));
    }

    VariableSet set_difference(const VariableSet& other) const {
        std::vector<Variable> out;
        std::set_difference(vars_.begin(), vars_.end(), other.vars_.begin(), other.vars_.end(),
                            std::back_inserter(out));
        return VariableSet(std::move(out));
    }

    VariableSet filtered(const auto& pred) const {
        std::vector<Variable> out;
        for (const auto& v : vars_)
            if (pred(v)) out.push_back(v);
        return VariableSet(std::move(out));
    }

    std::string describe() const {
        std::string s = "{";
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (i) s += ",";
            s += vars_[i].name();
        }
        return s + "}";
    }

    friend bool operator==(const VariableSet& a, const VariableSet& b) {
        if (a.vars_.size() != b.vars_.size()) return false;
        for (std::size_t i = 0; i < a.vars_.size(); ++i)
            if (a.vars_[i].id != b.vars_[i].id) return false;
        return true;
    }

private:
    std::vector<Variable> vars_;
};

} // namespace hetfuse
