#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hetfuse/dynamics.hpp"
#include "hetfuse/info_gaussian.hpp"

namespace hetfuse {

/// Symmetric set of variable-pair blocks forced to zero in the information
/// matrix. Only cross blocks between bias states of distinct agents are
/// ever zeroed; diagonal blocks and target couplings are always kept.
struct SparsityPattern {
    std::vector<std::pair<std::int64_t, std::int64_t>> zero_pairs;

    bool empty() const { return zero_pairs.empty(); }

    /// All s_i - s_j cross blocks for distinct agents present in `vars`.
    static SparsityPattern bias_pairs(const VariableSet& vars) {
        SparsityPattern p;
        std::vector<Variable> biases;
        for (const auto& v : vars.vars())
            if (v.kind == VarKind::BiasState) biases.push_back(v);
        for (std::size_t i = 0; i < biases.size(); ++i)
            for (std::size_t j = i + 1; j < biases.size(); ++j)
                p.zero_pairs.emplace_back(biases[i].id, biases[j].id);
        return p;
    }
};

/// Returns lambda with the pattern blocks zeroed (both triangles).
inline MatrixXd sparsify(const MatrixXd& lambda_tr, const SparsityPattern& pattern,
                         const VariableSet& vars) {
    MatrixXd out = lambda_tr;
    for (const auto& [a, b] : pattern.zero_pairs) {
        const Variable *va = nullptr, *vb = nullptr;
        for (const auto& v : vars.vars()) {
            if (v.id == a) va = &v;
            if (v.id == b) vb = &v;
        }
        if (!va || !vb) continue;  // pattern may cover variables not in this window
        const int oa = vars.offset_of(*va);
        const int ob = vars.offset_of(*vb);
        out.block(oa, ob, va->dim, vb->dim).setZero();
        out.block(ob, oa, vb->dim, va->dim).setZero();
    }
    return symmetrized(out);
}

/// Deflation factor and deflated matrix: lambda_min of
/// Lambda_sp^{-1/2} Lambda_tr Lambda_sp^{-1/2}, scaled so that
/// Lambda_tr - lambda_min * Lambda_sp stays PSD.
inline std::pair<double, MatrixXd> deflate(const MatrixXd& lambda_tr, const MatrixXd& lambda_sp) {
    MatrixXd s;
    try {
        s = sym_inv_sqrt(lambda_sp);
    } catch (const NotPositiveDefinite&) {
        throw NotPositiveDefinite(
            "deflate: sparsified information matrix is not positive definite; a vague prior is "
            "still present in the state");
    }
    const double lam_min = min_eig_sym(s * lambda_tr * s);
    return {lam_min, MatrixXd(lam_min * lambda_sp)};
}

/// Marginalizes out the stale target copies, then enforces the
/// conditional-independence pattern and deflates, preserving the mean:
/// zeta_sp = (lambda_min Lambda_sp) Lambda_tr^{-1} zeta_tr.
inline InfoGaussian conservative_marginalize(const InfoGaussian& g, const VariableSet& drop,
                                             const SparsityPattern& pattern) {
    const InfoGaussian dense = marginalize(g, g.vars.set_difference(drop));
    if (pattern.empty()) return dense;

    const MatrixXd lambda_sp = sparsify(dense.lambda, pattern, dense.vars);
    auto [lam_min, lambda_c] = deflate(dense.lambda, lambda_sp);

    const VectorXd mean = detail::solve_sym_checked(dense.lambda, MatrixXd(dense.zeta),
                                                    "conservative_marginalize");
    return InfoGaussian(dense.vars, lambda_c * mean, lambda_c);
}

} // namespace hetfuse
