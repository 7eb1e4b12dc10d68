#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <utility>

#include "hetfuse/errors.hpp"
#include "hetfuse/variables.hpp"

namespace hetfuse {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Relative threshold below which a symmetric block is treated as singular.
inline constexpr double kSingularRelTol = 1e-12;
/// Relative tolerance for "still positive semi-definite" checks.
inline constexpr double kPsdRelTol = 1e-9;

inline MatrixXd symmetrized(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eig_sym(const MatrixXd& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// Spectral norm of a symmetric matrix (largest |eigenvalue|).
inline double spectral_norm_sym(const MatrixXd& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Unique symmetric PD square root inverse, M^{-1/2}. Throws
/// NotPositiveDefinite when M has a non-positive eigenvalue.
inline MatrixXd sym_inv_sqrt(const MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(m));
    const VectorXd d = es.eigenvalues();
    const double scale = d.cwiseAbs().maxCoeff();
    if (d.minCoeff() <= kSingularRelTol * scale)
        throw NotPositiveDefinite("sym_inv_sqrt: min eigenvalue " + std::to_string(d.minCoeff()) +
                                  " of " + std::to_string(m.rows()) + "-dim matrix");
    return es.eigenvectors() * d.cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
}

/// Multivariate Gaussian in information (canonical) form over a labeled,
/// canonically ordered variable set: information vector and matrix.
/// Values are immutable in spirit: operations return new instances.
struct InfoGaussian {
    VariableSet vars;
    VectorXd zeta;
    MatrixXd lambda;

    InfoGaussian() = default;

    InfoGaussian(VariableSet v, VectorXd z, MatrixXd l)
        : vars(std::move(v)), zeta(std::move(z)), lambda(symmetrized(l)) {
        const int n = vars.total_dim();
        if (zeta.size() != n || lambda.rows() != n || lambda.cols() != n)
            throw DimensionMismatch("InfoGaussian over " + vars.describe() + ": zeta " +
                                    std::to_string(zeta.size()) + ", lambda " +
                                    std::to_string(lambda.rows()) + "x" +
                                    std::to_string(lambda.cols()) + ", expected " +
                                    std::to_string(n));
    }

    /// Uninformative state (lambda = 0), legal as a "no common prior" value.
    static InfoGaussian zero(const VariableSet& v) {
        const int n = v.total_dim();
        return InfoGaussian(v, VectorXd::Zero(n), MatrixXd::Zero(n, n));
    }

    int dim() const { return static_cast<int>(zeta.size()); }

    bool is_zero_information() const { return lambda.isZero(0.0); }

    InfoGaussian operator+(const InfoGaussian& other) const {
        if (!(vars == other.vars))
            throw DimensionMismatch("information addition over mismatched sets " +
                                    vars.describe() + " vs " + other.vars.describe());
        return InfoGaussian(vars, zeta + other.zeta, lambda + other.lambda);
    }

    InfoGaussian operator-(const InfoGaussian& other) const {
        if (!(vars == other.vars))
            throw DimensionMismatch("information subtraction over mismatched sets " +
                                    vars.describe() + " vs " + other.vars.describe());
        return InfoGaussian(vars, zeta - other.zeta, lambda - other.lambda);
    }
};

/// Moment-form Gaussian (mean, covariance) over a labeled variable set.
struct MomentGaussian {
    VariableSet vars;
    VectorXd mu;
    MatrixXd sigma;

    MomentGaussian() = default;
    MomentGaussian(VariableSet v, VectorXd m, MatrixXd s)
        : vars(std::move(v)), mu(std::move(m)), sigma(symmetrized(s)) {
        const int n = vars.total_dim();
        if (mu.size() != n || sigma.rows() != n || sigma.cols() != n)
            throw DimensionMismatch("MomentGaussian dimension mismatch over " + vars.describe());
    }
};

/// Conditional p(S | X) in information form: Lambda_{S|X} = Lambda_SS,
/// offset zeta_S, and the coupling block Lambda_SX. Together with the
/// marginal over X this reassembles the joint.
struct ConditionalInfo {
    VariableSet dependent;  // S
    VariableSet given;      // X
    VectorXd zeta_s;
    MatrixXd lambda_ss;
    MatrixXd lambda_sx;
};

namespace detail {

inline MatrixXd pick(const MatrixXd& m, const std::vector<int>& rows,
                     const std::vector<int>& cols) {
    MatrixXd out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
    return out;
}

inline VectorXd pick(const VectorXd& v, const std::vector<int>& idx) {
    VectorXd out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
    return out;
}

/// Solve A X = B for symmetric A, refusing numerically singular blocks.
inline MatrixXd solve_sym_checked(const MatrixXd& a, const MatrixXd& b, const char* who) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(a));
    const VectorXd d = es.eigenvalues();
    const double scale = d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
    if (scale == 0.0 || d.minCoeff() <= kSingularRelTol * scale)
        throw SingularBlock(std::string(who) + ": removed block is numerically singular (min eig " +
                            (d.size() ? std::to_string(d.minCoeff()) : std::string("n/a")) +
                            "), likely a vague or improper prior");
    return es.eigenvectors() * d.cwiseInverse().asDiagonal() * es.eigenvectors().transpose() * b;
}

} // namespace detail

/// Marginal over `keep`: Schur complement onto the kept block.
inline InfoGaussian marginalize(const InfoGaussian& g, const VariableSet& keep) {
    if (!g.vars.contains_all(keep))
        throw UnknownVariable("marginalize: keep set " + keep.describe() + " not within " +
                              g.vars.describe());
    if (keep == g.vars) return g;

    const VariableSet drop = g.vars.set_difference(keep);
    const auto xi = g.vars.indices_of(keep);
    const auto si = g.vars.indices_of(drop);

    const MatrixXd lxx = detail::pick(g.lambda, xi, xi);
    const MatrixXd lxs = detail::pick(g.lambda, xi, si);
    const MatrixXd lss = detail::pick(g.lambda, si, si);
    const VectorXd zx = detail::pick(g.zeta, xi);
    const VectorXd zs = detail::pick(g.zeta, si);

    const MatrixXd lss_inv_lsx = detail::solve_sym_checked(lss, lxs.transpose(), "marginalize");
    const MatrixXd lss_inv_zs = detail::solve_sym_checked(lss, MatrixXd(zs), "marginalize");

    return InfoGaussian(keep, zx - lxs * lss_inv_zs, symmetrized(lxx - lxs * lss_inv_lsx));
}

/// Conditional of the complement given `given`, as the affine information pair.
inline ConditionalInfo condition_on(const InfoGaussian& g, const VariableSet& given) {
    if (!g.vars.contains_all(given))
        throw UnknownVariable("condition_on: given set " + given.describe() + " not within " +
                              g.vars.describe());
    const VariableSet dep = g.vars.set_difference(given);
    if (dep.empty())
        throw UnknownVariable("condition_on: empty complement for " + given.describe());

    const auto xi = g.vars.indices_of(given);
    const auto si = g.vars.indices_of(dep);

    ConditionalInfo c;
    c.dependent = dep;
    c.given = given;
    c.zeta_s = detail::pick(g.zeta, si);
    c.lambda_ss = symmetrized(detail::pick(g.lambda, si, si));
    c.lambda_sx = detail::pick(g.lambda, si, xi);
    return c;
}

/// Reassemble a joint from a marginal over X and a conditional over S | X.
inline InfoGaussian recombine(const InfoGaussian& marginal, const ConditionalInfo& cond) {
    if (!(marginal.vars == cond.given))
        throw DimensionMismatch("recombine: marginal over " + marginal.vars.describe() +
                                " does not match conditioning set " + cond.given.describe());

    const VariableSet joint = cond.given.set_union(cond.dependent);
    const int n = joint.total_dim();
    const auto xi = joint.indices_of(cond.given);
    const auto si = joint.indices_of(cond.dependent);

    const MatrixXd lss_inv_lsx =
        detail::solve_sym_checked(cond.lambda_ss, cond.lambda_sx, "recombine");
    const MatrixXd lss_inv_zs =
        detail::solve_sym_checked(cond.lambda_ss, MatrixXd(cond.zeta_s), "recombine");

    MatrixXd lam = MatrixXd::Zero(n, n);
    VectorXd zeta = VectorXd::Zero(n);

    const MatrixXd lxx = marginal.lambda + cond.lambda_sx.transpose() * lss_inv_lsx;
    const VectorXd zx = marginal.zeta + cond.lambda_sx.transpose() * lss_inv_zs;

    for (std::size_t i = 0; i < xi.size(); ++i) {
        zeta(xi[i]) = zx(i);
        for (std::size_t j = 0; j < xi.size(); ++j) lam(xi[i], xi[j]) = lxx(i, j);
        for (std::size_t j = 0; j < si.size(); ++j) {
            lam(xi[i], si[j]) = cond.lambda_sx(j, i);
            lam(si[j], xi[i]) = cond.lambda_sx(j, i);
        }
    }
    for (std::size_t i = 0; i < si.size(); ++i) {
        zeta(si[i]) = cond.zeta_s(i);
        for (std::size_t j = 0; j < si.size(); ++j) lam(si[i], si[j]) = cond.lambda_ss(i, j);
    }
    return InfoGaussian(joint, zeta, lam);
}

inline MomentGaussian to_moments(const InfoGaussian& g) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(g.lambda);
    const VectorXd d = es.eigenvalues();
    const double scale = d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
    if (scale == 0.0 || d.minCoeff() <= kSingularRelTol * scale)
        throw SingularMatrix("to_moments: information matrix over " + g.vars.describe() +
                             " is not positive definite");
    const MatrixXd sigma =
        es.eigenvectors() * d.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    return MomentGaussian(g.vars, sigma * g.zeta, symmetrized(sigma));
}

inline InfoGaussian from_moments(const MomentGaussian& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m.sigma);
    const VectorXd d = es.eigenvalues();
    const double scale = d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
    if (scale == 0.0 || d.minCoeff() <= kSingularRelTol * scale)
        throw SingularMatrix("from_moments: covariance over " + m.vars.describe() +
                             " is not positive definite");
    const MatrixXd lam =
        es.eigenvectors() * d.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    return InfoGaussian(m.vars, lam * m.mu, symmetrized(lam));
}

/// Zero-pad an information contribution into a larger labeled space.
/// Additive: embed(a) + embed(b) is valid information addition.
inline InfoGaussian embed(const InfoGaussian& g, const VariableSet& superset) {
    if (!superset.contains_all(g.vars))
        throw UnknownVariable("embed: " + g.vars.describe() + " not within " +
                              superset.describe());
    const int n = superset.total_dim();
    MatrixXd lam = MatrixXd::Zero(n, n);
    VectorXd zeta = VectorXd::Zero(n);
    const auto idx = superset.indices_of(g.vars);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        zeta(idx[i]) = g.zeta(i);
        for (std::size_t j = 0; j < idx.size(); ++j) lam(idx[i], idx[j]) = g.lambda(i, j);
    }
    return InfoGaussian(superset, std::move(zeta), std::move(lam));
}

/// g += sign * embed(h) without materializing the padded operand.
inline void add_embedded(InfoGaussian& g, const InfoGaussian& h, double sign = 1.0) {
    const auto idx = g.vars.indices_of(h.vars);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        g.zeta(idx[i]) += sign * h.zeta(i);
        for (std::size_t j = 0; j < idx.size(); ++j)
            g.lambda(idx[i], idx[j]) += sign * h.lambda(i, j);
    }
}

/// Throws NegativeInformation when lambda has lost PSD beyond tolerance.
inline void require_psd(const InfoGaussian& g, const char* who) {
    if (g.dim() == 0) return;
    const double scale = spectral_norm_sym(g.lambda);
    const double lo = min_eig_sym(g.lambda);
    if (lo < -kPsdRelTol * std::max(scale, 1.0))
        throw NegativeInformation(std::string(who) + ": information matrix over " +
                                  g.vars.describe() + " has min eigenvalue " +
                                  std::to_string(lo));
}

} // namespace hetfuse
