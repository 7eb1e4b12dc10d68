#pragma once

#include <boost/math/distributions/chi_squared.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hetfuse/fusion.hpp"
#include "hetfuse/info_gaussian.hpp"
#include "hetfuse/scenario.hpp"

namespace hetfuse {

/// Normalized estimation error squared, e^T Sigma^{-1} e.
inline double nees(const VectorXd& err, const MatrixXd& cov) {
    if (err.size() != cov.rows() || cov.rows() != cov.cols())
        throw DimensionMismatch("nees: error/covariance dimensions disagree");
    Eigen::LLT<MatrixXd> llt(symmetrized(cov));
    if (llt.info() != Eigen::Success)
        throw SingularMatrix("nees: covariance is not positive definite");
    return err.dot(llt.solve(err));
}

/// Two-sided bounds for the M-run average NEES of an n-dof estimator at
/// confidence 1-alpha: chi-square quantiles of M*n dof, divided by M.
inline std::pair<double, double> nees_bounds(int runs, int dof, double alpha) {
    if (runs < 1 || dof < 1 || alpha <= 0.0 || alpha >= 1.0)
        throw DimensionMismatch("nees_bounds: need runs >= 1, dof >= 1, alpha in (0,1)");
    boost::math::chi_squared dist(static_cast<double>(runs) * dof);
    return {boost::math::quantile(dist, alpha / 2.0) / runs,
            boost::math::quantile(dist, 1.0 - alpha / 2.0) / runs};
}

/// Minimum eigenvalue of (agent covariance - centralized marginal): >= 0
/// means the estimate is conservative in the PSD sense.
inline double conservativeness(const MatrixXd& agent_cov, const MatrixXd& cent_cov_marginal) {
    if (agent_cov.rows() != cent_cov_marginal.rows() ||
        agent_cov.cols() != cent_cov_marginal.cols())
        throw DimensionMismatch("conservativeness: covariance dimensions disagree");
    return min_eig_sym(agent_cov - cent_cov_marginal);
}

/// Bytes to ship an n-state information pair in double precision: the
/// vector plus the upper triangle, 8 * (n + n(n+1)/2) = 4n(n+3).
inline std::int64_t message_bytes(int n_states) {
    if (n_states < 1) throw DimensionMismatch("message_bytes: need n >= 1");
    const std::int64_t n = n_states;
    return 4 * n * (n + 3);
}

/// Root mean squared error across runs for one step: errors are the
/// stacked per-run error vectors over the relevant variable subset.
inline double rmse(const std::vector<VectorXd>& run_errors) {
    if (run_errors.empty()) return 0.0;
    double acc = 0.0;
    std::int64_t count = 0;
    for (const auto& e : run_errors) {
        acc += e.squaredNorm();
        count += e.size();
    }
    return count ? std::sqrt(acc / static_cast<double>(count)) : 0.0;
}

/// Analytic communication / computation accounting for one fusion round.
struct AccountingRow {
    FusionMethod method;
    std::int64_t bytes_per_round = 0;  // sum over all directed edges
    double pct_of_cf = 100.0;
    int max_agent_states = 0;          // local inference problem size
    double compute_pct_of_cf = 100.0;  // cubic-inversion cost ratio
};

/// Per-directed-edge message state counts at the base (single time step)
/// level; F-CF joint direction flows from the lower-id endpoint.
inline std::int64_t round_bytes(const ScenarioConfig& config, FusionMethod method) {
    const TreeTopology topo = config.topology();
    std::int64_t total = 0;
    for (const auto& [i, j] : topo.edges()) {
        const bool joint_ij = true;  // F-CF: lower id designated joint sender
        total += message_bytes(message_base_set(topo, method, i, j, joint_ij).total_dim());
        total += message_bytes(message_base_set(topo, method, j, i, !joint_ij).total_dim());
    }
    return total;
}

inline int max_agent_states(const ScenarioConfig& config, FusionMethod method) {
    const TreeTopology topo = config.topology();
    if (full_state_scope(method)) return topo.full_set().total_dim();
    int mx = 0;
    for (int a = 0; a < config.n_agents; ++a)
        mx = std::max(mx, topo.task_set(a).total_dim());
    return mx;
}

inline AccountingRow scenario_accounting(const ScenarioConfig& config, FusionMethod method) {
    AccountingRow row;
    row.method = method;
    row.bytes_per_round = round_bytes(config, method);
    row.max_agent_states = max_agent_states(config, method);
    const double cf_bytes = static_cast<double>(round_bytes(config, FusionMethod::CF));
    const double cf_states = max_agent_states(config, FusionMethod::CF);
    row.pct_of_cf = 100.0 * static_cast<double>(row.bytes_per_round) / cf_bytes;
    const double s = row.max_agent_states;
    row.compute_pct_of_cf = 100.0 * (s * s * s) / (cf_states * cf_states * cf_states);
    return row;
}

/// Per-step, per-agent simulation record feeding the CSV emitters.
struct StepAgentRecord {
    double nees = 0.0;
    double err_sq_relevant = 0.0;  // squared error over the locally relevant set
    int n_relevant = 0;
    double min_eig_vs_cent = 0.0;
    std::int64_t bytes_sent = 0;
};

struct RunMetrics {
    int run_index = 0;
    bool failed = false;
    std::string error;
    // records[step][agent]; step 0 corresponds to the first measurement step
    std::vector<std::vector<StepAgentRecord>> records;
    std::vector<double> cent_nees;  // per step
    int cent_dof = 0;
    std::vector<int> agent_dof;     // NEES dof per agent (scope dimension)
};

} // namespace hetfuse
