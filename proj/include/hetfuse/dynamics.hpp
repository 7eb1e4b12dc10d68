#pragma once

#include <cmath>
#include <vector>

#include "hetfuse/info_gaussian.hpp"

namespace hetfuse {

/// Shared deterministic acceleration law: east/north sinusoids evaluated at
/// step k. Known to every agent, so prediction stays synchronized.
struct ControlLaw {
    double amp_east = 1.0;
    double amp_north = 1.0;
    double freq_east = 0.1;   // rad/s
    double freq_north = 0.1;  // rad/s

    Eigen::Vector2d at(int k, double dt) const {
        return {amp_east * std::cos(freq_east * k * dt),
                amp_north * std::sin(freq_north * k * dt)};
    }
};

/// Per-target discrete linear model: x_k = F x_{k-1} + G u_k + w,
/// w ~ N(0, Q). The 2-D double integrator used by the tracking scenarios.
struct LinearDynamics {
    MatrixXd F;
    MatrixXd G;
    MatrixXd Q;
    double dt = 1.0;
    ControlLaw control;

    static LinearDynamics double_integrator_2d(double dt = 1.0, double q_scale = 0.08,
                                               ControlLaw law = {}) {
        LinearDynamics d;
        d.dt = dt;
        d.control = law;
        d.F.setZero(4, 4);
        d.F << 1, dt, 0, 0,
               0, 1, 0, 0,
               0, 0, 1, dt,
               0, 0, 0, 1;
        d.G.setZero(4, 2);
        d.G << 0.5 * dt * dt, 0,
               dt, 0,
               0, 0.5 * dt * dt,
               0, dt;
        d.Q = q_scale * MatrixXd::Identity(4, 4);
        return d;
    }

    int state_dim() const { return static_cast<int>(F.rows()); }
};

/// Linear pseudo-measurement y = H * (stacked measured variables) + v,
/// v ~ N(0, R). `measured` lists the variables H's columns refer to, in
/// canonical order.
struct MeasModel {
    VariableSet measured;
    MatrixXd H;
    MatrixXd R;
    int agent = -1;
    int target = -1;  // -1 for landmark/bias measurements
};

/// Information-form measurement update: adds H^T R^{-1} H and H^T R^{-1} y
/// into the blocks of the measured variables (selector-embedded).
inline InfoGaussian info_update(const InfoGaussian& g, const MeasModel& m, const VectorXd& y) {
    if (!g.vars.contains_all(m.measured))
        throw DimensionMismatch("info_update: measured set " + m.measured.describe() +
                                " not within state " + g.vars.describe());
    if (m.H.rows() != m.R.rows() || y.size() != m.H.rows() ||
        m.H.cols() != m.measured.total_dim())
        throw DimensionMismatch("info_update: inconsistent H/R/y dimensions");

    const MatrixXd r_inv_h = m.R.llt().solve(m.H);
    InfoGaussian out = g;
    add_embedded(out, InfoGaussian(m.measured, m.H.transpose() * m.R.llt().solve(y),
                                   m.H.transpose() * r_inv_h));
    return out;
}

/// Grows the time window one step for the listed dynamic targets: fresh
/// time-tagged variables join with information blocks
///   top-left Q^{-1}, coupling -Q^{-1} F, previous block += F^T Q^{-1} F,
/// and the information vector gains Q^{-1} G u on the new block while the
/// previous block loses F^T Q^{-1} G u. Static variables are untouched.
inline InfoGaussian ias_predict(const InfoGaussian& g, const std::vector<int>& target_ids,
                                const LinearDynamics& d, int new_tag) {
    const Eigen::Vector2d u = d.control.at(new_tag, d.dt);
    const MatrixXd q_inv = d.Q.llt().solve(MatrixXd::Identity(d.Q.rows(), d.Q.cols()));
    if ((d.Q * q_inv - MatrixXd::Identity(d.Q.rows(), d.Q.cols())).norm() > 1e-6)
        throw SingularMatrix("ias_predict: process noise covariance is not invertible");
    const VectorXd gu = d.G * u;

    std::vector<Variable> grown = g.vars.vars();
    std::vector<std::pair<Variable, Variable>> transitions;  // (new var, previous var)
    for (int t : target_ids) {
        // previous copy = newest existing tag for this target
        const Variable* prev = nullptr;
        for (const auto& v : g.vars.vars())
            if (v.kind == VarKind::TargetState && v.entity == t)
                if (!prev || v.time_tag > prev->time_tag) prev = &v;
        if (!prev)
            throw UnknownVariable("ias_predict: target " + std::to_string(t) +
                                  " has no state in the window");
        if (prev->time_tag >= new_tag)
            throw DimensionMismatch("ias_predict: window already at tag " +
                                    std::to_string(prev->time_tag));
        Variable nv = Variable::target(t, d.state_dim(), new_tag);
        grown.push_back(nv);
        transitions.emplace_back(nv, *prev);
    }

    VariableSet vars(grown);
    InfoGaussian out = InfoGaussian::zero(vars);
    add_embedded(out, g);

    for (const auto& [nv, pv] : transitions) {
        const int ni = vars.offset_of(nv);
        const int pi = vars.offset_of(pv);
        const int m = d.state_dim();
        out.lambda.block(ni, ni, m, m) += q_inv;
        out.lambda.block(ni, pi, m, m) -= q_inv * d.F;
        out.lambda.block(pi, ni, m, m) -= d.F.transpose() * q_inv;
        out.lambda.block(pi, pi, m, m) += d.F.transpose() * q_inv * d.F;
        out.zeta.segment(ni, m) += q_inv * gu;
        out.zeta.segment(pi, m) -= d.F.transpose() * q_inv * gu;
    }
    out.lambda = symmetrized(out.lambda);
    return out;
}

/// Plain Schur-complement removal of the given time-tagged variables.
/// Used by the filtering window policies and the centralized estimator.
inline InfoGaussian window_marginalize(const InfoGaussian& g, const VariableSet& drop) {
    return marginalize(g, g.vars.set_difference(drop));
}

/// Variables in `vars` holding a target copy strictly older than `tag`.
inline VariableSet stale_target_vars(const VariableSet& vars, int tag) {
    return vars.filtered([tag](const Variable& v) {
        return v.kind == VarKind::TargetState && v.time_tag < tag;
    });
}

/// Current-time slice: target copies at `tag` plus all static variables.
inline VariableSet current_vars(const VariableSet& vars, int tag) {
    return vars.filtered([tag](const Variable& v) {
        return v.kind == VarKind::BiasState ||
               (v.kind == VarKind::TargetState && v.time_tag == tag);
    });
}

} // namespace hetfuse
