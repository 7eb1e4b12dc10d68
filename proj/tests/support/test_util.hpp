#pragma once

#include <random>

#include "hetfuse/info_gaussian.hpp"

namespace testutil {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd random_matrix(std::mt19937& rng, int rows, int cols, double scale = 1.0) {
    std::normal_distribution<double> n01(0.0, 1.0);
    MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = scale * n01(rng);
    return m;
}

inline VectorXd random_vector(std::mt19937& rng, int n, double scale = 1.0) {
    std::normal_distribution<double> n01(0.0, 1.0);
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = scale * n01(rng);
    return v;
}

/// Well-conditioned random symmetric positive definite matrix.
inline MatrixXd random_spd(std::mt19937& rng, int n, double ridge = 0.5) {
    const MatrixXd a = random_matrix(rng, n, n);
    return a * a.transpose() + ridge * n * MatrixXd::Identity(n, n);
}

inline double rel_err(const VectorXd& got, const VectorXd& want) {
    const double n = want.norm();
    return n > 0 ? (got - want).norm() / n : (got - want).norm();
}

inline double rel_err(const MatrixXd& got, const MatrixXd& want) {
    const double n = want.norm();
    return n > 0 ? (got - want).norm() / n : (got - want).norm();
}

} // namespace testutil
