#pragma once

#include <Eigen/Dense>

namespace fhinf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Symmetrize in place against accumulated rounding; the inputs are
// symmetric by construction.
inline Matrix symmetrized(const Matrix& m) {
    return 0.5 * (m + m.transpose());
}

inline bool is_finite(const Matrix& m) {
    return m.allFinite();
}

// Largest eigenvalue of a symmetric matrix.
inline double max_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace fhinf
