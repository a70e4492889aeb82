#pragma once

#include "rnnscope/common.hpp"

#include <vector>

namespace rnnscope {

/// Full eigendecomposition of a real square matrix J = R diag(values) L,
/// L = R^-1. Eigenvalues sorted by descending magnitude; right eigenvectors
/// are unit 2-norm columns of R with a fixed phase convention (the
/// largest-magnitude component of each column is made real and positive),
/// so repeated runs and downstream sign-sensitive quantities reproduce.
struct EigenDecomposition {
    ComplexVector eigenvalues;    // |lambda_1| >= ... >= |lambda_n|
    ComplexMatrix right_vectors;  // columns r_a
    ComplexMatrix left_vectors;   // rows l_a^T, L = R^-1
    double condition_estimate = 0.0;  // cond_2(R)

    Eigen::Index size() const { return eigenvalues.size(); }
};

/// PCA of a sample set: orthonormal components in rows (descending
/// variance), per-component explained-variance ratios (fractions of the
/// total variance, so they sum to <= 1 when truncated).
struct PcaFit {
    Vector mean;
    Matrix components;  // n_components x dim, rows orthonormal
    Vector explained_variance_ratio;

    Eigen::Index n_components() const { return components.rows(); }
    Eigen::Index dim() const { return components.cols(); }
};

struct LeastSquaresSolution {
    Vector x;
    bool rank_deficient = false;  // only possible when ridge == 0
};

/// Eigendecomposition of a general (non-symmetric) real matrix.
/// Throws ShapeError for non-square input and NumericsError (carrying the
/// condition estimate) when the eigenvector basis is numerically singular
/// (cond > 1e12).
EigenDecomposition eig_general(const Matrix& m);

/// Condition threshold above which an eigenvector basis is rejected.
inline constexpr double kEigConditionLimit = 1e12;

/// PCA via SVD of the centered data matrix. `data` is samples x dim.
/// Requires >= 2 samples and n_components <= min(samples - 1, dim).
/// Zero-variance data yields all-zero ratios and canonical-basis components.
PcaFit pca_fit(const Matrix& data, Eigen::Index n_components);

/// argmin ||a x - b||^2 + ridge ||x||^2. With ridge == 0 and a
/// rank-deficient `a`, returns the minimum-norm solution and sets the flag.
LeastSquaresSolution solve_least_squares(const Matrix& a, const Vector& b, double ridge);

/// Project points (rows) onto fit.components: (points - mean) * components^T.
Matrix pca_project(const PcaFit& fit, const Matrix& points);

/// Project a direction vector (no centering).
Vector pca_project_direction(const PcaFit& fit, const Vector& direction);

/// Reconstruct projected points back into the ambient space.
Matrix pca_reconstruct(const PcaFit& fit, const Matrix& coords);

}  // namespace rnnscope
