#include "rnnscope/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <numeric>

namespace rnnscope {

namespace {

// Stable magnitude-descending order; conjugate pairs stay adjacent with the
// positive-imaginary member first.
std::vector<Eigen::Index> magnitude_order(const ComplexVector& values) {
    std::vector<Eigen::Index> order(values.size());
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double ma = std::abs(values[a]), mb = std::abs(values[b]);
        if (ma != mb) return ma > mb;
        if (values[a].real() != values[b].real()) return values[a].real() > values[b].real();
        return values[a].imag() > values[b].imag();
    });
    return order;
}

// Rotate each column so its largest-magnitude component is real-positive.
// Ties on magnitude break to the lowest index. Norm is preserved.
void fix_phase(ComplexMatrix& r) {
    for (Eigen::Index c = 0; c < r.cols(); ++c) {
        Eigen::Index k = 0;
        double best = 0.0;
        for (Eigen::Index i = 0; i < r.rows(); ++i) {
            const double m = std::abs(r(i, c));
            if (m > best + 1e-15 * best) {
                best = m;
                k = i;
            }
        }
        if (best == 0.0) continue;
        const Complex phase = std::conj(r(k, c)) / best;
        r.col(c) *= phase;
        // kill the residual imaginary dust on the anchor component
        r(k, c) = Complex(r(k, c).real(), 0.0);
    }
}

}  // namespace

EigenDecomposition eig_general(const Matrix& m) {
    if (m.rows() != m.cols())
        throw ShapeError("eig_general: matrix must be square, got " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()));
    if (m.rows() < 1) throw ShapeError("eig_general: dimension must be >= 1");
    require_finite(m, "eig_general");

    Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success)
        throw NumericsError("eig_general: QR iteration failed to converge");

    const ComplexVector raw_values = solver.eigenvalues();
    const ComplexMatrix raw_vectors = solver.eigenvectors();

    const auto order = magnitude_order(raw_values);
    const Eigen::Index n = m.rows();

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.right_vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.eigenvalues[i] = raw_values[order[i]];
        out.right_vectors.col(i) = raw_vectors.col(order[i]);
    }
    for (Eigen::Index c = 0; c < n; ++c) out.right_vectors.col(c).normalize();
    fix_phase(out.right_vectors);

    Eigen::JacobiSVD<ComplexMatrix> svd(out.right_vectors);
    const double smin = svd.singularValues()(n - 1);
    const double smax = svd.singularValues()(0);
    out.condition_estimate = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(out.condition_estimate <= kEigConditionLimit))
        throw NumericsError("eig_general: eigenvector basis ill-conditioned (cond ~ " +
                                std::to_string(out.condition_estimate) + ")",
                            out.condition_estimate);

    out.left_vectors = out.right_vectors.partialPivLu().inverse();
    return out;
}

PcaFit pca_fit(const Matrix& data, Eigen::Index n_components) {
    const Eigen::Index n = data.rows(), d = data.cols();
    if (n < 2) throw InsufficientDataError("pca_fit: need at least 2 samples");
    if (n_components < 1 || n_components > std::min(n - 1, d))
        throw ShapeError("pca_fit: n_components must be in [1, min(samples-1, dim)]");
    require_finite(data, "pca_fit");

    PcaFit fit;
    fit.mean = data.colwise().mean();
    Matrix centered = data.rowwise() - fit.mean.transpose();

    const double total_var = centered.squaredNorm() / static_cast<double>(n - 1);
    if (total_var <= 0.0) {
        // Degenerate data: ratios are defined as 0, components default to the
        // leading canonical basis directions.
        fit.components = Matrix::Zero(n_components, d);
        for (Eigen::Index i = 0; i < n_components; ++i) fit.components(i, i) = 1.0;
        fit.explained_variance_ratio = Vector::Zero(n_components);
        return fit;
    }

    Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();

    fit.components.resize(n_components, d);
    fit.explained_variance_ratio.resize(n_components);
    for (Eigen::Index i = 0; i < n_components; ++i) {
        Vector comp = svd.matrixV().col(i);
        // sign convention: largest-|.| entry positive, ties to lowest index
        Eigen::Index k = 0;
        comp.cwiseAbs().maxCoeff(&k);
        if (comp[k] < 0.0) comp = -comp;
        fit.components.row(i) = comp.transpose();
        fit.explained_variance_ratio[i] = (sv[i] * sv[i] / static_cast<double>(n - 1)) / total_var;
    }
    return fit;
}

LeastSquaresSolution solve_least_squares(const Matrix& a, const Vector& b, double ridge) {
    if (a.rows() < 1) throw ShapeError("solve_least_squares: a must have >= 1 row");
    if (a.rows() != b.size())
        throw ShapeError("solve_least_squares: a rows and b length differ");
    if (ridge < 0.0) throw ShapeError("solve_least_squares: ridge must be >= 0");
    require_finite(a, "solve_least_squares");
    require_finite(b, "solve_least_squares");

    LeastSquaresSolution out;
    if (ridge > 0.0) {
        // Augmented system [a; sqrt(ridge) I] keeps the solve full-rank.
        const Eigen::Index m = a.rows(), d = a.cols();
        Matrix aug(m + d, d);
        aug.topRows(m) = a;
        aug.bottomRows(d) = std::sqrt(ridge) * Matrix::Identity(d, d);
        Vector rhs = Vector::Zero(m + d);
        rhs.head(m) = b;
        out.x = aug.colPivHouseholderQr().solve(rhs);
        return out;
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
    out.x = cod.solve(b);  // minimum-norm solution
    out.rank_deficient = cod.rank() < std::min(a.rows(), a.cols());
    return out;
}

Matrix pca_project(const PcaFit& fit, const Matrix& points) {
    if (points.cols() != fit.dim())
        throw ShapeError("pca_project: point dimension does not match fit");
    return (points.rowwise() - fit.mean.transpose()) * fit.components.transpose();
}

Vector pca_project_direction(const PcaFit& fit, const Vector& direction) {
    if (direction.size() != fit.dim())
        throw ShapeError("pca_project_direction: dimension does not match fit");
    return fit.components * direction;
}

Matrix pca_reconstruct(const PcaFit& fit, const Matrix& coords) {
    if (coords.cols() != fit.n_components())
        throw ShapeError("pca_reconstruct: coordinate dimension does not match fit");
    return (coords * fit.components).rowwise() + fit.mean.transpose();
}

}  // namespace rnnscope
