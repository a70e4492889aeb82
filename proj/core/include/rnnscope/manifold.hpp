#pragma once

#include "rnnscope/linearize.hpp"

#include <vector>

namespace rnnscope {

/// Geometry of the fixed-point set: its PCA, the principal direction m
/// (unit norm, sign-aligned with the readout), and the locally-linear-
/// embedding coordinate theta in [-1, 1] per fixed point (sign-oriented to
/// correlate positively with the readout projection).
struct ManifoldFit {
    PcaFit pca;                 // over the fixed points
    Vector m;                   // ||m|| = 1, m.w >= 0
    std::vector<double> theta;  // per fixed point, spans [-1, 1]
    int k_neighbors = 10;
    double ridge = 1e-3;
    double theta_m_concordance = 0.0;  // adjacent-pair ordering agreement
};

/// LLE over the fixed points (k Euclidean neighbors, reconstruction weights
/// from ridge-regularized constrained least squares summing to one, theta =
/// the second-smallest eigenvector of (I-W)^T (I-W), min-max rescaled).
/// Throws InsufficientDataError with fewer than k+2 points and DataError
/// naming the components when the neighbor graph is disconnected.
ManifoldFit fit_manifold(const std::vector<FixedPoint>& fps, int k_neighbors, double ridge,
                         const Vector& readout);

/// r1.m per non-defective fixed point against a random-unit-vector null.
/// Complex leading pairs contribute the magnitude of m's projection onto
/// the 2-d invariant subspace and are flagged.
struct OverlapReport {
    std::vector<std::size_t> fixed_point_index;
    std::vector<double> overlaps;
    std::vector<bool> complex_pair;
    std::vector<double> null_overlaps;  // |u.m|
    double median_abs_overlap = 0.0;
    double null_mean = 0.0;
    double null_p99 = 0.0;
};

OverlapReport overlap_report(const std::vector<LinearizedSystem>& systems, const ManifoldFit& mf,
                             std::size_t n_null, std::uint64_t seed);

/// Per-component explained-variance ratios of the hidden states visited by
/// a trained and an untrained model over the same documents.
struct VarianceComparison {
    Vector trained_ratios;
    Vector untrained_ratios;
};

VarianceComparison dimensionality_comparison(const ClassifierModel& trained,
                                             const ClassifierModel& untrained,
                                             const std::vector<Document>& docs);

/// Stack row vectors into a samples x dim matrix.
Matrix stack_states(const std::vector<Vector>& states);

/// Fraction of the points' own variance captured by the span of the fit's
/// components (points centered on their own mean).
double variance_captured(const PcaFit& fit, const Matrix& points);

}  // namespace rnnscope
