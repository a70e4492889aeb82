#pragma once

#include "rnnscope/bow.hpp"
#include "rnnscope/fixed_points.hpp"
#include "rnnscope/numerics.hpp"

#include <vector>

namespace rnnscope {

/// First-order model of the dynamics at a fixed point: Jacobians at
/// (h*, x* = 0), the eigendecomposition of j_rec, and per-mode time
/// constants in token units (infinity sentinel at |lambda| = 1). The top
/// eigenpair is sign-aligned with the readout vector (r1 and l1 flipped
/// jointly so r1.w > 0).
struct LinearizedSystem {
    std::size_t fixed_point_index = 0;
    Vector h_star;
    Matrix j_rec;
    Matrix j_inp;
    EigenDecomposition eig;
    std::vector<double> time_constants;
    bool complex_leading_pair = false;
    bool defective = false;  // eigenbasis rejected; eig fields are empty
    std::string defect_reason;
};

/// tau = |1 / ln|lambda||; infinity at |lambda| = 1, zero at lambda = 0
/// (instant forgetting, by convention).
double time_constant(Complex lambda);

/// Linearize the model at a fixed point. Throws NumericsError when the
/// eigenbasis is ill-conditioned; use linearize_all to turn that into a
/// defective-marked record instead.
LinearizedSystem linearize_at(const ClassifierModel& model, const FixedPoint& fp,
                              std::size_t fp_index);

/// Linearizes every fixed point, catching per-point numerics failures as
/// defective records so one bad point cannot abort a sweep.
std::vector<LinearizedSystem> linearize_all(const ClassifierModel& model,
                                            const std::vector<FixedPoint>& fps);

/// Instantaneous effect of an input: j_inp * x.
Vector input_effect(const LinearizedSystem& ls, const Vector& x);

/// l1^T j_inp x. `value` is the real part under the sign convention; when
/// the leading mode is a conjugate pair the magnitude of the projection
/// onto the 2-d real invariant left subspace is reported alongside.
struct InputProjection {
    double value = 0.0;
    double pair_magnitude = 0.0;  // meaningful only when complex_pair
    bool complex_pair = false;
};

InputProjection input_projection(const LinearizedSystem& ls, const Vector& x);

/// (j_rec)^k j_inp x through the eigendecomposition sum; defective systems
/// fall back to direct matrix powers.
Vector k_step_effect(const LinearizedSystem& ls, const Vector& x, int k);

/// Direct-power route, kept as the independent cross-check of the
/// eigendecomposition route.
Vector k_step_effect_direct(const LinearizedSystem& ls, const Vector& x, int k);

/// h* + j_rec (h - h*) + j_inp x.
Vector linearized_step(const LinearizedSystem& ls, const Vector& h, const Vector& x);

/// Index of the fixed point nearest to h (Euclidean over the full state).
std::size_t nearest_system(const std::vector<LinearizedSystem>& systems, const Vector& h);

/// Per-fixed-point input-projection means over the lexicon word sets, raw
/// values retained.
struct InputProjectionSummary {
    std::size_t fixed_point_index = 0;
    double mean_positive = 0.0;
    double mean_negative = 0.0;
    double mean_neutral = 0.0;
    bool complex_pair = false;
    std::vector<double> raw_positive;
    std::vector<double> raw_negative;
    std::vector<double> raw_neutral;
};

InputProjectionSummary summarize_input_projections(const LinearizedSystem& ls,
                                                   const ClassifierModel& model,
                                                   const ValenceLexicon& lexicon);

/// Single-step and end-of-document errors of the nearest-fixed-point
/// linearized dynamics against the nonlinear trajectory.
struct LinearizationErrorStudy {
    std::vector<double> single_step_errors;  // all steps, document order
    std::vector<double> final_errors;        // per document, full linear rollout
    double median_single_step = 0.0;
    double median_final = 0.0;
};

LinearizationErrorStudy linearization_error_study(const ClassifierModel& model,
                                                  const std::vector<LinearizedSystem>& systems,
                                                  const std::vector<Document>& docs);

/// Accuracy of the classifier when every step uses the linearized dynamics
/// at the nearest fixed point.
double linearized_trajectory_accuracy(const ClassifierModel& model,
                                      const std::vector<LinearizedSystem>& systems,
                                      const std::vector<Document>& docs);

/// || mean embedding row ||_2; reported, not gated.
double embedding_center_diagnostic(const ClassifierModel& model);

}  // namespace rnnscope
