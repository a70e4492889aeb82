#include "rnnscope/linearize.hpp"

#include <algorithm>
#include <cmath>

namespace rnnscope {

double time_constant(Complex lambda) {
    const double mag = std::abs(lambda);
    if (mag == 0.0) return 0.0;
    const double lg = std::log(mag);
    if (lg == 0.0) return std::numeric_limits<double>::infinity();
    return std::abs(1.0 / lg);
}

namespace {

// Orthonormal basis of the real invariant subspace of a conjugate pair.
Matrix pair_subspace(const ComplexVector& v) {
    Matrix basis(v.size(), 2);
    basis.col(0) = v.real();
    basis.col(1) = v.imag();
    // Gram-Schmidt
    basis.col(0).normalize();
    basis.col(1) -= basis.col(0).dot(basis.col(1)) * basis.col(0);
    const double n = basis.col(1).norm();
    if (n > 0.0) basis.col(1) /= n;
    return basis;
}

}  // namespace

LinearizedSystem linearize_at(const ClassifierModel& model, const FixedPoint& fp,
                              std::size_t fp_index) {
    LinearizedSystem ls;
    ls.fixed_point_index = fp_index;
    ls.h_star = fp.h_star;
    const Vector zero_input = Vector::Zero(model.cell.input_size);
    CellJacobians jac = cell_jacobians(model.cell, fp.h_star, zero_input);
    ls.j_rec = std::move(jac.j_rec);
    ls.j_inp = std::move(jac.j_inp);

    ls.eig = eig_general(ls.j_rec);  // NumericsError propagates to the caller

    // Joint sign flip of the leading pair so r1 aligns with the readout.
    const Eigen::Index n = ls.eig.size();
    ls.complex_leading_pair = ls.eig.eigenvalues[0].imag() != 0.0;
    const double align = ls.eig.right_vectors.col(0).real().dot(model.readout_weights);
    if (align < 0.0) {
        ls.eig.right_vectors.col(0) *= -1.0;
        ls.eig.left_vectors.row(0) *= -1.0;
        if (ls.complex_leading_pair && n > 1) {
            ls.eig.right_vectors.col(1) *= -1.0;
            ls.eig.left_vectors.row(1) *= -1.0;
        }
    }

    ls.time_constants.reserve(n);
    for (Eigen::Index i = 0; i < n; ++i) ls.time_constants.push_back(time_constant(ls.eig.eigenvalues[i]));
    return ls;
}

std::vector<LinearizedSystem> linearize_all(const ClassifierModel& model,
                                            const std::vector<FixedPoint>& fps) {
    std::vector<LinearizedSystem> out;
    out.reserve(fps.size());
    for (std::size_t i = 0; i < fps.size(); ++i) {
        try {
            out.push_back(linearize_at(model, fps[i], i));
        } catch (const NumericsError& e) {
            LinearizedSystem ls;
            ls.fixed_point_index = i;
            ls.h_star = fps[i].h_star;
            const Vector zero_input = Vector::Zero(model.cell.input_size);
            CellJacobians jac = cell_jacobians(model.cell, fps[i].h_star, zero_input);
            ls.j_rec = std::move(jac.j_rec);
            ls.j_inp = std::move(jac.j_inp);
            ls.defective = true;
            ls.defect_reason = e.what();
            out.push_back(std::move(ls));
        }
    }
    return out;
}

Vector input_effect(const LinearizedSystem& ls, const Vector& x) {
    if (x.size() != ls.j_inp.cols()) throw ShapeError("input_effect: input dimension mismatch");
    return ls.j_inp * x;
}

InputProjection input_projection(const LinearizedSystem& ls, const Vector& x) {
    if (ls.defective) throw NumericsError("input_projection: defective linearized system");
    const Vector jx = input_effect(ls, x);
    InputProjection out;
    out.value = (ls.eig.left_vectors.row(0) * jx.cast<Complex>()).value().real();
    out.complex_pair = ls.complex_leading_pair;
    if (out.complex_pair) {
        const Matrix basis = pair_subspace(ls.eig.left_vectors.row(0).transpose());
        out.pair_magnitude = (basis.transpose() * jx).norm();
    }
    return out;
}

Vector k_step_effect_direct(const LinearizedSystem& ls, const Vector& x, int k) {
    Vector v = ls.j_inp * x;
    for (int i = 0; i < k; ++i) v = ls.j_rec * v;
    return v;
}

Vector k_step_effect(const LinearizedSystem& ls, const Vector& x, int k) {
    if (k < 0) throw ShapeError("k_step_effect: k must be >= 0");
    if (ls.defective) return k_step_effect_direct(ls, x, k);
    const ComplexVector jx = (ls.j_inp * x).cast<Complex>();
    ComplexVector coeffs = ls.eig.left_vectors * jx;
    for (Eigen::Index a = 0; a < coeffs.size(); ++a)
        coeffs[a] *= std::pow(ls.eig.eigenvalues[a], k);
    return (ls.eig.right_vectors * coeffs).real();
}

Vector linearized_step(const LinearizedSystem& ls, const Vector& h, const Vector& x) {
    if (h.size() != ls.h_star.size()) throw ShapeError("linearized_step: state dimension mismatch");
    return ls.h_star + ls.j_rec * (h - ls.h_star) + ls.j_inp * x;
}

std::size_t nearest_system(const std::vector<LinearizedSystem>& systems, const Vector& h) {
    if (systems.empty()) throw DataError("nearest_system: no linearized systems");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < systems.size(); ++i) {
        const double d = (systems[i].h_star - h).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

InputProjectionSummary summarize_input_projections(const LinearizedSystem& ls,
                                                   const ClassifierModel& model,
                                                   const ValenceLexicon& lexicon) {
    InputProjectionSummary s;
    s.fixed_point_index = ls.fixed_point_index;
    s.complex_pair = ls.complex_leading_pair;
    auto collect = [&](const std::vector<std::int32_t>& words, std::vector<double>& raw) {
        raw.reserve(words.size());
        double sum = 0.0;
        for (auto w : words) {
            const double v = input_projection(ls, model.embed(w)).value;
            raw.push_back(v);
            sum += v;
        }
        return words.empty() ? 0.0 : sum / static_cast<double>(words.size());
    };
    s.mean_positive = collect(lexicon.positive_words, s.raw_positive);
    s.mean_negative = collect(lexicon.negative_words, s.raw_negative);
    s.mean_neutral = collect(lexicon.neutral_words, s.raw_neutral);
    return s;
}

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

LinearizationErrorStudy linearization_error_study(const ClassifierModel& model,
                                                  const std::vector<LinearizedSystem>& systems,
                                                  const std::vector<Document>& docs) {
    if (systems.empty()) throw DataError("linearization_error_study: no linearized systems");
    LinearizationErrorStudy study;
    for (const auto& doc : docs) {
        Vector h_nl = model.initial_state();
        Vector h_lin = model.initial_state();
        for (auto tok : doc.tokens) {
            const Vector x = model.embed(tok);
            // single-step: both dynamics advanced from the nonlinear state
            const Vector next_nl = cell_step(model.cell, h_nl, x);
            const auto& near_nl = systems[nearest_system(systems, h_nl)];
            const Vector next_lin_onestep = linearized_step(near_nl, h_nl, x);
            const double denom = next_nl.norm();
            study.single_step_errors.push_back(
                denom > 0.0 ? (next_nl - next_lin_onestep).norm() / denom
                            : (next_nl - next_lin_onestep).norm());
            // full linear rollout for the divergence measurement
            const auto& near_lin = systems[nearest_system(systems, h_lin)];
            h_lin = linearized_step(near_lin, h_lin, x);
            h_nl = next_nl;
        }
        const double denom = h_nl.norm();
        study.final_errors.push_back(denom > 0.0 ? (h_nl - h_lin).norm() / denom
                                                 : (h_nl - h_lin).norm());
    }
    study.median_single_step = median_of(study.single_step_errors);
    study.median_final = median_of(study.final_errors);
    return study;
}

double linearized_trajectory_accuracy(const ClassifierModel& model,
                                      const std::vector<LinearizedSystem>& systems,
                                      const std::vector<Document>& docs) {
    if (docs.empty()) throw DataError("linearized_trajectory_accuracy: empty split");
    if (systems.empty()) throw DataError("linearized_trajectory_accuracy: no linearized systems");
    std::size_t correct = 0;
    for (const auto& doc : docs) {
        Vector h = model.initial_state();
        for (auto tok : doc.tokens) {
            const auto& ls = systems[nearest_system(systems, h)];
            h = linearized_step(ls, h, model.embed(tok));
        }
        correct += (readout_logit(model, h) >= 0.0 ? 1 : 0) == doc.label;
    }
    return static_cast<double>(correct) / static_cast<double>(docs.size());
}

double embedding_center_diagnostic(const ClassifierModel& model) {
    return Vector(model.embedding.colwise().mean()).norm();
}

}  // namespace rnnscope
