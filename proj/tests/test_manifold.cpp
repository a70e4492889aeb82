#include "rnnscope/manifold.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <numbers>

using namespace rnnscope;

namespace {

std::vector<FixedPoint> points_to_fps(const std::vector<Vector>& pts) {
    std::vector<FixedPoint> fps(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        fps[i].h_star = pts[i];
        fps[i].initial_state_id = i;
    }
    return fps;
}

}  // namespace

TEST_CASE("fit_manifold: straight line is parameterized monotonically") {
    const Eigen::Index d = 10;
    Vector direction = Vector::Zero(d);
    direction[0] = 1.0;
    direction[1] = 2.0;
    direction[2] = 3.0;
    direction.normalize();
    std::vector<Vector> pts;
    std::vector<double> ts;
    for (int i = 0; i < 40; ++i) {
        const double t = -2.0 + 4.0 * i / 39.0;
        pts.push_back(t * direction);
        ts.push_back(t);
    }
    const auto fit = fit_manifold(points_to_fps(pts), 5, 1e-3, direction);
    CHECK(std::abs(fit.m.norm() - 1.0) <= 1e-10);
    CHECK(fit.m.dot(direction) >= 0.0);
    CHECK(oracles::spearman(fit.theta, ts) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(*std::min_element(fit.theta.begin(), fit.theta.end()) == doctest::Approx(-1.0));
    CHECK(*std::max_element(fit.theta.begin(), fit.theta.end()) == doctest::Approx(1.0));
    CHECK(fit.theta_m_concordance >= 0.95);
    CHECK(fit.pca.explained_variance_ratio[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fit_manifold: quarter-circle arc ordering matches the angle") {
    std::vector<Vector> pts;
    std::vector<double> angles;
    for (int i = 0; i < 50; ++i) {
        const double a = 0.5 * std::numbers::pi * i / 49.0;
        Vector p(2);
        p << std::cos(a), std::sin(a);
        pts.push_back(p);
        angles.push_back(a);
    }
    Vector readout(2);
    readout << -1.0, 1.0;  // increases along the arc
    const auto fit = fit_manifold(points_to_fps(pts), 6, 1e-3, readout);
    CHECK(std::abs(oracles::spearman(fit.theta, angles)) >= 0.99);
}

TEST_CASE("fit_manifold: errors on too few points and disconnected graphs") {
    std::vector<Vector> few(4, Vector::Zero(3));
    Vector readout = Vector::Ones(3);
    CHECK_THROWS_AS(fit_manifold(points_to_fps(few), 5, 1e-3, readout), InsufficientDataError);

    // two clusters far apart, k = 2 keeps neighbors inside each cluster
    std::vector<Vector> pts;
    Rng rng(111);
    for (int i = 0; i < 6; ++i) {
        Vector p = oracles::random_vector(3, rng, -0.1, 0.1);
        pts.push_back(p);
    }
    for (int i = 0; i < 6; ++i) {
        Vector p = oracles::random_vector(3, rng, -0.1, 0.1);
        p[0] += 100.0;
        pts.push_back(p);
    }
    try {
        fit_manifold(points_to_fps(pts), 2, 1e-3, readout);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("2 components") != std::string::npos);
    }
}

TEST_CASE("fit_manifold: deterministic") {
    Rng rng(112);
    std::vector<Vector> pts;
    for (int i = 0; i < 30; ++i) {
        Vector p(4);
        const double t = i / 29.0;
        p << t, 0.5 * t, 0.1 * std::sin(t), 0.01 * rng.normal();
        pts.push_back(p);
    }
    Vector readout = Vector::Ones(4);
    const auto a = fit_manifold(points_to_fps(pts), 6, 1e-3, readout);
    const auto b = fit_manifold(points_to_fps(pts), 6, 1e-3, readout);
    CHECK(a.theta == b.theta);
    CHECK((a.m - b.m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("overlap_report: constructed alignment scores one") {
    // j_rec = diag(0.9, 0.3, 0.2, 0.1): r1 = e1 under the phase convention
    const Eigen::Index n = 4;
    Matrix w = Matrix::Zero(n, n);
    w.diagonal() << 0.9, 0.3, 0.2, 0.1;
    ClassifierModel m;
    m.cell = zero_cell(Architecture::Linear, n, 1);
    m.cell.kernels[0].leftCols(n) = w;
    m.embedding = Matrix::Zero(4, 1);
    m.readout_weights = Vector::Ones(n);
    FixedPoint fp;
    fp.h_star = Vector::Zero(n);
    const std::vector<LinearizedSystem> systems = {linearize_at(m, fp, 0)};

    ManifoldFit mf;
    mf.m = Vector::Zero(n);
    mf.m[0] = 1.0;
    const auto report = overlap_report(systems, mf, 1000, 5);
    REQUIRE(report.overlaps.size() == 1);
    CHECK(report.overlaps[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(report.median_abs_overlap == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("overlap_report: null statistics match the analytic expectation") {
    const Eigen::Index d = 128;
    ManifoldFit mf;
    mf.m = Vector::Zero(d);
    mf.m[7] = 1.0;
    const std::size_t n_null = 10000;
    const auto report = overlap_report({}, mf, n_null, 9);
    REQUIRE(report.null_overlaps.size() == n_null);

    const double analytic = std::sqrt(2.0 / (std::numbers::pi * static_cast<double>(d)));
    CHECK(report.null_mean == doctest::Approx(analytic).epsilon(0.10));

    // 3-sigma Monte-Carlo box around the analytic mean
    const double var = 1.0 / static_cast<double>(d) - analytic * analytic;
    const double se = std::sqrt(var / static_cast<double>(n_null));
    CHECK(std::abs(report.null_mean - analytic) <= 3.0 * se + 1e-2 * analytic / d);
    for (const double v : report.null_overlaps) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("dimensionality_comparison: identical models give identical curves") {
    SyntheticSpec spec;
    spec.train_docs = 20;
    spec.dev_docs = 5;
    spec.test_docs = 30;
    const Dataset ds = generate_synthetic(spec, 13);
    Rng rng(14);
    const ClassifierModel model = init_model(Architecture::Gru, ds.vocabulary.size(), 8, 4, rng);
    const auto cmp = dimensionality_comparison(model, model, ds.test);
    CHECK((cmp.trained_ratios - cmp.untrained_ratios).cwiseAbs().maxCoeff() == 0.0);

    Rng rng2(15);
    const ClassifierModel other = init_model(Architecture::Lstm, ds.vocabulary.size(), 8, 4, rng2);
    CHECK_THROWS_AS(dimensionality_comparison(model, other, ds.test), ShapeError);
}

TEST_CASE("variance_captured: complete span captures everything") {
    Rng rng(16);
    const Matrix pts = oracles::random_matrix(30, 5, rng);
    const auto fit = pca_fit(pts, 5);
    CHECK(variance_captured(fit, pts) == doctest::Approx(1.0).epsilon(1e-8));
    // projecting the mean lands on the origin
    const Matrix mean_row = fit.mean.transpose();
    CHECK(pca_project(fit, mean_row).cwiseAbs().maxCoeff() <= 1e-12);
}
