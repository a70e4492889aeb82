#include "rnnscope/manifold.hpp"

#include "rnnscope/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace rnnscope {

Matrix stack_states(const std::vector<Vector>& states) {
    if (states.empty()) throw DataError("stack_states: no states");
    Matrix out(static_cast<Eigen::Index>(states.size()), states[0].size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i].size() != out.cols()) throw ShapeError("stack_states: ragged state set");
        out.row(static_cast<Eigen::Index>(i)) = states[i].transpose();
    }
    return out;
}

namespace {

// k nearest neighbors by Euclidean distance, ties broken by index.
std::vector<std::vector<Eigen::Index>> knn_graph(const Matrix& pts, int k) {
    const Eigen::Index n = pts.rows();
    std::vector<std::vector<Eigen::Index>> nbrs(n);
    std::vector<std::pair<double, Eigen::Index>> dist;
    for (Eigen::Index i = 0; i < n; ++i) {
        dist.clear();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            dist.emplace_back((pts.row(i) - pts.row(j)).squaredNorm(), j);
        }
        std::stable_sort(dist.begin(), dist.end());
        nbrs[i].reserve(k);
        for (int t = 0; t < k; ++t) nbrs[i].push_back(dist[t].second);
    }
    return nbrs;
}

// Union-find over the symmetrized neighbor graph.
std::vector<int> graph_components(const std::vector<std::vector<Eigen::Index>>& nbrs) {
    const std::size_t n = nbrs.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (auto j : nbrs[i]) {
            const auto ra = find(i), rb = find(static_cast<std::size_t>(j));
            if (ra != rb) parent[ra] = rb;
        }
    std::vector<int> comp(n, -1);
    int next = 0;
    std::vector<std::size_t> roots;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = find(i);
        auto it = std::find(roots.begin(), roots.end(), r);
        if (it == roots.end()) {
            roots.push_back(r);
            comp[i] = next++;
        } else {
            comp[i] = static_cast<int>(it - roots.begin());
        }
    }
    return comp;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

ManifoldFit fit_manifold(const std::vector<FixedPoint>& fps, int k_neighbors, double ridge,
                         const Vector& readout) {
    if (k_neighbors < 1) throw ConfigError("fit_manifold: k_neighbors must be >= 1");
    if (static_cast<int>(fps.size()) < k_neighbors + 2)
        throw InsufficientDataError("fit_manifold: need at least k_neighbors + 2 fixed points, got " +
                                    std::to_string(fps.size()));

    std::vector<Vector> pts;
    pts.reserve(fps.size());
    for (const auto& fp : fps) pts.push_back(fp.h_star);
    const Matrix x = stack_states(pts);
    const Eigen::Index n = x.rows();

    const auto nbrs = knn_graph(x, k_neighbors);
    const auto comp = graph_components(nbrs);
    const int n_comp = *std::max_element(comp.begin(), comp.end()) + 1;
    if (n_comp > 1) {
        std::vector<int> sizes(n_comp, 0);
        for (auto c : comp) ++sizes[c];
        std::string msg = "fit_manifold: neighbor graph is disconnected (" +
                          std::to_string(n_comp) + " components, sizes";
        for (auto s : sizes) msg += " " + std::to_string(s);
        msg += ")";
        throw DataError(msg);
    }

    // Local reconstruction weights: solve (G + ridge*tr(G) I) w = 1, then
    // normalize to sum 1.
    Matrix w_full = Matrix::Zero(n, n);
    const int k = k_neighbors;
    for (Eigen::Index i = 0; i < n; ++i) {
        Matrix diffs(k, x.cols());
        for (int a = 0; a < k; ++a) diffs.row(a) = x.row(nbrs[i][a]) - x.row(i);
        Matrix gram = diffs * diffs.transpose();
        const double tr = gram.trace();
        const double reg = ridge * (tr > 0.0 ? tr : 1.0);
        gram.diagonal().array() += reg;
        Vector w = gram.ldlt().solve(Vector::Ones(k));
        const double sum = w.sum();
        if (sum == 0.0) throw NumericsError("fit_manifold: degenerate local Gram system");
        w /= sum;
        for (int a = 0; a < k; ++a) w_full(i, nbrs[i][a]) = w[a];
    }

    // Embedding: second-smallest eigenvector of (I - W)^T (I - W).
    Matrix iw = Matrix::Identity(n, n) - w_full;
    Matrix m_mat = iw.transpose() * iw;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_mat);
    if (es.info() != Eigen::Success) throw NumericsError("fit_manifold: embedding eigensolve failed");
    Vector raw = es.eigenvectors().col(1);  // ascending eigenvalues

    ManifoldFit fit;
    fit.k_neighbors = k_neighbors;
    fit.ridge = ridge;

    // PCA direction of the fixed-point set, aligned with the readout.
    fit.pca = pca_fit(x, std::min<Eigen::Index>(x.cols(), n - 1));
    fit.m = fit.pca.components.row(0).transpose();
    if (readout.size() != fit.m.size()) throw ShapeError("fit_manifold: readout dimension mismatch");
    if (fit.m.dot(readout) < 0.0) fit.m = -fit.m;

    // theta: affine min-max rescale to [-1, 1], oriented with the readout
    // projection of the fixed points.
    std::vector<double> logits(n);
    for (Eigen::Index i = 0; i < n; ++i) logits[i] = readout.dot(pts[i]);
    std::vector<double> raw_vec(raw.data(), raw.data() + n);
    if (pearson(raw_vec, logits) < 0.0) raw = -raw;
    const double lo = raw.minCoeff(), hi = raw.maxCoeff();
    fit.theta.resize(n);
    if (hi <= lo) {
        // coincident fixed points: the coordinate is meaningless, park at 0
        std::fill(fit.theta.begin(), fit.theta.end(), 0.0);
    } else {
        for (Eigen::Index i = 0; i < n; ++i) fit.theta[i] = -1.0 + 2.0 * (raw[i] - lo) / (hi - lo);
    }

    // ordering concordance between theta and the m-projection
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return fit.theta[a] < fit.theta[b]; });
    std::size_t agree = 0;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const double pa = fit.m.dot(pts[order[i]]), pb = fit.m.dot(pts[order[i + 1]]);
        agree += pb >= pa;
    }
    fit.theta_m_concordance = static_cast<double>(agree) / static_cast<double>(n - 1);
    return fit;
}

OverlapReport overlap_report(const std::vector<LinearizedSystem>& systems, const ManifoldFit& mf,
                             std::size_t n_null, std::uint64_t seed) {
    OverlapReport report;
    std::vector<double> abs_overlaps;
    for (const auto& ls : systems) {
        if (ls.defective) continue;
        report.fixed_point_index.push_back(ls.fixed_point_index);
        double value = 0.0;
        if (ls.complex_leading_pair) {
            Matrix basis(mf.m.size(), 2);
            basis.col(0) = ls.eig.right_vectors.col(0).real();
            basis.col(1) = ls.eig.right_vectors.col(0).imag();
            basis.col(0).normalize();
            basis.col(1) -= basis.col(0).dot(basis.col(1)) * basis.col(0);
            const double nn = basis.col(1).norm();
            if (nn > 0.0) basis.col(1) /= nn;
            value = (basis.transpose() * mf.m).norm();
        } else {
            value = ls.eig.right_vectors.col(0).real().dot(mf.m);
        }
        report.overlaps.push_back(value);
        report.complex_pair.push_back(ls.complex_leading_pair);
        abs_overlaps.push_back(std::abs(value));
    }

    Rng rng(derive_seed(seed, "overlap/null"));
    const Eigen::Index dim = mf.m.size();
    report.null_overlaps.reserve(n_null);
    Vector u(dim);
    for (std::size_t s = 0; s < n_null; ++s) {
        for (Eigen::Index i = 0; i < dim; ++i) u[i] = rng.normal();
        const double nn = u.norm();
        report.null_overlaps.push_back(nn > 0.0 ? std::abs(u.dot(mf.m)) / nn : 0.0);
    }

    auto median = [](std::vector<double> v) {
        if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    report.median_abs_overlap = median(abs_overlaps);
    if (!report.null_overlaps.empty()) {
        std::vector<double> sorted = report.null_overlaps;
        std::sort(sorted.begin(), sorted.end());
        report.null_mean =
            std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
        const std::size_t idx =
            std::min(sorted.size() - 1,
                     static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(sorted.size())) - 1));
        report.null_p99 = sorted[idx];
    }
    return report;
}

VarianceComparison dimensionality_comparison(const ClassifierModel& trained,
                                             const ClassifierModel& untrained,
                                             const std::vector<Document>& docs) {
    if (trained.state_size() != untrained.state_size() ||
        trained.cell.architecture != untrained.cell.architecture)
        throw ShapeError("dimensionality_comparison: models must share architecture and dimensions");
    const Matrix a = stack_states(collect_hidden_states(trained, docs));
    const Matrix b = stack_states(collect_hidden_states(untrained, docs));
    const Eigen::Index k = std::min(a.cols(), a.rows() - 1);
    VarianceComparison cmp;
    cmp.trained_ratios = pca_fit(a, k).explained_variance_ratio;
    cmp.untrained_ratios = pca_fit(b, std::min(b.cols(), b.rows() - 1)).explained_variance_ratio;
    return cmp;
}

double variance_captured(const PcaFit& fit, const Matrix& points) {
    if (points.rows() < 2) throw InsufficientDataError("variance_captured: need >= 2 points");
    const Matrix centered = points.rowwise() - points.colwise().mean();
    const double total = centered.squaredNorm();
    if (total <= 0.0) return 1.0;
    const Matrix proj = centered * fit.components.transpose();
    return proj.squaredNorm() / total;
}

}  // namespace rnnscope
