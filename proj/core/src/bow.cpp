#include "rnnscope/bow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace rnnscope {

namespace {

struct SparseCounts {
    std::vector<std::pair<std::int32_t, double>> entries;  // (token, count)
    int label = 0;
};

std::vector<SparseCounts> count_features(const std::vector<Document>& docs) {
    std::vector<SparseCounts> out;
    out.reserve(docs.size());
    std::vector<std::pair<std::int32_t, double>> buf;
    for (const auto& d : docs) {
        buf.clear();
        std::vector<std::int32_t> toks = d.tokens;
        std::sort(toks.begin(), toks.end());
        for (std::size_t i = 0; i < toks.size();) {
            std::size_t j = i;
            while (j < toks.size() && toks[j] == toks[i]) ++j;
            buf.emplace_back(toks[i], static_cast<double>(j - i));
            i = j;
        }
        out.push_back({buf, d.label});
    }
    return out;
}

double dot_sparse(const Vector& w, double b, const SparseCounts& f) {
    double s = b;
    for (const auto& [tok, cnt] : f.entries) s += w[tok] * cnt;
    return s;
}

// Loss and gradient of mean BCE + (l2/2)||w||^2, packed as [w; b].
double loss_and_gradient(const std::vector<SparseCounts>& feats, double l2, const Vector& packed,
                         Vector& grad) {
    const Eigen::Index dim = packed.size() - 1;
    const Vector w = packed.head(dim);
    const double b = packed[dim];
    const double inv_m = 1.0 / static_cast<double>(feats.size());
    grad.setZero();
    double loss = 0.0;
    for (const auto& f : feats) {
        const double s = dot_sparse(w, b, f);
        loss += std::max(s, 0.0) - s * f.label + std::log1p(std::exp(-std::abs(s)));
        const double err = 1.0 / (1.0 + std::exp(-s)) - f.label;
        for (const auto& [tok, cnt] : f.entries) grad[tok] += err * cnt;
        grad[dim] += err;
    }
    loss *= inv_m;
    grad *= inv_m;
    loss += 0.5 * l2 * w.squaredNorm();
    grad.head(dim) += l2 * w;
    return loss;
}

}  // namespace

double bow_accuracy(const ValenceLexicon& lexicon, const std::vector<Document>& docs) {
    if (docs.empty()) throw DataError("bow_accuracy: empty split");
    std::size_t correct = 0;
    for (const auto& d : docs) {
        double s = lexicon.intercept;
        for (auto tok : d.tokens) s += lexicon.coefficients[tok];
        correct += (s >= 0.0 ? 1 : 0) == d.label;
    }
    return static_cast<double>(correct) / static_cast<double>(docs.size());
}

BowResult train_bow_baseline(const Dataset& data, double l2, std::size_t valence_set_size,
                             std::size_t max_iterations) {
    if (data.train.empty()) throw DataError("train_bow_baseline: empty train split");
    if (!(l2 > 0.0)) throw ConfigError("train_bow_baseline: l2 must be > 0");

    const auto feats = count_features(data.train);
    const Eigen::Index dim = data.vocabulary.size();
    Vector packed = Vector::Zero(dim + 1);
    Vector grad(dim + 1), grad_new(dim + 1);

    constexpr double kTol = 1e-6;
    constexpr int kHistory = 10;
    std::deque<Vector> s_hist, y_hist;
    std::deque<double> rho_hist;

    double loss = loss_and_gradient(feats, l2, packed, grad);
    int iter = 0;
    bool converged = grad.norm() < kTol;

    // two-loop recursion L-BFGS with Armijo backtracking
    while (!converged && iter < static_cast<int>(max_iterations)) {
        Vector q = grad;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t i = s_hist.size(); i-- > 0;) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const double gamma =
                s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Vector direction = -q;
        if (direction.dot(grad) > -1e-16 * grad.norm()) direction = -grad;

        double step = 1.0;
        const double slope = grad.dot(direction);
        Vector candidate;
        double new_loss = loss;
        for (int ls = 0; ls < 40; ++ls) {
            candidate = packed + step * direction;
            new_loss = loss_and_gradient(feats, l2, candidate, grad_new);
            if (new_loss <= loss + 1e-4 * step * slope) break;
            step *= 0.5;
        }

        Vector s = candidate - packed;
        Vector y = grad_new - grad;
        const double sy = s.dot(y);
        if (sy > 1e-12) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (s_hist.size() > kHistory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        packed = std::move(candidate);
        grad = grad_new;
        loss = new_loss;
        ++iter;
        converged = grad.norm() < kTol;
    }

    BowResult result;
    result.lexicon.coefficients = packed.head(dim);
    result.lexicon.intercept = packed[dim];
    result.iterations = iter;
    result.final_gradient_norm = grad.norm();
    result.converged = converged;

    // valence sets over observed tokens only
    std::vector<char> observed(dim, 0);
    for (const auto& f : feats)
        for (const auto& [tok, cnt] : f.entries) observed[tok] = 1;
    std::vector<std::int32_t> ids;
    for (Eigen::Index i = 0; i < dim; ++i)
        if (observed[i]) ids.push_back(static_cast<std::int32_t>(i));

    const auto& coef = result.lexicon.coefficients;
    std::size_t k = std::min(valence_set_size, ids.size() / 3);
    if (k == 0) throw InsufficientDataError("train_bow_baseline: too few observed tokens for valence sets");

    std::vector<std::int32_t> by_desc = ids;
    std::sort(by_desc.begin(), by_desc.end(), [&](auto a, auto b) {
        return coef[a] != coef[b] ? coef[a] > coef[b] : a < b;
    });
    std::vector<char> taken(dim, 0);
    for (std::size_t i = 0; i < k && coef[by_desc[i]] > 0.0; ++i) {
        result.lexicon.positive_words.push_back(by_desc[i]);
        taken[by_desc[i]] = 1;
    }
    for (std::size_t i = 0; i < k; ++i) {
        const auto id = by_desc[by_desc.size() - 1 - i];
        if (!(coef[id] < 0.0)) break;
        result.lexicon.negative_words.push_back(id);
        taken[id] = 1;
    }
    std::vector<std::int32_t> by_abs = ids;
    std::sort(by_abs.begin(), by_abs.end(), [&](auto a, auto b) {
        const double ma = std::abs(coef[a]), mb = std::abs(coef[b]);
        return ma != mb ? ma < mb : a < b;
    });
    for (auto id : by_abs) {
        if (result.lexicon.neutral_words.size() >= k) break;
        if (!taken[id]) result.lexicon.neutral_words.push_back(id);
    }

    result.train_accuracy = bow_accuracy(result.lexicon, data.train);
    if (!data.validation.empty())
        result.validation_accuracy = bow_accuracy(result.lexicon, data.validation);
    if (!data.test.empty()) result.test_accuracy = bow_accuracy(result.lexicon, data.test);
    return result;
}

}  // namespace rnnscope
