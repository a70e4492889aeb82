#pragma once

#include "rnnscope/dataset.hpp"

#include <cstdint>
#include <vector>

namespace rnnscope {

/// Bag-of-words logistic-regression coefficients per vocabulary token, with
/// disjoint word sets picked by coefficient sign and magnitude: positive =
/// largest positive coefficients, negative = most negative, neutral =
/// smallest |coefficient|. Sets draw only from tokens observed in training.
struct ValenceLexicon {
    Vector coefficients;  // per vocabulary id
    double intercept = 0.0;
    std::vector<std::int32_t> positive_words;
    std::vector<std::int32_t> negative_words;
    std::vector<std::int32_t> neutral_words;
};

struct BowResult {
    ValenceLexicon lexicon;
    double train_accuracy = 0.0;
    double validation_accuracy = 0.0;
    double test_accuracy = 0.0;
    int iterations = 0;
    double final_gradient_norm = 0.0;
    bool converged = false;
};

/// L2-regularized logistic regression on token counts, minimized to
/// gradient norm < 1e-6 (or max_iterations) with L-BFGS. Requires l2 > 0 so
/// separable data cannot push coefficients to infinity. Loss is the mean
/// cross-entropy plus (l2/2)||w||^2; the intercept is not penalized.
BowResult train_bow_baseline(const Dataset& data, double l2, std::size_t valence_set_size,
                             std::size_t max_iterations = 2000);

/// Accuracy of a coefficient vector on a document split (logit >= 0 -> 1).
double bow_accuracy(const ValenceLexicon& lexicon, const std::vector<Document>& docs);

}  // namespace rnnscope
