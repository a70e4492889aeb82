#include "rnnscope/training.hpp"

#include "rnnscope/bow.hpp"

#include <doctest.h>

#include <cmath>

using namespace rnnscope;

namespace {

SyntheticSpec small_spec() {
    SyntheticSpec spec;
    spec.content_tokens = 20;
    spec.positive_tokens = 1;  // exact +-1 valences
    spec.negative_tokens = 1;
    spec.valence_weight = 3.0;
    spec.doc_length_min = 8;
    spec.doc_length_max = 20;
    spec.train_docs = 1500;
    spec.dev_docs = 200;
    spec.test_docs = 400;
    return spec;
}

bool models_equal(const ClassifierModel& a, const ClassifierModel& b) {
    if ((a.embedding - b.embedding).cwiseAbs().maxCoeff() != 0.0) return false;
    for (std::size_t g = 0; g < a.cell.kernels.size(); ++g) {
        if ((a.cell.kernels[g] - b.cell.kernels[g]).cwiseAbs().maxCoeff() != 0.0) return false;
        if ((a.cell.biases[g] - b.cell.biases[g]).cwiseAbs().maxCoeff() != 0.0) return false;
    }
    return (a.readout_weights - b.readout_weights).cwiseAbs().maxCoeff() == 0.0 &&
           a.readout_bias == b.readout_bias;
}

}  // namespace

TEST_CASE("train_classifier: linear cell solves the synthetic valence task") {
    const Dataset ds = generate_synthetic(small_spec(), 23);
    TrainHyperparams hp;
    hp.epochs = 12;  // well under the 20-epoch budget
    const auto result = train_classifier(ds, Architecture::Linear, 12, 6, hp, 23);
    CHECK(evaluate_accuracy(result.model, ds.test) >= 0.99);
    CHECK(result.final_train_loss < result.initial_train_loss);

    // sanity against the bag-of-words oracle: the task is linearly solvable
    const auto bow = train_bow_baseline(ds, 1e-3, 3, 2000);
    CHECK(bow.test_accuracy >= 0.99);
}

TEST_CASE("train_classifier: zero epochs returns the initialized model at chance") {
    const Dataset ds = generate_synthetic(small_spec(), 29);
    TrainHyperparams hp;
    hp.epochs = 0;
    const auto result = train_classifier(ds, Architecture::Gru, 8, 4, hp, 29);
    CHECK(result.best_epoch == 0);
    CHECK(result.log.empty());

    Rng init_rng(derive_seed(29, "model/init"));
    const ClassifierModel fresh = init_model(Architecture::Gru, ds.vocabulary.size(), 8, 4, init_rng);
    CHECK(models_equal(result.model, fresh));

    const double acc = evaluate_accuracy(result.model, ds.test);
    CHECK(acc >= 0.3);
    CHECK(acc <= 0.7);
}

TEST_CASE("train_classifier: bit-deterministic given the seed") {
    SyntheticSpec spec = small_spec();
    spec.train_docs = 300;
    spec.test_docs = 50;
    const Dataset ds = generate_synthetic(spec, 31);
    TrainHyperparams hp;
    hp.epochs = 2;
    const auto a = train_classifier(ds, Architecture::Ugrnn, 8, 4, hp, 5);
    const auto b = train_classifier(ds, Architecture::Ugrnn, 8, 4, hp, 5);
    CHECK(models_equal(a.model, b.model));
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].train_loss == b.log[i].train_loss);
        CHECK(a.log[i].validation_accuracy == b.log[i].validation_accuracy);
    }
}

TEST_CASE("train_classifier: best-validation epoch is selected") {
    SyntheticSpec spec = small_spec();
    spec.train_docs = 400;
    const Dataset ds = generate_synthetic(spec, 37);
    TrainHyperparams hp;
    hp.epochs = 4;
    const auto result = train_classifier(ds, Architecture::Gru, 8, 4, hp, 37);
    double best = -1.0;
    int best_epoch = 0;
    for (const auto& e : result.log)
        if (e.validation_accuracy > best) {
            best = e.validation_accuracy;
            best_epoch = e.epoch;
        }
    CHECK(result.best_epoch == best_epoch);
    CHECK(result.best_validation_accuracy == best);
    CHECK(evaluate_accuracy(result.model, ds.validation) == best);
}

TEST_CASE("train_classifier: divergence aborts with a diagnostic") {
    SyntheticSpec spec = small_spec();
    spec.train_docs = 100;
    const Dataset ds = generate_synthetic(spec, 41);
    TrainHyperparams hp;
    hp.epochs = 3;
    hp.learning_rate = 1e80;  // linear cell state overflows within one document
    hp.grad_clip = 0.0;
    CHECK_THROWS_AS(train_classifier(ds, Architecture::Linear, 8, 4, hp, 41), NumericsError);
}

TEST_CASE("evaluate_accuracy: zero readout predicts the positive class everywhere") {
    SyntheticSpec spec = small_spec();
    spec.train_docs = 50;
    spec.test_docs = 200;
    const Dataset ds = generate_synthetic(spec, 43);
    Rng rng(1);
    ClassifierModel model = init_model(Architecture::Vanilla, ds.vocabulary.size(), 6, 4, rng);
    model.readout_weights.setZero();
    model.readout_bias = 0.0;
    std::size_t positive = 0;
    for (const auto& d : ds.test) positive += d.label;
    CHECK(evaluate_accuracy(model, ds.test) ==
          doctest::Approx(static_cast<double>(positive) / static_cast<double>(ds.test.size())));
}

TEST_CASE("evaluate_accuracy: hand-built accumulator is perfect on the synthetic task") {
    SyntheticSpec spec = small_spec();
    spec.train_docs = 50;
    spec.test_docs = 300;
    const Dataset ds = generate_synthetic(spec, 47);
    const auto valences = synthetic_valences(spec);

    ClassifierModel model;
    model.cell = zero_cell(Architecture::Linear, 1, 1);
    model.cell.kernels[0](0, 0) = 1.0;  // h' = h + x
    model.cell.kernels[0](0, 1) = 1.0;
    model.embedding = Matrix::Zero(ds.vocabulary.size(), 1);
    for (std::int32_t i = 0; i < ds.vocabulary.size(); ++i)
        model.embedding(i, 0) = static_cast<double>(valences[i]);
    model.readout_weights = Vector::Ones(1);
    model.readout_bias = 0.0;
    CHECK(evaluate_accuracy(model, ds.test) == 1.0);
}

TEST_CASE("sample_hidden_states: exhaustive draw returns every visited state") {
    SyntheticSpec spec = small_spec();
    spec.train_docs = 20;
    spec.test_docs = 20;
    const Dataset ds = generate_synthetic(spec, 53);
    Rng rng(2);
    const ClassifierModel model = init_model(Architecture::Gru, ds.vocabulary.size(), 6, 4, rng);

    const auto all = collect_hidden_states(model, ds.test);
    const auto sampled = sample_hidden_states(model, ds.test, all.size(), 53);
    REQUIRE(sampled.size() == all.size());
    for (const auto& s : sampled) CHECK(s.allFinite());

    CHECK_THROWS_AS(sample_hidden_states(model, ds.test, all.size() + 1, 53), DataError);
}

TEST_CASE("sample_hidden_states: sample mean within 3 standard errors per dimension") {
    SyntheticSpec spec = small_spec();
    spec.test_docs = 100;
    const Dataset ds = generate_synthetic(spec, 59);
    Rng rng(3);
    const ClassifierModel model = init_model(Architecture::Gru, ds.vocabulary.size(), 6, 4, rng);
    const auto all = collect_hidden_states(model, ds.test);
    const std::size_t n = all.size() / 2;
    const auto sampled = sample_hidden_states(model, ds.test, n, 61);

    Vector mean_all = Vector::Zero(6), mean_s = Vector::Zero(6), var_all = Vector::Zero(6);
    for (const auto& s : all) mean_all += s;
    mean_all /= static_cast<double>(all.size());
    for (const auto& s : all) var_all += (s - mean_all).cwiseProduct(s - mean_all);
    var_all /= static_cast<double>(all.size() - 1);
    for (const auto& s : sampled) mean_s += s;
    mean_s /= static_cast<double>(n);
    for (Eigen::Index d = 0; d < 6; ++d) {
        const double se = std::sqrt(var_all[d] / static_cast<double>(n));
        CHECK(std::abs(mean_s[d] - mean_all[d]) <= 3.0 * se + 1e-12);
    }
}
