#pragma once

#include "rnnscope/cells.hpp"
#include "rnnscope/dataset.hpp"

#include <cstdint>
#include <vector>

namespace rnnscope {

/// Sequence classifier: embedding lookup -> recurrent cell -> affine readout
/// of the final state. The prediction is sign(w^T h_T + bias) with ties
/// resolved to the positive class.
struct ClassifierModel {
    Matrix embedding;  // vocab x input_size
    CellParameters cell;
    Vector readout_weights;  // state_size
    double readout_bias = 0.0;

    Eigen::Index state_size() const { return cell.state_size(); }
    Eigen::Index vocab_size() const { return embedding.rows(); }
    Vector initial_state() const { return Vector::Zero(cell.state_size()); }
    Vector embed(std::int32_t token) const { return embedding.row(token).transpose(); }
};

/// Embedding rows uniform in [-0.1, 0.1], Glorot readout, init_cell kernels.
ClassifierModel init_model(Architecture arch, Eigen::Index vocab, Eigen::Index hidden,
                           Eigen::Index embedding_dim, Rng& rng);

/// States h_1..h_T visited while reading a document from the zero state.
std::vector<Vector> run_document(const ClassifierModel& model, const Document& doc);

double readout_logit(const ClassifierModel& model, const Vector& state);
int predict(const ClassifierModel& model, const Document& doc);

/// Fraction of documents whose prediction matches the label.
double evaluate_accuracy(const ClassifierModel& model, const std::vector<Document>& docs);

/// Mean binary cross-entropy of the readout logits.
double evaluate_loss(const ClassifierModel& model, const std::vector<Document>& docs);

struct TrainHyperparams {
    int epochs = 5;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double grad_clip = 5.0;
};

struct EpochStats {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double validation_accuracy = 0.0;
    bool selected = false;
};

struct TrainResult {
    ClassifierModel model;  // best-validation snapshot
    std::vector<EpochStats> log;
    int best_epoch = 0;  // 0 = initialized model (epochs == 0)
    double best_validation_accuracy = 0.0;
    double initial_train_loss = 0.0;
    double final_train_loss = 0.0;
};

/// Adam + backpropagation through time, one document per update, document
/// order reshuffled each epoch. Deterministic given the seed. Aborts with a
/// diagnostic if the loss goes non-finite.
TrainResult train_classifier(const Dataset& data, Architecture arch,
                             Eigen::Index hidden, Eigen::Index embedding_dim,
                             const TrainHyperparams& hp, std::uint64_t seed);

/// All states visited over `docs` (h_1..h_T per document, concatenated in
/// document order).
std::vector<Vector> collect_hidden_states(const ClassifierModel& model,
                                          const std::vector<Document>& docs);

/// n_samples states drawn uniformly without replacement from the visited
/// states. Errors when n_samples exceeds what is available.
std::vector<Vector> sample_hidden_states(const ClassifierModel& model,
                                         const std::vector<Document>& docs, std::size_t n_samples,
                                         std::uint64_t seed);

}  // namespace rnnscope
