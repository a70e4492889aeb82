#include "rnnscope/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rnnscope {

namespace {

double stable_bce(double logit, int label) {
    // max(s,0) - s*y + log(1 + exp(-|s|))
    return std::max(logit, 0.0) - logit * label + std::log1p(std::exp(-std::abs(logit)));
}

double sigmoid_scalar(double v) { return 1.0 / (1.0 + std::exp(-v)); }

/// Flat view over every trainable tensor of a model, so the optimizer and
/// the gradient buffer share one layout: embedding, cell kernels, cell
/// biases, readout weights, readout bias.
struct GradientBuffer {
    Matrix d_embedding;
    std::vector<Matrix> d_kernels;
    std::vector<Vector> d_biases;
    Vector d_readout;
    double d_readout_bias = 0.0;

    explicit GradientBuffer(const ClassifierModel& m)
        : d_embedding(Matrix::Zero(m.embedding.rows(), m.embedding.cols())),
          d_kernels(m.cell.kernels.size(),
                    Matrix::Zero(m.cell.hidden_size, m.cell.hidden_size + m.cell.input_size)),
          d_biases(m.cell.biases.size(), Vector::Zero(m.cell.hidden_size)),
          d_readout(Vector::Zero(m.state_size())) {}

    double squared_norm() const {
        double s = d_embedding.squaredNorm() + d_readout.squaredNorm() +
                   d_readout_bias * d_readout_bias;
        for (const auto& k : d_kernels) s += k.squaredNorm();
        for (const auto& b : d_biases) s += b.squaredNorm();
        return s;
    }

    void scale(double f) {
        d_embedding *= f;
        for (auto& k : d_kernels) k *= f;
        for (auto& b : d_biases) b *= f;
        d_readout *= f;
        d_readout_bias *= f;
    }
};

struct AdamState {
    GradientBuffer m, v;
    long step = 0;
    explicit AdamState(const ClassifierModel& model) : m(model), v(model) {}
};

template <typename TensorT>
void adam_tensor(TensorT& param, const TensorT& grad, TensorT& m, TensorT& v,
                 const TrainHyperparams& hp, double bc1, double bc2) {
    m = hp.adam_beta1 * m + (1.0 - hp.adam_beta1) * grad;
    v = (hp.adam_beta2 * v.array() + (1.0 - hp.adam_beta2) * grad.array().square()).matrix();
    param.array() -=
        hp.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + hp.adam_epsilon);
}

void adam_update(ClassifierModel& model, GradientBuffer& g, AdamState& st,
                 const TrainHyperparams& hp, const std::vector<std::int32_t>& touched_rows) {
    ++st.step;
    const double bc1 = 1.0 - std::pow(hp.adam_beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(hp.adam_beta2, static_cast<double>(st.step));

    adam_tensor(model.embedding, g.d_embedding, st.m.d_embedding, st.v.d_embedding, hp, bc1, bc2);
    for (std::size_t i = 0; i < model.cell.kernels.size(); ++i) {
        adam_tensor(model.cell.kernels[i], g.d_kernels[i], st.m.d_kernels[i], st.v.d_kernels[i],
                    hp, bc1, bc2);
        adam_tensor(model.cell.biases[i], g.d_biases[i], st.m.d_biases[i], st.v.d_biases[i], hp,
                    bc1, bc2);
    }
    adam_tensor(model.readout_weights, g.d_readout, st.m.d_readout, st.v.d_readout, hp, bc1, bc2);

    auto& mb = st.m.d_readout_bias;
    auto& vb = st.v.d_readout_bias;
    mb = hp.adam_beta1 * mb + (1.0 - hp.adam_beta1) * g.d_readout_bias;
    vb = hp.adam_beta2 * vb + (1.0 - hp.adam_beta2) * g.d_readout_bias * g.d_readout_bias;
    model.readout_bias -= hp.learning_rate * (mb / bc1) / (std::sqrt(vb / bc2) + hp.adam_epsilon);

    // only the embedding rows of this document carried gradient
    for (auto r : touched_rows) g.d_embedding.row(r).setZero();
    for (auto& k : g.d_kernels) k.setZero();
    for (auto& b : g.d_biases) b.setZero();
    g.d_readout.setZero();
    g.d_readout_bias = 0.0;
}

}  // namespace

ClassifierModel init_model(Architecture arch, Eigen::Index vocab, Eigen::Index hidden,
                           Eigen::Index embedding_dim, Rng& rng) {
    if (vocab < 2) throw ShapeError("init_model: vocabulary too small");
    ClassifierModel m;
    m.cell = init_cell(arch, hidden, embedding_dim, rng);
    m.embedding.resize(vocab, embedding_dim);
    for (Eigen::Index i = 0; i < vocab; ++i)
        for (Eigen::Index j = 0; j < embedding_dim; ++j) m.embedding(i, j) = rng.uniform(-0.1, 0.1);
    const double limit = std::sqrt(6.0 / static_cast<double>(m.state_size() + 1));
    m.readout_weights.resize(m.state_size());
    for (Eigen::Index i = 0; i < m.state_size(); ++i) m.readout_weights[i] = rng.uniform(-limit, limit);
    m.readout_bias = 0.0;
    return m;
}

std::vector<Vector> run_document(const ClassifierModel& model, const Document& doc) {
    if (doc.tokens.empty()) throw DataError("run_document: empty document");
    std::vector<Vector> states;
    states.reserve(doc.tokens.size());
    Vector h = model.initial_state();
    for (auto tok : doc.tokens) {
        h = cell_step(model.cell, h, model.embed(tok));
        states.push_back(h);
    }
    return states;
}

double readout_logit(const ClassifierModel& model, const Vector& state) {
    return model.readout_weights.dot(state) + model.readout_bias;
}

int predict(const ClassifierModel& model, const Document& doc) {
    Vector h = model.initial_state();
    for (auto tok : doc.tokens) h = cell_step(model.cell, h, model.embed(tok));
    return readout_logit(model, h) >= 0.0 ? 1 : 0;  // tie -> positive class
}

double evaluate_accuracy(const ClassifierModel& model, const std::vector<Document>& docs) {
    if (docs.empty()) throw DataError("evaluate_accuracy: empty split");
    std::size_t correct = 0;
    for (const auto& d : docs) correct += predict(model, d) == d.label;
    return static_cast<double>(correct) / static_cast<double>(docs.size());
}

double evaluate_loss(const ClassifierModel& model, const std::vector<Document>& docs) {
    if (docs.empty()) throw DataError("evaluate_loss: empty split");
    double total = 0.0;
    for (const auto& d : docs) {
        Vector h = model.initial_state();
        for (auto tok : d.tokens) h = cell_step(model.cell, h, model.embed(tok));
        total += stable_bce(readout_logit(model, h), d.label);
    }
    return total / static_cast<double>(docs.size());
}

TrainResult train_classifier(const Dataset& data, Architecture arch, Eigen::Index hidden,
                             Eigen::Index embedding_dim, const TrainHyperparams& hp,
                             std::uint64_t seed) {
    if (data.train.empty() || data.validation.empty() || data.test.empty())
        throw DataError("train_classifier: empty split");
    if (hp.epochs < 0) throw ConfigError("train_classifier: epochs must be >= 0");

    Rng init_rng(derive_seed(seed, "model/init"));
    ClassifierModel model =
        init_model(arch, data.vocabulary.size(), hidden, embedding_dim, init_rng);

    TrainResult result;
    result.initial_train_loss = evaluate_loss(model, data.train);
    result.best_validation_accuracy = evaluate_accuracy(model, data.validation);
    result.model = model;
    if (hp.epochs == 0) {
        result.final_train_loss = result.initial_train_loss;
        return result;
    }

    Rng order_rng(derive_seed(seed, "train/order"));
    GradientBuffer grads(model);
    AdamState adam(model);
    const Vector zero_state = model.initial_state();
    std::vector<std::size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    result.best_epoch = 0;
    double best_val = -1.0;  // epochs >= 1 selects among trained epochs only

    for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
        order_rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        std::vector<std::int32_t> touched;
        std::vector<Vector> states;

        for (std::size_t di = 0; di < order.size(); ++di) {
            const Document& doc = data.train[order[di]];
            // forward
            states.clear();
            Vector h = model.initial_state();
            for (auto tok : doc.tokens) {
                h = cell_step(model.cell, h, model.embed(tok));
                states.push_back(h);
            }
            const double logit = readout_logit(model, states.back());
            const double loss = stable_bce(logit, doc.label);
            if (!std::isfinite(loss))
                throw NumericsError("training diverged (non-finite loss) at epoch " +
                                    std::to_string(epoch) + ", update " + std::to_string(di));
            loss_sum += loss;
            correct += (logit >= 0.0 ? 1 : 0) == doc.label;

            // backward through time
            const double dlogit = sigmoid_scalar(logit) - doc.label;
            grads.d_readout = dlogit * states.back();
            grads.d_readout_bias = dlogit;
            Vector upstream = dlogit * model.readout_weights;
            touched.clear();
            for (std::size_t t = doc.tokens.size(); t-- > 0;) {
                const Vector& prev = t == 0 ? zero_state : states[t - 1];
                CellGradients cg =
                    cell_backward(model.cell, prev, model.embed(doc.tokens[t]), upstream);
                for (std::size_t g = 0; g < grads.d_kernels.size(); ++g) {
                    grads.d_kernels[g] += cg.d_kernels[g];
                    grads.d_biases[g] += cg.d_biases[g];
                }
                grads.d_embedding.row(doc.tokens[t]) += cg.d_input.transpose();
                touched.push_back(doc.tokens[t]);
                upstream = std::move(cg.d_state);
            }

            const double norm = std::sqrt(grads.squared_norm());
            if (hp.grad_clip > 0.0 && norm > hp.grad_clip) grads.scale(hp.grad_clip / norm);
            adam_update(model, grads, adam, hp, touched);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / static_cast<double>(order.size());
        stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
        stats.validation_accuracy = evaluate_accuracy(model, data.validation);
        if (stats.validation_accuracy > best_val) {
            best_val = stats.validation_accuracy;
            result.best_epoch = epoch;
            result.model = model;
        }
        result.log.push_back(stats);
    }

    for (auto& s : result.log) s.selected = s.epoch == result.best_epoch;
    result.best_validation_accuracy = best_val;
    result.final_train_loss = result.log.back().train_loss;
    return result;
}

std::vector<Vector> collect_hidden_states(const ClassifierModel& model,
                                          const std::vector<Document>& docs) {
    if (docs.empty()) throw DataError("collect_hidden_states: no documents");
    std::vector<Vector> states;
    for (const auto& doc : docs) {
        Vector h = model.initial_state();
        for (auto tok : doc.tokens) {
            h = cell_step(model.cell, h, model.embed(tok));
            states.push_back(h);
        }
    }
    return states;
}

std::vector<Vector> sample_hidden_states(const ClassifierModel& model,
                                         const std::vector<Document>& docs, std::size_t n_samples,
                                         std::uint64_t seed) {
    const auto all = collect_hidden_states(model, docs);
    if (n_samples > all.size())
        throw DataError("sample_hidden_states: requested " + std::to_string(n_samples) +
                        " samples but only " + std::to_string(all.size()) + " states were visited");
    Rng rng(derive_seed(seed, "states/sample"));
    std::vector<Vector> out;
    out.reserve(n_samples);
    for (auto idx : rng.sample_without_replacement(all.size(), n_samples)) out.push_back(all[idx]);
    return out;
}

}  // namespace rnnscope
