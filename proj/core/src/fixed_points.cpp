#include "rnnscope/fixed_points.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace rnnscope {

double q_loss(const ClassifierModel& model, const Vector& h) {
    const Vector zero_input = Vector::Zero(model.cell.input_size);
    const Vector diff = h - cell_step(model.cell, h, zero_input);
    return diff.squaredNorm() / static_cast<double>(h.size());
}

Vector q_gradient(const ClassifierModel& model, const Vector& h) {
    const Vector zero_input = Vector::Zero(model.cell.input_size);
    const Vector diff = h - cell_step(model.cell, h, zero_input);
    // dq/dh = (2/N) (d - J_rec^T d)
    const Vector jt_d = cell_backward_state(model.cell, h, zero_input, diff);
    return (2.0 / static_cast<double>(h.size())) * (diff - jt_d);
}

namespace {

struct CandidateOutcome {
    bool accepted = false;
    FixedPoint point;
    RejectedCandidate reject;
};

CandidateOutcome optimize_candidate(const ClassifierModel& model, const Vector& h0,
                                    std::size_t id, const FixedPointSearchConfig& cfg) {
    Vector h = h0;
    Vector m = Vector::Zero(h.size()), v = Vector::Zero(h.size());
    double best_q = q_loss(model, h);
    Vector best_h = h;
    int iter = 0;
    const double early_stop = cfg.threshold > 0.0 ? cfg.threshold / 10.0 : 0.0;

    while (iter < cfg.max_iterations && best_q > early_stop) {
        const Vector g = q_gradient(model, h);
        if (!g.allFinite()) {
            CandidateOutcome out;
            out.reject = {id, best_q, iter, "diverged (non-finite gradient)"};
            return out;
        }
        ++iter;
        const double lr = cfg.learning_rate *
                          std::pow(cfg.lr_decay, static_cast<double>((iter - 1) / cfg.decay_every));
        m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
        v = (cfg.adam_beta2 * v.array() + (1.0 - cfg.adam_beta2) * g.array().square()).matrix();
        const double bc1 = 1.0 - std::pow(cfg.adam_beta1, iter);
        const double bc2 = 1.0 - std::pow(cfg.adam_beta2, iter);
        h.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.adam_epsilon);
        if (!h.allFinite()) {
            CandidateOutcome out;
            out.reject = {id, best_q, iter, "diverged (non-finite state)"};
            return out;
        }
        const double q = q_loss(model, h);
        if (q < best_q) {
            best_q = q;
            best_h = h;
        }
    }

    CandidateOutcome out;
    if (best_q < cfg.threshold) {
        out.accepted = true;
        out.point = {std::move(best_h), best_q, iter, id,
                     std::numeric_limits<double>::quiet_NaN()};
    } else {
        out.reject = {id, best_q, iter, "q above threshold"};
    }
    return out;
}

}  // namespace

FixedPointSearchResult find_fixed_points(const ClassifierModel& model,
                                         const std::vector<Vector>& initial_states,
                                         const FixedPointSearchConfig& cfg) {
    if (cfg.threshold < 0.0) throw ConfigError("find_fixed_points: threshold must be >= 0");
    for (const auto& h : initial_states)
        if (h.size() != model.state_size())
            throw ShapeError("find_fixed_points: initial state dimension mismatch");

    std::vector<CandidateOutcome> outcomes(initial_states.size());
    const unsigned threads = std::max(1u, cfg.n_threads);
    if (threads == 1 || initial_states.size() < 2) {
        for (std::size_t i = 0; i < initial_states.size(); ++i)
            outcomes[i] = optimize_candidate(model, initial_states[i], i, cfg);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= initial_states.size()) return;
                    outcomes[i] = optimize_candidate(model, initial_states[i], i, cfg);
                }
            });
        for (auto& th : pool) th.join();
    }

    FixedPointSearchResult result;
    for (auto& o : outcomes) {
        if (o.accepted)
            result.accepted.push_back(std::move(o.point));
        else
            result.rejected.push_back(std::move(o.reject));
    }
    return result;
}

std::vector<double> simulate_autonomous(const ClassifierModel& model, const Vector& h0,
                                        int n_steps) {
    if (n_steps < 1) throw ShapeError("simulate_autonomous: n_steps must be >= 1");
    const Vector zero_input = Vector::Zero(model.cell.input_size);
    std::vector<double> velocity;
    velocity.reserve(n_steps);
    Vector h = h0;
    for (int t = 0; t < n_steps; ++t) {
        const Vector next = cell_step(model.cell, h, zero_input);
        const double denom = h.norm();
        const double step_norm = (next - h).norm();
        velocity.push_back(denom > 0.0 ? step_norm / denom : step_norm);
        h = next;
    }
    return velocity;
}

}  // namespace rnnscope
