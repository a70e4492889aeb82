#pragma once

#include "rnnscope/training.hpp"

#include <limits>
#include <string>
#include <vector>

namespace rnnscope {

/// An approximate fixed point of the zero-input dynamics: q(h*) below the
/// acceptance threshold, where q = (1/N)||h - F(h, 0)||^2 over the full
/// state dimension N. theta is filled in later by the manifold fit.
struct FixedPoint {
    Vector h_star;
    double q_value = 0.0;
    int n_iterations = 0;
    std::size_t initial_state_id = 0;
    double theta = std::numeric_limits<double>::quiet_NaN();
};

struct RejectedCandidate {
    std::size_t initial_state_id = 0;
    double q_value = 0.0;
    int n_iterations = 0;
    std::string reason;
};

struct FixedPointSearchConfig {
    double threshold = 1e-8;
    double learning_rate = 1e-2;
    double lr_decay = 0.5;
    int decay_every = 1000;
    int max_iterations = 10000;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    unsigned n_threads = 1;
};

struct FixedPointSearchResult {
    std::vector<FixedPoint> accepted;           // by ascending initial_state_id
    std::vector<RejectedCandidate> rejected;    // failed threshold or diverged
};

/// q = (1/N) ||h - F(h, 0)||_2^2.
double q_loss(const ClassifierModel& model, const Vector& h);

/// Analytic gradient of q_loss with respect to h (chain rule through one
/// cell application).
Vector q_gradient(const ClassifierModel& model, const Vector& h);

/// Adam descent on q from every initial state independently; each candidate
/// reports the best iterate of its trajectory and is accepted when that q
/// beats the threshold. Nothing is deduplicated; rejects are retained with
/// their final q. Candidates are independent, so the search may run on
/// several threads; results aggregate in initial-state order either way.
FixedPointSearchResult find_fixed_points(const ClassifierModel& model,
                                         const std::vector<Vector>& initial_states,
                                         const FixedPointSearchConfig& config);

/// Iterate F(., 0) from h0, recording the normalized velocity
/// ||h_{t+1} - h_t|| / ||h_t|| per step (absolute step norm when ||h_t|| = 0).
std::vector<double> simulate_autonomous(const ClassifierModel& model, const Vector& h0,
                                        int n_steps);

}  // namespace rnnscope
