#pragma once

#include "rnnscope/common.hpp"
#include "rnnscope/rng.hpp"

#include <string>
#include <vector>

namespace rnnscope {

enum class Architecture { Vanilla, Gru, Lstm, Ugrnn, Linear };

const char* architecture_name(Architecture a);
Architecture architecture_from_name(const std::string& name);

/// Parameters of one recurrent cell. Each gate owns a combined kernel
/// K (N x (N + input_size)) acting on [h; x] and a bias (N). Gate order and
/// the exact update equations per architecture are pinned in docs/cells.md.
/// For the LSTM the state vector is the concatenation [c; h] (length 2N);
/// fixed points and Jacobians are defined on that full state.
struct CellParameters {
    Architecture architecture = Architecture::Vanilla;
    Eigen::Index hidden_size = 0;
    Eigen::Index input_size = 0;
    std::vector<Matrix> kernels;
    std::vector<Vector> biases;

    Eigen::Index state_size() const {
        return architecture == Architecture::Lstm ? 2 * hidden_size : hidden_size;
    }
    Eigen::Index n_gates() const { return static_cast<Eigen::Index>(kernels.size()); }
};

/// Number of gates (kernel/bias pairs) of an architecture.
int gate_count(Architecture a);

/// Stable per-gate tensor names, used by checkpoints.
const std::vector<std::string>& gate_names(Architecture a);

/// All-zero parameters with the right shapes.
CellParameters zero_cell(Architecture a, Eigen::Index hidden, Eigen::Index input);

/// Glorot-uniform kernels; gate biases follow the pinned conventions
/// (GRU reset/update 1.0, LSTM forget 1.0, UGRNN gate 1.0, rest zero).
CellParameters init_cell(Architecture a, Eigen::Index hidden, Eigen::Index input, Rng& rng);

/// One state update h_{t+1} = F(h_t, x_t).
Vector cell_step(const CellParameters& p, const Vector& state, const Vector& x);

struct CellJacobians {
    Matrix j_rec;  // state_size x state_size
    Matrix j_inp;  // state_size x input_size
};

/// Analytic Jacobians of cell_step at (state, x).
CellJacobians cell_jacobians(const CellParameters& p, const Vector& state, const Vector& x);

/// Central-difference Jacobians; the test oracle for cell_jacobians and an
/// optional runtime cross-check.
CellJacobians fd_jacobian(const CellParameters& p, const Vector& state, const Vector& x,
                          double step);

/// Gradients of upstream^T F(state, x) with respect to every parameter
/// tensor plus the state and input (the BPTT backward step).
struct CellGradients {
    std::vector<Matrix> d_kernels;
    std::vector<Vector> d_biases;
    Vector d_state;
    Vector d_input;
};

CellGradients cell_backward(const CellParameters& p, const Vector& state, const Vector& x,
                            const Vector& upstream);

/// State/input gradients only; skips the kernel outer products. Used in the
/// fixed-point optimizer inner loop.
Vector cell_backward_state(const CellParameters& p, const Vector& state, const Vector& x,
                           const Vector& upstream);

}  // namespace rnnscope
