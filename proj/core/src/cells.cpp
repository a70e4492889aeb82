#include "rnnscope/cells.hpp"

#include <cmath>

namespace rnnscope {

namespace {

Vector sigmoid(const Vector& v) { return (1.0 / (1.0 + (-v.array()).exp())).matrix(); }

void check_shapes(const CellParameters& p, const Vector& state, const Vector& x,
                  const char* what) {
    if (state.size() != p.state_size())
        throw ShapeError(std::string(what) + ": state has length " + std::to_string(state.size()) +
                         ", expected " + std::to_string(p.state_size()));
    if (x.size() != p.input_size)
        throw ShapeError(std::string(what) + ": input has length " + std::to_string(x.size()) +
                         ", expected " + std::to_string(p.input_size));
    if (p.kernels.size() != static_cast<std::size_t>(gate_count(p.architecture)))
        throw ShapeError(std::string(what) + ": wrong gate count for architecture");
}

// Gate pre-activation a = K [h; x] + b.
Vector gate_pre(const CellParameters& p, int g, const Vector& h, const Vector& x) {
    const Matrix& k = p.kernels[g];
    return k.leftCols(p.hidden_size) * h + k.rightCols(p.input_size) * x + p.biases[g];
}

}  // namespace

const char* architecture_name(Architecture a) {
    switch (a) {
        case Architecture::Vanilla: return "vanilla";
        case Architecture::Gru: return "gru";
        case Architecture::Lstm: return "lstm";
        case Architecture::Ugrnn: return "ugrnn";
        case Architecture::Linear: return "linear";
    }
    return "?";
}

Architecture architecture_from_name(const std::string& name) {
    if (name == "vanilla") return Architecture::Vanilla;
    if (name == "gru") return Architecture::Gru;
    if (name == "lstm") return Architecture::Lstm;
    if (name == "ugrnn") return Architecture::Ugrnn;
    if (name == "linear") return Architecture::Linear;
    throw ConfigError("unknown architecture: " + name);
}

int gate_count(Architecture a) {
    switch (a) {
        case Architecture::Vanilla:
        case Architecture::Linear: return 1;
        case Architecture::Ugrnn: return 2;
        case Architecture::Gru: return 3;
        case Architecture::Lstm: return 4;
    }
    return 0;
}

const std::vector<std::string>& gate_names(Architecture a) {
    static const std::vector<std::string> vanilla{"cell"};
    static const std::vector<std::string> linear{"cell"};
    static const std::vector<std::string> gru{"reset", "update", "candidate"};
    static const std::vector<std::string> lstm{"input", "forget", "cell", "output"};
    static const std::vector<std::string> ugrnn{"gate", "candidate"};
    switch (a) {
        case Architecture::Vanilla: return vanilla;
        case Architecture::Gru: return gru;
        case Architecture::Lstm: return lstm;
        case Architecture::Ugrnn: return ugrnn;
        case Architecture::Linear: return linear;
    }
    return vanilla;
}

CellParameters zero_cell(Architecture a, Eigen::Index hidden, Eigen::Index input) {
    if (hidden < 1 || input < 1) throw ShapeError("zero_cell: sizes must be >= 1");
    CellParameters p;
    p.architecture = a;
    p.hidden_size = hidden;
    p.input_size = input;
    const int gates = gate_count(a);
    p.kernels.assign(gates, Matrix::Zero(hidden, hidden + input));
    p.biases.assign(gates, Vector::Zero(hidden));
    return p;
}

CellParameters init_cell(Architecture a, Eigen::Index hidden, Eigen::Index input, Rng& rng) {
    CellParameters p = zero_cell(a, hidden, input);
    const double limit = std::sqrt(6.0 / static_cast<double>((hidden + input) + hidden));
    for (auto& k : p.kernels)
        for (Eigen::Index i = 0; i < k.rows(); ++i)
            for (Eigen::Index j = 0; j < k.cols(); ++j) k(i, j) = rng.uniform(-limit, limit);
    // Gate-bias conventions, pinned in docs/cells.md.
    switch (a) {
        case Architecture::Gru:
            p.biases[0].setOnes();  // reset
            p.biases[1].setOnes();  // update
            break;
        case Architecture::Lstm:
            p.biases[1].setOnes();  // forget
            break;
        case Architecture::Ugrnn:
            p.biases[0].setOnes();  // gate
            break;
        default: break;
    }
    return p;
}

Vector cell_step(const CellParameters& p, const Vector& state, const Vector& x) {
    check_shapes(p, state, x, "cell_step");
    const Eigen::Index n = p.hidden_size;
    switch (p.architecture) {
        case Architecture::Vanilla:
            return gate_pre(p, 0, state, x).array().tanh().matrix();
        case Architecture::Linear:
            return gate_pre(p, 0, state, x);
        case Architecture::Gru: {
            const Vector r = sigmoid(gate_pre(p, 0, state, x));
            const Vector z = sigmoid(gate_pre(p, 1, state, x));
            const Vector rh = r.cwiseProduct(state);
            const Vector c = gate_pre(p, 2, rh, x).array().tanh().matrix();
            return z.cwiseProduct(state) + (Vector::Ones(n) - z).cwiseProduct(c);
        }
        case Architecture::Ugrnn: {
            const Vector g = sigmoid(gate_pre(p, 0, state, x));
            const Vector c = gate_pre(p, 1, state, x).array().tanh().matrix();
            return g.cwiseProduct(state) + (Vector::Ones(n) - g).cwiseProduct(c);
        }
        case Architecture::Lstm: {
            const Vector c = state.head(n), h = state.tail(n);
            const Vector i = sigmoid(gate_pre(p, 0, h, x));
            const Vector f = sigmoid(gate_pre(p, 1, h, x));
            const Vector g = gate_pre(p, 2, h, x).array().tanh().matrix();
            const Vector o = sigmoid(gate_pre(p, 3, h, x));
            Vector out(2 * n);
            out.head(n) = f.cwiseProduct(c) + i.cwiseProduct(g);
            out.tail(n) = o.cwiseProduct(out.head(n).array().tanh().matrix());
            return out;
        }
    }
    throw Error("cell_step: unreachable");
}

CellJacobians cell_jacobians(const CellParameters& p, const Vector& state, const Vector& x) {
    check_shapes(p, state, x, "cell_jacobians");
    const Eigen::Index n = p.hidden_size;
    CellJacobians jac;
    switch (p.architecture) {
        case Architecture::Linear: {
            jac.j_rec = p.kernels[0].leftCols(n);
            jac.j_inp = p.kernels[0].rightCols(p.input_size);
            return jac;
        }
        case Architecture::Vanilla: {
            const Vector f = gate_pre(p, 0, state, x).array().tanh().matrix();
            const Vector d = (1.0 - f.array().square()).matrix();
            jac.j_rec = d.asDiagonal() * p.kernels[0].leftCols(n);
            jac.j_inp = d.asDiagonal() * p.kernels[0].rightCols(p.input_size);
            return jac;
        }
        case Architecture::Gru: {
            const auto ar = p.kernels[0].leftCols(n), br = p.kernels[0].rightCols(p.input_size);
            const auto az = p.kernels[1].leftCols(n), bz = p.kernels[1].rightCols(p.input_size);
            const auto ac = p.kernels[2].leftCols(n), bc = p.kernels[2].rightCols(p.input_size);
            const Vector r = sigmoid(gate_pre(p, 0, state, x));
            const Vector z = sigmoid(gate_pre(p, 1, state, x));
            const Vector rh = r.cwiseProduct(state);
            const Vector c = gate_pre(p, 2, rh, x).array().tanh().matrix();
            const Vector dr = r.array() * (1.0 - r.array());
            const Vector dz = z.array() * (1.0 - z.array());
            const Vector dc = 1.0 - c.array().square();
            const Vector hmc = state - c;
            const Vector omz = (1.0 - z.array()).matrix();
            // d(r*h)/dh = diag(r) + diag(h) Dr Ar
            Matrix drh_dh = Matrix(r.asDiagonal());
            drh_dh.noalias() += state.asDiagonal() * (dr.asDiagonal() * ar);
            jac.j_rec = Matrix(z.asDiagonal());
            jac.j_rec.noalias() += hmc.asDiagonal() * (dz.asDiagonal() * az);
            jac.j_rec.noalias() += omz.asDiagonal() * (dc.asDiagonal() * (ac * drh_dh));
            Matrix dc_dx = bc + ac * (state.asDiagonal() * (dr.asDiagonal() * br));
            jac.j_inp = hmc.asDiagonal() * (dz.asDiagonal() * bz);
            jac.j_inp.noalias() += omz.asDiagonal() * (dc.asDiagonal() * dc_dx);
            return jac;
        }
        case Architecture::Ugrnn: {
            const auto ag = p.kernels[0].leftCols(n), bg = p.kernels[0].rightCols(p.input_size);
            const auto ac = p.kernels[1].leftCols(n), bc = p.kernels[1].rightCols(p.input_size);
            const Vector g = sigmoid(gate_pre(p, 0, state, x));
            const Vector c = gate_pre(p, 1, state, x).array().tanh().matrix();
            const Vector dg = g.array() * (1.0 - g.array());
            const Vector dc = 1.0 - c.array().square();
            const Vector hmc = state - c;
            const Vector omg = (1.0 - g.array()).matrix();
            jac.j_rec = Matrix(g.asDiagonal());
            jac.j_rec.noalias() += hmc.asDiagonal() * (dg.asDiagonal() * ag);
            jac.j_rec.noalias() += omg.asDiagonal() * (dc.asDiagonal() * ac);
            jac.j_inp = hmc.asDiagonal() * (dg.asDiagonal() * bg);
            jac.j_inp.noalias() += omg.asDiagonal() * (dc.asDiagonal() * bc);
            return jac;
        }
        case Architecture::Lstm: {
            const Vector c = state.head(n), h = state.tail(n);
            const auto ai = p.kernels[0].leftCols(n), bi = p.kernels[0].rightCols(p.input_size);
            const auto af = p.kernels[1].leftCols(n), bf = p.kernels[1].rightCols(p.input_size);
            const auto ag = p.kernels[2].leftCols(n), bg = p.kernels[2].rightCols(p.input_size);
            const auto ao = p.kernels[3].leftCols(n), bo = p.kernels[3].rightCols(p.input_size);
            const Vector i = sigmoid(gate_pre(p, 0, h, x));
            const Vector f = sigmoid(gate_pre(p, 1, h, x));
            const Vector g = gate_pre(p, 2, h, x).array().tanh().matrix();
            const Vector o = sigmoid(gate_pre(p, 3, h, x));
            const Vector cn = f.cwiseProduct(c) + i.cwiseProduct(g);
            const Vector tc = cn.array().tanh().matrix();
            const Vector di = i.array() * (1.0 - i.array());
            const Vector df = f.array() * (1.0 - f.array());
            const Vector dg = 1.0 - g.array().square();
            const Vector dof = o.array() * (1.0 - o.array());
            const Vector dtc = 1.0 - tc.array().square();

            Matrix dcn_dh = c.asDiagonal() * (df.asDiagonal() * af);
            dcn_dh.noalias() += g.asDiagonal() * (di.asDiagonal() * ai);
            dcn_dh.noalias() += i.asDiagonal() * (dg.asDiagonal() * ag);
            Matrix dcn_dx = c.asDiagonal() * (df.asDiagonal() * bf);
            dcn_dx.noalias() += g.asDiagonal() * (di.asDiagonal() * bi);
            dcn_dx.noalias() += i.asDiagonal() * (dg.asDiagonal() * bg);

            jac.j_rec = Matrix::Zero(2 * n, 2 * n);
            jac.j_rec.topLeftCorner(n, n) = Matrix(f.asDiagonal());
            jac.j_rec.topRightCorner(n, n) = dcn_dh;
            jac.j_rec.bottomLeftCorner(n, n) =
                Matrix((o.array() * dtc.array() * f.array()).matrix().asDiagonal());
            jac.j_rec.bottomRightCorner(n, n) = tc.asDiagonal() * (dof.asDiagonal() * ao);
            jac.j_rec.bottomRightCorner(n, n).noalias() +=
                (o.array() * dtc.array()).matrix().asDiagonal() * dcn_dh;

            jac.j_inp = Matrix::Zero(2 * n, p.input_size);
            jac.j_inp.topRows(n) = dcn_dx;
            jac.j_inp.bottomRows(n) = tc.asDiagonal() * (dof.asDiagonal() * bo);
            jac.j_inp.bottomRows(n).noalias() +=
                (o.array() * dtc.array()).matrix().asDiagonal() * dcn_dx;
            return jac;
        }
    }
    throw Error("cell_jacobians: unreachable");
}

CellJacobians fd_jacobian(const CellParameters& p, const Vector& state, const Vector& x,
                          double step) {
    check_shapes(p, state, x, "fd_jacobian");
    if (!(step > 0.0)) throw ShapeError("fd_jacobian: step must be > 0");
    const Eigen::Index s = p.state_size(), in = p.input_size;
    CellJacobians jac;
    jac.j_rec.resize(s, s);
    jac.j_inp.resize(s, in);
    Vector hp = state, hm = state;
    for (Eigen::Index j = 0; j < s; ++j) {
        hp[j] += step;
        hm[j] -= step;
        jac.j_rec.col(j) = (cell_step(p, hp, x) - cell_step(p, hm, x)) / (2.0 * step);
        hp[j] = state[j];
        hm[j] = state[j];
    }
    Vector xp = x, xm = x;
    for (Eigen::Index j = 0; j < in; ++j) {
        xp[j] += step;
        xm[j] -= step;
        jac.j_inp.col(j) = (cell_step(p, state, xp) - cell_step(p, state, xm)) / (2.0 * step);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return jac;
}

namespace {

// Shared backward. `grads` may be null when only state/input gradients are
// wanted (fixed-point inner loop).
void backward_impl(const CellParameters& p, const Vector& state, const Vector& x,
                   const Vector& upstream, CellGradients* grads, Vector& d_state,
                   Vector& d_input) {
    const Eigen::Index n = p.hidden_size;
    const auto accumulate = [&](int gate, const Vector& da, const Vector& gate_h) {
        if (grads) {
            grads->d_kernels[gate].leftCols(n).noalias() += da * gate_h.transpose();
            grads->d_kernels[gate].rightCols(p.input_size).noalias() += da * x.transpose();
            grads->d_biases[gate] += da;
        }
        d_input.noalias() += p.kernels[gate].rightCols(p.input_size).transpose() * da;
    };

    switch (p.architecture) {
        case Architecture::Linear: {
            accumulate(0, upstream, state);
            d_state.noalias() += p.kernels[0].leftCols(n).transpose() * upstream;
            return;
        }
        case Architecture::Vanilla: {
            const Vector f = gate_pre(p, 0, state, x).array().tanh().matrix();
            const Vector da = (upstream.array() * (1.0 - f.array().square())).matrix();
            accumulate(0, da, state);
            d_state.noalias() += p.kernels[0].leftCols(n).transpose() * da;
            return;
        }
        case Architecture::Gru: {
            const Vector r = sigmoid(gate_pre(p, 0, state, x));
            const Vector z = sigmoid(gate_pre(p, 1, state, x));
            const Vector rh = r.cwiseProduct(state);
            const Vector c = gate_pre(p, 2, rh, x).array().tanh().matrix();

            const Vector dz = upstream.cwiseProduct(state - c);
            const Vector dc = (upstream.array() * (1.0 - z.array())).matrix();
            d_state += upstream.cwiseProduct(z);

            const Vector da_c = (dc.array() * (1.0 - c.array().square())).matrix();
            accumulate(2, da_c, rh);
            const Vector v = p.kernels[2].leftCols(n).transpose() * da_c;
            d_state += r.cwiseProduct(v);
            const Vector der = state.cwiseProduct(v);  // d wrt reset gate output

            const Vector da_z = (dz.array() * z.array() * (1.0 - z.array())).matrix();
            accumulate(1, da_z, state);
            d_state.noalias() += p.kernels[1].leftCols(n).transpose() * da_z;

            const Vector da_r = (der.array() * r.array() * (1.0 - r.array())).matrix();
            accumulate(0, da_r, state);
            d_state.noalias() += p.kernels[0].leftCols(n).transpose() * da_r;
            return;
        }
        case Architecture::Ugrnn: {
            const Vector g = sigmoid(gate_pre(p, 0, state, x));
            const Vector c = gate_pre(p, 1, state, x).array().tanh().matrix();
            const Vector dg = upstream.cwiseProduct(state - c);
            const Vector dc = (upstream.array() * (1.0 - g.array())).matrix();
            d_state += upstream.cwiseProduct(g);

            const Vector da_c = (dc.array() * (1.0 - c.array().square())).matrix();
            accumulate(1, da_c, state);
            d_state.noalias() += p.kernels[1].leftCols(n).transpose() * da_c;

            const Vector da_g = (dg.array() * g.array() * (1.0 - g.array())).matrix();
            accumulate(0, da_g, state);
            d_state.noalias() += p.kernels[0].leftCols(n).transpose() * da_g;
            return;
        }
        case Architecture::Lstm: {
            const Vector c = state.head(n), h = state.tail(n);
            const Vector i = sigmoid(gate_pre(p, 0, h, x));
            const Vector f = sigmoid(gate_pre(p, 1, h, x));
            const Vector g = gate_pre(p, 2, h, x).array().tanh().matrix();
            const Vector o = sigmoid(gate_pre(p, 3, h, x));
            const Vector cn = f.cwiseProduct(c) + i.cwiseProduct(g);
            const Vector tc = cn.array().tanh().matrix();

            const Vector uc = upstream.head(n), uh = upstream.tail(n);
            const Vector dout = uh.cwiseProduct(tc);
            const Vector dcn = uc + (uh.array() * o.array() * (1.0 - tc.array().square())).matrix();

            const Vector da_i = (dcn.cwiseProduct(g).array() * i.array() * (1.0 - i.array())).matrix();
            const Vector da_f = (dcn.cwiseProduct(c).array() * f.array() * (1.0 - f.array())).matrix();
            const Vector da_g = (dcn.cwiseProduct(i).array() * (1.0 - g.array().square())).matrix();
            const Vector da_o = (dout.array() * o.array() * (1.0 - o.array())).matrix();

            accumulate(0, da_i, h);
            accumulate(1, da_f, h);
            accumulate(2, da_g, h);
            accumulate(3, da_o, h);

            Vector dh = p.kernels[0].leftCols(n).transpose() * da_i;
            dh.noalias() += p.kernels[1].leftCols(n).transpose() * da_f;
            dh.noalias() += p.kernels[2].leftCols(n).transpose() * da_g;
            dh.noalias() += p.kernels[3].leftCols(n).transpose() * da_o;

            d_state.head(n) += dcn.cwiseProduct(f);
            d_state.tail(n) += dh;
            return;
        }
    }
    throw Error("cell_backward: unreachable");
}

}  // namespace

CellGradients cell_backward(const CellParameters& p, const Vector& state, const Vector& x,
                            const Vector& upstream) {
    check_shapes(p, state, x, "cell_backward");
    if (upstream.size() != p.state_size())
        throw ShapeError("cell_backward: upstream must have state dimension");
    CellGradients g;
    g.d_kernels.assign(p.kernels.size(), Matrix::Zero(p.hidden_size, p.hidden_size + p.input_size));
    g.d_biases.assign(p.biases.size(), Vector::Zero(p.hidden_size));
    g.d_state = Vector::Zero(p.state_size());
    g.d_input = Vector::Zero(p.input_size);
    backward_impl(p, state, x, upstream, &g, g.d_state, g.d_input);
    return g;
}

Vector cell_backward_state(const CellParameters& p, const Vector& state, const Vector& x,
                           const Vector& upstream) {
    check_shapes(p, state, x, "cell_backward_state");
    if (upstream.size() != p.state_size())
        throw ShapeError("cell_backward_state: upstream must have state dimension");
    Vector d_state = Vector::Zero(p.state_size());
    Vector d_input = Vector::Zero(p.input_size);
    backward_impl(p, state, x, upstream, nullptr, d_state, d_input);
    return d_state;
}

}  // namespace rnnscope
