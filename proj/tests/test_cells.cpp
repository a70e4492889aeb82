#include "rnnscope/cells.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cstring>

using namespace rnnscope;

namespace {

const Architecture kAll[] = {Architecture::Vanilla, Architecture::Gru, Architecture::Lstm,
                             Architecture::Ugrnn, Architecture::Linear};

CellParameters random_cell(Architecture a, Eigen::Index n, Eigen::Index in, Rng& rng) {
    CellParameters p = zero_cell(a, n, in);
    for (auto& k : p.kernels) k = oracles::random_matrix(n, n + in, rng);
    for (auto& b : p.biases) b = oracles::random_vector(n, rng);
    return p;
}

double rel_maxabs(const Matrix& a, const Matrix& b) {
    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-8);
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_CASE("cell_step: vanilla with zero parameters maps everything to zero") {
    const auto p = zero_cell(Architecture::Vanilla, 4, 3);
    Rng rng(1);
    const Vector h = oracles::random_vector(4, rng);
    const Vector x = oracles::random_vector(3, rng);
    CHECK(cell_step(p, h, x).norm() == 0.0);
}

TEST_CASE("cell_step: scalar GRU matches a by-hand evaluation") {
    CellParameters p = zero_cell(Architecture::Gru, 1, 1);
    p.kernels[0] << 0.5, -0.3;  // reset: [recurrent, input]
    p.biases[0] << 0.1;
    p.kernels[1] << -0.2, 0.4;  // update
    p.biases[1] << -0.1;
    p.kernels[2] << 0.7, 0.2;  // candidate
    p.biases[2] << 0.05;
    Vector h(1), x(1);
    h << 0.3;
    x << -0.6;

    // literal gate equations
    const double a_r = 0.5 * 0.3 + (-0.3) * (-0.6) + 0.1;
    const double r = 1.0 / (1.0 + std::exp(-a_r));
    const double a_z = -0.2 * 0.3 + 0.4 * (-0.6) + (-0.1);
    const double z = 1.0 / (1.0 + std::exp(-a_z));
    const double a_c = 0.7 * (r * 0.3) + 0.2 * (-0.6) + 0.05;
    const double c = std::tanh(a_c);
    const double expected = z * 0.3 + (1.0 - z) * c;

    CHECK(cell_step(p, h, x)[0] == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("cell_step: linear identity integrator accumulates its input") {
    CellParameters p = zero_cell(Architecture::Linear, 3, 3);
    p.kernels[0].leftCols(3) = Matrix::Identity(3, 3);
    p.kernels[0].rightCols(3) = Matrix::Identity(3, 3);
    Rng rng(2);
    const Vector h = oracles::random_vector(3, rng);
    const Vector x = oracles::random_vector(3, rng);
    CHECK((cell_step(p, h, x) - (h + x)).norm() <= 1e-15);
}

TEST_CASE("cell_step: dimension mismatch raises") {
    const auto p = zero_cell(Architecture::Gru, 4, 3);
    CHECK_THROWS_AS(cell_step(p, Vector::Zero(5), Vector::Zero(3)), ShapeError);
    CHECK_THROWS_AS(cell_step(p, Vector::Zero(4), Vector::Zero(2)), ShapeError);
}

TEST_CASE("cell_jacobians: linear cell returns its kernel blocks exactly") {
    Rng rng(3);
    const auto p = random_cell(Architecture::Linear, 5, 3, rng);
    const auto jac = cell_jacobians(p, oracles::random_vector(5, rng), oracles::random_vector(3, rng));
    CHECK((jac.j_rec - p.kernels[0].leftCols(5)).norm() == 0.0);
    CHECK((jac.j_inp - p.kernels[0].rightCols(3)).norm() == 0.0);
}

TEST_CASE("cell_jacobians: vanilla matches the chain-rule closed form") {
    Rng rng(4);
    const auto p = random_cell(Architecture::Vanilla, 4, 2, rng);
    const Vector h = oracles::random_vector(4, rng);
    const Vector x = oracles::random_vector(2, rng);
    const Vector f = cell_step(p, h, x);
    const Matrix d = (1.0 - f.array().square()).matrix().asDiagonal();
    const auto jac = cell_jacobians(p, h, x);
    CHECK((jac.j_rec - d * p.kernels[0].leftCols(4)).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((jac.j_inp - d * p.kernels[0].rightCols(2)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("cell_jacobians: finite-difference oracle across architectures") {
    Rng rng(5);
    for (auto arch : kAll) {
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform_int(6));
            const Eigen::Index in = 1 + static_cast<Eigen::Index>(rng.uniform_int(4));
            const auto p = random_cell(arch, n, in, rng);
            const Vector h = oracles::random_vector(p.state_size(), rng);
            const Vector x = oracles::random_vector(in, rng);
            const auto analytic = cell_jacobians(p, h, x);
            const auto fd = fd_jacobian(p, h, x, 1e-5);
            CHECK(rel_maxabs(analytic.j_rec, fd.j_rec) <= 1e-4);
            CHECK(rel_maxabs(analytic.j_inp, fd.j_inp) <= 1e-4);
        }
    }
}

TEST_CASE("fd_jacobian: recovers the exact kernels of a linear cell") {
    Rng rng(6);
    const auto p = random_cell(Architecture::Linear, 4, 3, rng);
    const auto fd = fd_jacobian(p, oracles::random_vector(4, rng), oracles::random_vector(3, rng), 1e-5);
    CHECK((fd.j_rec - p.kernels[0].leftCols(4)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((fd.j_inp - p.kernels[0].rightCols(3)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("fd_jacobian: step-size consistency") {
    Rng rng(7);
    const auto p = random_cell(Architecture::Gru, 5, 3, rng);
    const Vector h = oracles::random_vector(5, rng);
    const Vector x = oracles::random_vector(3, rng);
    const auto coarse = fd_jacobian(p, h, x, 1e-5);
    const auto fine = fd_jacobian(p, h, x, 1e-6);
    CHECK(rel_maxabs(coarse.j_rec, fine.j_rec) <= 1e-3);
    CHECK(rel_maxabs(coarse.j_inp, fine.j_inp) <= 1e-3);
    CHECK_THROWS_AS(fd_jacobian(p, h, x, 0.0), ShapeError);
}

TEST_CASE("cell_backward: zero upstream yields zero gradients") {
    Rng rng(8);
    const auto p = random_cell(Architecture::Lstm, 3, 2, rng);
    const auto g = cell_backward(p, oracles::random_vector(6, rng), oracles::random_vector(2, rng),
                                 Vector::Zero(6));
    for (const auto& k : g.d_kernels) CHECK(k.norm() == 0.0);
    for (const auto& b : g.d_biases) CHECK(b.norm() == 0.0);
    CHECK(g.d_state.norm() == 0.0);
    CHECK(g.d_input.norm() == 0.0);
}

TEST_CASE("cell_backward: linear input-kernel gradient is the outer product") {
    Rng rng(9);
    const auto p = random_cell(Architecture::Linear, 4, 3, rng);
    const Vector h = oracles::random_vector(4, rng);
    const Vector x = oracles::random_vector(3, rng);
    const Vector u = oracles::random_vector(4, rng);
    const auto g = cell_backward(p, h, x, u);
    CHECK((g.d_kernels[0].rightCols(3) - u * x.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((g.d_kernels[0].leftCols(4) - u * h.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((g.d_biases[0] - u).norm() <= 1e-14);
}

TEST_CASE("cell_backward: finite-difference oracle on u^T F across architectures") {
    Rng rng(10);
    const double eps = 1e-5;
    for (auto arch : kAll) {
        for (int trial = 0; trial < 8; ++trial) {
            const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform_int(3));
            const Eigen::Index in = 1 + static_cast<Eigen::Index>(rng.uniform_int(3));
            auto p = random_cell(arch, n, in, rng);
            const Vector h = oracles::random_vector(p.state_size(), rng);
            const Vector x = oracles::random_vector(in, rng);
            const Vector u = oracles::random_vector(p.state_size(), rng);
            const auto g = cell_backward(p, h, x, u);

            auto scalar = [&](const CellParameters& q, const Vector& hh, const Vector& xx) {
                return u.dot(cell_step(q, hh, xx));
            };
            for (std::size_t gate = 0; gate < p.kernels.size(); ++gate) {
                Matrix fd(p.kernels[gate].rows(), p.kernels[gate].cols());
                for (Eigen::Index i = 0; i < fd.rows(); ++i)
                    for (Eigen::Index j = 0; j < fd.cols(); ++j) {
                        CellParameters plus = p, minus = p;
                        plus.kernels[gate](i, j) += eps;
                        minus.kernels[gate](i, j) -= eps;
                        fd(i, j) = (scalar(plus, h, x) - scalar(minus, h, x)) / (2 * eps);
                    }
                CHECK(rel_maxabs(g.d_kernels[gate], fd) <= 1e-4);

                Vector fdb(p.biases[gate].size());
                for (Eigen::Index i = 0; i < fdb.size(); ++i) {
                    CellParameters plus = p, minus = p;
                    plus.biases[gate][i] += eps;
                    minus.biases[gate][i] -= eps;
                    fdb[i] = (scalar(plus, h, x) - scalar(minus, h, x)) / (2 * eps);
                }
                CHECK(rel_maxabs(Matrix(g.d_biases[gate]), Matrix(fdb)) <= 1e-4);
            }
            Vector fdh(p.state_size());
            for (Eigen::Index i = 0; i < fdh.size(); ++i) {
                Vector hp = h, hm = h;
                hp[i] += eps;
                hm[i] -= eps;
                fdh[i] = (scalar(p, hp, x) - scalar(p, hm, x)) / (2 * eps);
            }
            CHECK(rel_maxabs(Matrix(g.d_state), Matrix(fdh)) <= 1e-4);
            Vector fdx(in);
            for (Eigen::Index i = 0; i < in; ++i) {
                Vector xp = x, xm = x;
                xp[i] += eps;
                xm[i] -= eps;
                fdx[i] = (scalar(p, h, xp) - scalar(p, h, xm)) / (2 * eps);
            }
            CHECK(rel_maxabs(Matrix(g.d_input), Matrix(fdx)) <= 1e-4);

            // the cheap path agrees with the full backward
            CHECK((cell_backward_state(p, h, x, u) - g.d_state).cwiseAbs().maxCoeff() <= 1e-14);
        }
    }
}

TEST_CASE("linearization consistency: residual shrinks superlinearly") {
    Rng rng(15);
    for (auto arch : kAll) {
        if (arch == Architecture::Linear) continue;  // residual is exactly zero
        const auto p = random_cell(arch, 5, 3, rng);
        const Vector h = oracles::random_vector(p.state_size(), rng);
        const Vector x = oracles::random_vector(3, rng);
        const auto jac = cell_jacobians(p, h, x);
        Vector direction = oracles::random_vector(p.state_size(), rng);
        direction.normalize();
        const Vector base = cell_step(p, h, x);
        auto residual = [&](double scale) {
            const Vector delta = scale * direction;
            return (cell_step(p, h + delta, x) - base - jac.j_rec * delta).norm();
        };
        const double r1 = residual(1e-3);
        const double r2 = residual(5e-4);
        CHECK(r1 / std::max(r2, 1e-300) >= 3.5);
    }
}

TEST_CASE("cell_step is pure and deterministic") {
    Rng rng(16);
    const auto p = random_cell(Architecture::Ugrnn, 6, 4, rng);
    const Vector h = oracles::random_vector(6, rng);
    const Vector x = oracles::random_vector(4, rng);
    const Vector a = cell_step(p, h, x);
    const Vector b = cell_step(p, h, x);
    CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);
}

TEST_CASE("LSTM state is the concatenated (c, h) pair") {
    const auto p = zero_cell(Architecture::Lstm, 5, 2);
    CHECK(p.state_size() == 10);
    Rng rng(17);
    const auto q = random_cell(Architecture::Lstm, 5, 2, rng);
    CHECK(cell_step(q, Vector::Zero(10), Vector::Zero(2)).size() == 10);
}

TEST_CASE("init_cell: pinned gate-bias conventions") {
    Rng rng(18);
    const auto gru = init_cell(Architecture::Gru, 4, 3, rng);
    CHECK(gru.biases[0].isOnes());
    CHECK(gru.biases[1].isOnes());
    CHECK(gru.biases[2].isZero());
    const auto lstm = init_cell(Architecture::Lstm, 4, 3, rng);
    CHECK(lstm.biases[1].isOnes());  // forget gate
    CHECK(lstm.biases[0].isZero());
    const auto ugrnn = init_cell(Architecture::Ugrnn, 4, 3, rng);
    CHECK(ugrnn.biases[0].isOnes());
}
