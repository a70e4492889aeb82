#include "rnnscope/fixed_points.hpp"
#include "rnnscope/linearize.hpp"
#include "rnnscope/manifold.hpp"
#include "rnnscope/numerics.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace rnnscope;

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    return m;
}

CellParameters random_cell(Architecture arch, Eigen::Index n, Eigen::Index e, Rng& rng) {
    CellParameters p = zero_cell(arch, n, e);
    for (auto& k : p.kernels) k = random_matrix(n, n + e, rng);
    return p;
}

void BM_EigGeneral(benchmark::State& state) {
    Rng rng(1);
    const Matrix j = random_matrix(state.range(0), state.range(0), rng);
    for (auto _ : state) benchmark::DoNotOptimize(eig_general(j));
}
BENCHMARK(BM_EigGeneral)->Arg(16)->Arg(64)->Arg(128);

void BM_CellStep(benchmark::State& state) {
    Rng rng(2);
    const auto arch = static_cast<Architecture>(state.range(0));
    const auto p = random_cell(arch, 64, 32, rng);
    Vector h = Vector::Zero(p.state_size());
    const Vector x = random_matrix(32, 1, rng).col(0);
    for (auto _ : state) {
        h = cell_step(p, h, x);
        benchmark::DoNotOptimize(h.data());
    }
}
BENCHMARK(BM_CellStep)->Arg(0)->Arg(1)->Arg(2)->Arg(3)->Arg(4);

void BM_CellJacobians(benchmark::State& state) {
    Rng rng(3);
    const auto p = random_cell(Architecture::Gru, 64, 32, rng);
    const Vector h = random_matrix(64, 1, rng).col(0);
    const Vector x = Vector::Zero(32);
    for (auto _ : state) benchmark::DoNotOptimize(cell_jacobians(p, h, x));
}
BENCHMARK(BM_CellJacobians);

void BM_CellBackward(benchmark::State& state) {
    Rng rng(4);
    const auto p = random_cell(Architecture::Gru, 64, 32, rng);
    const Vector h = random_matrix(64, 1, rng).col(0);
    const Vector x = random_matrix(32, 1, rng).col(0);
    const Vector u = random_matrix(64, 1, rng).col(0);
    for (auto _ : state) benchmark::DoNotOptimize(cell_backward(p, h, x, u));
}
BENCHMARK(BM_CellBackward);

void BM_QGradient(benchmark::State& state) {
    Rng rng(5);
    ClassifierModel m;
    m.cell = random_cell(Architecture::Gru, 64, 32, rng);
    for (auto& k : m.cell.kernels) k *= 0.2;
    m.embedding = Matrix::Zero(4, 32);
    m.readout_weights = Vector::Ones(64);
    const Vector h = random_matrix(64, 1, rng).col(0);
    for (auto _ : state) benchmark::DoNotOptimize(q_gradient(m, h));
}
BENCHMARK(BM_QGradient);

void BM_PcaFit(benchmark::State& state) {
    Rng rng(6);
    const Matrix data = random_matrix(state.range(0), 64, rng);
    for (auto _ : state) benchmark::DoNotOptimize(pca_fit(data, 16));
}
BENCHMARK(BM_PcaFit)->Arg(1000)->Arg(10000);

void BM_FitManifold(benchmark::State& state) {
    Rng rng(7);
    std::vector<FixedPoint> fps(state.range(0));
    for (auto& fp : fps) {
        fp.h_star = random_matrix(64, 1, rng).col(0) * 0.01;
        fp.h_star[0] = rng.uniform(-3.0, 3.0);
    }
    const Vector readout = Vector::Unit(64, 0);
    for (auto _ : state) benchmark::DoNotOptimize(fit_manifold(fps, 10, 1e-3, readout));
}
BENCHMARK(BM_FitManifold)->Arg(128)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
