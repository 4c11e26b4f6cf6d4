#include "hedgehog/experiments.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace hedgehog;

namespace {

PatchSet sphere_patches(int quadrisections) {
    PatchSet set = refine_for_geometry(make_sphere(), 8, 1e-4).patches;
    for (int k = 0; k < quadrisections; ++k) set = quadrisect_all(set);
    return set;
}

PointCloud random_points(std::size_t n, double radius, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    PointCloud pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 d = Vec3(g(rng), g(rng), g(rng)).normalized();
        pts.push_back(radius * d, d);
    }
    return pts;
}

void direct_summation(benchmark::State& state, KernelFamily kernel) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const PointCloud sources = random_points(n, 1.0, 1);
    const PointCloud targets = random_points(n, 0.5, 2);
    const int d = kernel.dim();
    std::vector<double> strengths(n * d, 1.0), out(n * d);
    for (auto _ : state) {
        default_backend().evaluate(kernel, Layer::Double, sources, strengths, targets, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n));
}

void BM_SummationLaplace(benchmark::State& state) { direct_summation(state, KernelFamily::laplace()); }
void BM_SummationStokes(benchmark::State& state) { direct_summation(state, KernelFamily::stokes()); }

void BM_ClosestPoint(benchmark::State& state) {
    const PatchSet set = sphere_patches(static_cast<int>(state.range(0)));
    const SurfaceIndex index(set);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    std::vector<Vec3> queries;
    for (int i = 0; i < 256; ++i) queries.emplace_back(u(rng), u(rng), u(rng));
    std::size_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(index.closest_point(queries[k++ % queries.size()]));
    }
    state.counters["patches"] = static_cast<double>(set.size());
}

void BM_Upsample(benchmark::State& state) {
    const int q = static_cast<int>(state.range(0));
    const PatchSet coarse = sphere_patches(1);
    const PatchSet fine = uniform_upsample(coarse, 2);
    const Upsampler up(coarse, fine, q);
    const QuadratureNodeSet nodes = discretize(coarse, q);
    DensityField phi(1, nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) phi.values[i] = nodes.points.x[i];
    for (auto _ : state) benchmark::DoNotOptimize(upsample_density(up, phi).values.data());
    state.counters["fine_nodes"] = static_cast<double>(fine.size() * q * q);
}

void BM_Matvec(benchmark::State& state) {
    EvalOptions o;
    o.q = static_cast<int>(state.range(0));
    o.b = 0.15;
    o.a = 0.025;
    PatchSet coarse = refine_for_geometry(make_torus(0.5, 0.2, 4, 3), 5, 1e-1).patches;
    PatchSet fine = uniform_upsample(coarse, 1);
    const Discretization disc(std::move(coarse), std::move(fine), o);
    const BoundaryOperator op(KernelFamily::laplace(), disc);
    std::vector<double> x(op.size(), 1.0), y(op.size());
    for (auto _ : state) {
        op.apply(x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.counters["unknowns"] = static_cast<double>(op.size());
}

}  // namespace

BENCHMARK(BM_SummationLaplace)->RangeMultiplier(4)->Range(256, 4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SummationStokes)->RangeMultiplier(4)->Range(256, 4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClosestPoint)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Upsample)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Matvec)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
