#include "stm/green.hpp"
#include "stm/kernel.hpp"
#include "stm/maximize.hpp"
#include "stm/radial.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

using namespace stm;

namespace {

RadialFunction rough_profile(std::shared_ptr<const RadialGrid> grid)
{
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    RadialFunction u = sample(grid, [&](double r) {
        return (1.0 + 0.3 * unif(gen)) * std::exp(-0.7 * r);
    });
    u.values.back() = 0.0;
    return u;
}

void BM_zeta(benchmark::State& state)
{
    const int n = int(state.range(0));
    double t = 0.0;
    for (auto _ : state) {
        t += 1e-6;
        benchmark::DoNotOptimize(zeta(n, 1.0 + std::fmod(t, 20.0)));
    }
}
BENCHMARK(BM_zeta)->Arg(2)->Arg(6);

void BM_weighted_integral(benchmark::State& state)
{
    auto grid = make_grid(12.0, state.range(0), 0.5);
    RadialFunction u = rough_profile(grid);
    auto f = [](double, double v) { return zeta(2, 4.0 * v * v); };
    for (auto _ : state)
        benchmark::DoNotOptimize(weighted_integral(u, 0.0, 2, f));
}
BENCHMARK(BM_weighted_integral)->Arg(512)->Arg(4096);

void BM_functional(benchmark::State& state)
{
    const ModelParams params(2, 0.5, 1.0, 0.1);
    auto grid = make_grid(12.0, state.range(0), 0.5);
    RadialFunction u = rough_profile(grid);
    const double s = sobolev_norm(u, params);
    for (double& v : u.values)
        v /= s;
    for (auto _ : state)
        benchmark::DoNotOptimize(functional(u, params));
}
BENCHMARK(BM_functional)->Arg(512)->Arg(4096);

// Few monotone runs: the shape the solver pipeline actually produces.
void BM_rearrange_smooth(benchmark::State& state)
{
    auto grid = make_grid(6.0, state.range(0), 0.0);
    RadialFunction u = sample(grid, [](double r) {
        return std::exp(-r) * (1.0 + 0.5 * std::sin(5 * r));
    });
    u.values.back() = 0.0;
    for (auto _ : state)
        benchmark::DoNotOptimize(rearrange_decreasing(u, 2));
}
BENCHMARK(BM_rearrange_smooth)->Arg(256)->Arg(2048);

// Adversarial worst case: oscillation in every cell makes every cell its
// own monotone run, exposing the quadratic cost bound.
void BM_rearrange_noisy(benchmark::State& state)
{
    auto grid = make_grid(6.0, state.range(0), 0.0);
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    RadialFunction u = sample(grid, [&](double r) {
        return std::exp(-r) * (1.0 + 0.5 * std::sin(5 * r))
             + 0.2 * unif(gen);
    });
    u.values.back() = 0.0;
    for (auto _ : state)
        benchmark::DoNotOptimize(rearrange_decreasing(u, 2));
}
BENCHMARK(BM_rearrange_noisy)->Arg(256)->Arg(1024);

void BM_maximize_subcritical(benchmark::State& state)
{
    const ModelParams params(2, 0.5, 1.0, 0.3);
    auto grid = make_grid(12.0, state.range(0), 0.5);
    for (auto _ : state)
        benchmark::DoNotOptimize(maximize_subcritical(params, grid));
}
BENCHMARK(BM_maximize_subcritical)
    ->Arg(256)
    ->Arg(1024)
    ->Unit(benchmark::kMillisecond);

void BM_green_solve(benchmark::State& state)
{
    const ModelParams params(int(state.range(0)), 0.5, 1.0, 0.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_green(params));
}
BENCHMARK(BM_green_solve)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
