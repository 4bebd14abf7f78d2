#include <benchmark/benchmark.h>

#include <random>

#include "folp/experiment.hpp"

using namespace folp;

namespace {

Dataset random_dataset(const GridPtr& grid, Index t, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const dgp::NoiseSampler noise(dgp::NoiseCase::BB, grid);
    Dataset d;
    d.grid = grid;
    d.coords.resize(grid->size(), t);
    for (Index i = 0; i < t; ++i)
        d.coords.col(i) = noise.draw_coords(rng);
    return d;
}

void bm_sym_eig(benchmark::State& state)
{
    const auto grid = make_grid(state.range(0));
    const auto cov = sample_cov(random_dataset(grid, 400, 11));
    for (auto _ : state)
        benchmark::DoNotOptimize(sym_eig(cov));
}
BENCHMARK(bm_sym_eig)->Arg(100)->Arg(200);

void bm_sample_cov(benchmark::State& state)
{
    const auto grid = make_grid(200);
    const auto x = random_dataset(grid, state.range(0), 13);
    for (auto _ : state)
        benchmark::DoNotOptimize(sample_cov(x));
}
BENCHMARK(bm_sample_cov)->Arg(100)->Arg(800);

void bm_noise_draw(benchmark::State& state)
{
    const auto grid = make_grid(200);
    const dgp::NoiseSampler noise(dgp::NoiseCase::CBM, grid);
    std::mt19937_64 rng(17);
    for (auto _ : state)
        benchmark::DoNotOptimize(noise.draw_coords(rng));
}
BENCHMARK(bm_noise_draw);

void bm_fit_fpca_ls(benchmark::State& state)
{
    const auto grid = make_grid(200);
    const Index t = state.range(0);
    const auto x = random_dataset(grid, t, 19);
    const auto y = random_dataset(grid, t, 23);
    const ElbowParams params{0.01, 0.5, 0.475};
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_fpca_ls(x, y, params));
}
BENCHMARK(bm_fit_fpca_ls)->Arg(100)->Arg(800);

void bm_simulate_far1(benchmark::State& state)
{
    dgp::ModelSpec spec;
    spec.model_id = 1;
    spec.noise_case = dgp::NoiseCase::BB;
    spec.t_samples = state.range(0);
    spec.grid = make_grid(200);
    std::mt19937_64 rng(29);
    const auto params = dgp::draw_model_params(1, rng);
    for (auto _ : state) {
        std::mt19937_64 sim_rng(31);
        benchmark::DoNotOptimize(dgp::simulate_far1(params, spec, sim_rng));
    }
}
BENCHMARK(bm_simulate_far1)->Arg(100)->Arg(800);

void bm_replication(benchmark::State& state)
{
    mc::ExperimentConfig cfg;
    cfg.sample_sizes = {state.range(0)};
    const mc::Cell cell{1, dgp::NoiseCase::BB, state.range(0), 0.475,
                        mc::Estimator::FpcaLs};
    int rep = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(mc::run_replication(cfg, cell, rep++));
}
BENCHMARK(bm_replication)->Arg(100)->Arg(800)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
