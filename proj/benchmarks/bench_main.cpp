#include <benchmark/benchmark.h>

#include "pact/baselines.hpp"
#include "pact/forward.hpp"
#include "pact/inr.hpp"
#include "pact/phantom.hpp"
#include "pact/regularizers.hpp"
#include "pact/trainer.hpp"

namespace {

using namespace pact;

struct Problem {
  ImageGrid grid;
  ForwardOperator op;
  ImageSequence truth;
  Sinogram y;

  explicit Problem(std::size_t n, std::size_t sensors = 32)
      : grid(desk::grid(n)),
        op(build_forward_operator(grid, desk::ring(sensors, grid))),
        truth(render_phantom(phantoms::two_disc_moving(8), grid)),
        y(apply_forward(op, truth)) {}
};

void BM_Forward(benchmark::State& state) {
  Problem p(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(apply_forward(p.op, p.truth));
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Adjoint(benchmark::State& state) {
  Problem p(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(apply_adjoint(p.op, p.y));
}
BENCHMARK(BM_Adjoint)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BuildOperator(benchmark::State& state) {
  const auto grid = desk::grid(64);
  const auto geom = desk::ring(64, grid);
  for (auto _ : state) benchmark::DoNotOptimize(build_forward_operator(grid, geom));
}
BENCHMARK(BM_BuildOperator)->Unit(benchmark::kMillisecond);

void BM_Das(benchmark::State& state) {
  Problem p(64);
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct_das(p.y, p.grid));
}
BENCHMARK(BM_Das)->Unit(benchmark::kMillisecond);

void BM_Ubp(benchmark::State& state) {
  Problem p(64);
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct_ubp(p.y, p.grid));
}
BENCHMARK(BM_Ubp)->Unit(benchmark::kMillisecond);

void BM_TemporalTv(benchmark::State& state) {
  Problem p(64);
  for (auto _ : state) benchmark::DoNotOptimize(temporal_tv(p.truth));
}
BENCHMARK(BM_TemporalTv)->Unit(benchmark::kMicrosecond);

void BM_NuclearNorm(benchmark::State& state) {
  Problem p(64);
  for (auto _ : state) benchmark::DoNotOptimize(nuclear_norm(p.truth));
}
BENCHMARK(BM_NuclearNorm)->Unit(benchmark::kMillisecond);

// One full-batch forward and backward pass of the default network.
void BM_InrForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto precision = state.range(1) ? Precision::f64 : Precision::f32;
  const auto model = init_model(1);
  const std::vector<double> times = {0.0, 1.0 / 7, 2.0 / 7, 3.0 / 7, 4.0 / 7, 5.0 / 7, 6.0 / 7, 1.0};
  const auto batch = make_casorati_batch(n, times);
  InrEvaluator eval(model.encoder, batch, precision);
  std::vector<double> out(batch.size()), grad(model.params.size());
  const std::vector<double> g(batch.size(), 1e-3);
  for (auto _ : state) {
    eval.forward(model, out);
    eval.backward(model, g, grad);
    benchmark::DoNotOptimize(grad.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.size()));
}
BENCHMARK(BM_InrForwardBackward)
    ->Args({32, 0})
    ->Args({32, 1})
    ->Args({64, 0})
    ->Unit(benchmark::kMillisecond);

void BM_FitIteration(benchmark::State& state) {
  Problem p(32);
  TrainConfig cfg;
  cfg.iterations = 5;
  for (auto _ : state) benchmark::DoNotOptimize(fit(p.y, p.op, cfg));
  state.SetItemsProcessed(state.iterations() * 5);
}
BENCHMARK(BM_FitIteration)->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace
