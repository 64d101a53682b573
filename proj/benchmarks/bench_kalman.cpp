#include <benchmark/benchmark.h>

#include "rnf/kalman.hpp"

namespace {

using namespace rnf;

LgssmSpec bench_spec(std::size_t state_dim) {
  LgssmSpec spec;
  spec.state_dim = state_dim;
  spec.input_dim = 1;
  spec.obs_dim = 1;
  spec.A = Mat(state_dim, state_dim);
  for (std::size_t j = 0; j < state_dim; ++j) spec.A.at(j, j) = 0.9;
  spec.B = Mat(state_dim, 1);
  spec.B.at(0, 0) = 0.5;
  spec.H = Mat(1, state_dim);
  spec.H.at(0, 0) = 1.0;
  spec.Q = Mat(state_dim, state_dim);
  for (std::size_t j = 0; j < state_dim; ++j) spec.Q.at(j, j) = 0.1;
  spec.R = Mat(1, 1, {0.1});
  spec.c = {0.0};
  spec.D = Mat(1, 1, {1.0});
  return spec;
}

void BM_KalmanFilter(benchmark::State& state) {
  const auto J = static_cast<std::size_t>(state.range(0));
  const LgssmSpec spec = bench_spec(J);
  Rng rng(5);
  const LgssmSample sample = simulate_lgssm(spec, 1000, rng);

  for (auto _ : state) {
    const KalmanResult res = kalman_oracle(spec, sample.trajectory, InputMode::Known);
    benchmark::DoNotOptimize(res.filt_mean.data());
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_KalmanFilter)->Arg(1)->Arg(4)->Arg(16);

}  // namespace
