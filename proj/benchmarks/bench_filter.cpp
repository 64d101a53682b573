#include <benchmark/benchmark.h>

#include "rnf/inference.hpp"

namespace {

using namespace rnf;

void BM_FilterStep(benchmark::State& state) {
  const auto J = static_cast<std::size_t>(state.range(0));
  const RnfModel model = make_model(Variant::Rnf, J, 2, 1, 3);
  BeliefState belief = initial_belief(J);
  const std::vector<double> u{0.4, -0.9};
  const std::vector<double> y{0.2};

  for (auto _ : state) {
    FilterOutput out = filter_step(model, belief, {true, true}, u, y);
    belief = std::move(out.belief);
    benchmark::DoNotOptimize(belief.error_correction.s.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FilterStep)->Arg(10)->Arg(25)->Arg(100);

void BM_MultistepForecast(benchmark::State& state) {
  const RnfModel model = make_model(Variant::Rnf, 25, 2, 1, 3);
  BeliefState belief = initial_belief(25);
  const std::vector<double> u{0.4, -0.9};
  const std::vector<double> y{0.2};
  for (int t = 0; t < 5; ++t) belief = filter_step(model, belief, {true, true}, u, y).belief;

  const auto horizon = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    const auto preds = multistep_forecast(model, belief, horizon, ForecastInputs::Unknown);
    benchmark::DoNotOptimize(preds.data());
  }
  state.SetItemsProcessed(state.iterations() * horizon);
}
BENCHMARK(BM_MultistepForecast)->Arg(5)->Arg(20);

}  // namespace
