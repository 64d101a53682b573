#include <benchmark/benchmark.h>

#include "rnf/losses.hpp"
#include "rnf/model.hpp"

namespace {

using namespace rnf;

Trajectory bench_trajectory(std::size_t length, std::size_t input_dim, std::size_t obs_dim) {
  Trajectory t = make_trajectory(length, input_dim, obs_dim);
  Rng rng(1);
  for (double& v : t.inputs) v = rng.normal();
  for (double& v : t.observations) v = rng.normal();
  return t;
}

void BM_SegmentForwardBackward(benchmark::State& state) {
  const auto J = static_cast<std::size_t>(state.range(0));
  const RnfModel model = make_model(Variant::Rnf, J, 1, 1, 7);
  const Trajectory traj = bench_trajectory(50, 1, 1);
  TrainConfig cfg;
  cfg.variant = Variant::Rnf;
  const MissingnessMask mask = full_mask(traj.length);

  for (auto _ : state) {
    Tape tape;
    const SegmentLossGraph g =
        build_segment_loss(tape, model, TrajectoryView::whole(traj), mask, cfg);
    Gradients grads = tape.backward(g.total, model.params);
    benchmark::DoNotOptimize(grads.slots.data());
  }
  state.SetItemsProcessed(state.iterations() * 50);
}
BENCHMARK(BM_SegmentForwardBackward)->Arg(10)->Arg(25)->Arg(50);

void BM_ElboSegment(benchmark::State& state) {
  const auto J = static_cast<std::size_t>(state.range(0));
  const RnfModel model = make_model(Variant::VrnfKf, J, 1, 1, 7);
  const Trajectory traj = bench_trajectory(50, 1, 1);
  TrainConfig cfg;
  cfg.variant = Variant::VrnfKf;
  const MissingnessMask mask = full_mask(traj.length);
  Rng rng(11);
  const SegmentNoise noise = SegmentNoise::draw(traj.length, J, 1, rng);

  for (auto _ : state) {
    Tape tape;
    const SegmentLossGraph g =
        build_segment_loss(tape, model, TrajectoryView::whole(traj), mask, cfg, nullptr, &noise);
    Gradients grads = tape.backward(g.total, model.params);
    benchmark::DoNotOptimize(grads.slots.data());
  }
  state.SetItemsProcessed(state.iterations() * 50);
}
BENCHMARK(BM_ElboSegment)->Arg(10)->Arg(25);

}  // namespace
