#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rnf/activations.hpp"
#include "rnf/gradcheck.hpp"
#include "rnf/losses.hpp"
#include "test_util.hpp"

using namespace rnf;

namespace {

TrainConfig toy_config(Variant variant) {
  TrainConfig cfg;
  cfg.variant = variant;
  cfg.alpha_x = 1.0;
  cfg.alpha_y = 1.0;
  cfg.train_samples = 1;
  return cfg;
}

/// Plain-path reference: the input-dynamics reconstruction sum with full
/// data, accumulated step by step exactly like the taped builder.
double input_only_loss(const RnfModel& model, const Trajectory& traj) {
  BeliefState belief = initial_belief(model.state_size);
  double loss = 0.0;
  for (std::size_t t = 0; t < traj.length; ++t) {
    const LstmState prop = propagate(model.params, model.encoders, belief);
    const LstmState in_stage = apply_input(model.params, model.encoders, prop, traj.input(t));
    const LstmState corr = correct(model.params, model.encoders, in_stage, traj.obs(t));
    const GaussianPrediction pred = emit_gaussian(model.params, model.decoder, in_stage.s);
    loss += gaussian_nll(traj.obs(t), pred.mean, pred.sigma);
    belief.propagation = prop;
    belief.input_dynamics = in_stage;
    belief.error_correction = corr;
    belief.has_input_stage = true;
    belief.has_correction_stage = true;
  }
  return loss;
}

double stage_loss(const RnfModel& model, const Trajectory& traj, int which) {
  BeliefState belief = initial_belief(model.state_size);
  double loss = 0.0;
  for (std::size_t t = 0; t < traj.length; ++t) {
    const LstmState prop = propagate(model.params, model.encoders, belief);
    const LstmState in_stage = apply_input(model.params, model.encoders, prop, traj.input(t));
    const LstmState corr = correct(model.params, model.encoders, in_stage, traj.obs(t));
    const LstmState& source = which == 0 ? prop : which == 1 ? in_stage : corr;
    const GaussianPrediction pred = emit_gaussian(model.params, model.decoder, source.s);
    loss += gaussian_nll(traj.obs(t), pred.mean, pred.sigma);
    belief.propagation = prop;
    belief.input_dynamics = in_stage;
    belief.error_correction = corr;
    belief.has_input_stage = true;
    belief.has_correction_stage = true;
  }
  return loss;
}

}  // namespace

TEST_SUITE("losses") {

TEST_CASE("gaussian_nll analytic values") {
  CHECK(gaussian_nll(std::array{1.0}, std::array{1.0}, std::array{1.0}) ==
        doctest::Approx(0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-12));
  CHECK(gaussian_nll(std::array{2.0}, std::array{1.0}, std::array{1.0}) ==
        doctest::Approx(0.5 * std::log(2.0 * std::numbers::pi) + 0.5).epsilon(1e-12));
  CHECK_THROWS_AS(gaussian_nll(std::array{0.0}, std::array{0.0}, std::array{0.0}),
                  std::invalid_argument);
}

TEST_CASE("gaussian_nll matches the direct density oracle") {
  Rng rng(71);
  for (int i = 0; i < 10000; ++i) {
    const std::size_t d = 1 + static_cast<std::size_t>(rng.below(3));
    std::vector<double> y(d), mu(d), sigma(d);
    for (std::size_t j = 0; j < d; ++j) {
      y[j] = rng.normal() * 2.0;
      mu[j] = rng.normal();
      sigma[j] = rng.uniform(0.2, 3.0);
    }
    double density = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double z = (y[j] - mu[j]) / sigma[j];
      density *= std::exp(-0.5 * z * z) / (sigma[j] * std::sqrt(2.0 * std::numbers::pi));
    }
    const double direct = -std::log(density);
    const double nll = gaussian_nll(y, mu, sigma);
    CHECK(std::abs(nll - direct) / std::max(1.0, std::abs(direct)) < 1e-10);
  }
}

TEST_CASE("combined loss with zero alphas equals the input-only loss exactly") {
  const RnfModel model = make_model(Variant::Rnf, 4, 2, 1, 101);
  const Trajectory traj = rnf::test::random_trajectory(9, 2, 1, 102);
  TrainConfig cfg = toy_config(Variant::Rnf);
  cfg.alpha_x = 0.0;
  cfg.alpha_y = 0.0;
  const double combined = combined_loss(model, traj, full_mask(traj.length), cfg);
  CHECK(combined == input_only_loss(model, traj));
}

TEST_CASE("combined loss with unit alphas equals the sum of stage sums") {
  const RnfModel model = make_model(Variant::Rnf, 4, 2, 1, 103);
  const Trajectory traj = rnf::test::random_trajectory(7, 2, 1, 104);
  const TrainConfig cfg = toy_config(Variant::Rnf);
  const double combined = combined_loss(model, traj, full_mask(traj.length), cfg);
  const double split = stage_loss(model, traj, 0) + stage_loss(model, traj, 1) +
                       stage_loss(model, traj, 2);
  CHECK(combined == doctest::Approx(split).epsilon(1e-12));
}

TEST_CASE("combined loss gradient matches finite differences on a toy trajectory") {
  RnfModel model = make_model(Variant::Rnf, 3, 2, 1, 105);
  const Trajectory traj = rnf::test::random_trajectory(5, 2, 1, 106);
  Rng mask_rng(107);
  const MissingnessMask mask = apply_missingness(traj.length, 0.5, mask_rng);
  const TrainConfig cfg = toy_config(Variant::Rnf);

  auto build = [&](Tape& tape) {
    return build_segment_loss(tape, model, TrajectoryView::whole(traj), mask, cfg).total;
  };
  const GradCheckReport report = gradient_check(build, model.params, 1e-5);
  CAPTURE(report.worst_param);
  CHECK(report.max_rel_error < 1e-5);
}

TEST_CASE("stages masked out contribute no gradient") {
  RnfModel model = make_model(Variant::Rnf, 3, 2, 1, 109);
  const Trajectory traj = rnf::test::random_trajectory(6, 2, 1, 110);
  MissingnessMask mask = full_mask(traj.length);
  std::fill(mask.input_present.begin(), mask.input_present.end(), 0);
  const TrainConfig cfg = toy_config(Variant::Rnf);

  Tape tape;
  const SegmentLossGraph g =
      build_segment_loss(tape, model, TrajectoryView::whole(traj), mask, cfg);
  const Gradients grads = tape.backward(g.total, model.params);
  for (std::size_t gate = 0; gate < 4; ++gate) {
    for (const double v : grads[model.encoders.input_dynamics.W[gate]].values()) CHECK(v == 0.0);
    for (const double v : grads[model.encoders.input_dynamics.R[gate]].values()) CHECK(v == 0.0);
    for (const double v : grads[model.encoders.input_dynamics.b[gate]].values()) CHECK(v == 0.0);
  }
  // the propagation encoder still learns
  double prop_grad = 0.0;
  for (std::size_t gate = 0; gate < 4; ++gate) {
    for (const double v : grads[model.encoders.propagation.R[gate]].values()) prop_grad += std::abs(v);
  }
  CHECK(prop_grad > 0.0);
}

TEST_CASE("elbo with prior equal to posterior reduces to reconstruction") {
  RnfModel model = make_model(Variant::VrnfNn, 3, 2, 1, 111);
  // Zero everything: every stage output is zero, the posterior is
  // N(0, softplus(0)^2) and the zero-weight prior matches it exactly.
  for (ParamId id = 0; id < model.params.count(); ++id) {
    for (double& v : model.params.value(id).values()) v = 0.0;
  }
  const Trajectory traj = rnf::test::random_trajectory(6, 2, 1, 112);
  const TrainConfig cfg = toy_config(Variant::VrnfNn);

  Tape tape;
  Rng rng(113);
  const SegmentNoise noise = SegmentNoise::draw(traj.length, 3, 1, rng);
  const SegmentLossGraph g = build_segment_loss(tape, model, TrajectoryView::whole(traj),
                                                full_mask(traj.length), cfg, nullptr, &noise);
  CHECK(std::abs(tape.value(g.kl)[0]) < 1e-12);
  CHECK(tape.value(g.total)[0] ==
        doctest::Approx(tape.value(g.reconstruction)[0]).epsilon(1e-12));
}

TEST_CASE("elbo is bit-repeatable under a frozen seed") {
  const RnfModel model = make_model(Variant::VrnfKf, 3, 2, 1, 115);
  const Trajectory traj = rnf::test::random_trajectory(8, 2, 1, 116);
  const TrainConfig cfg = toy_config(Variant::VrnfKf);
  Rng rng_a(117), rng_b(117);
  const double a = vrnf_elbo_loss(model, traj, full_mask(traj.length), cfg, rng_a);
  const double b = vrnf_elbo_loss(model, traj, full_mask(traj.length), cfg, rng_b);
  CHECK(a == b);
}

TEST_CASE("elbo rejects non-variational models and vice versa") {
  const RnfModel rnf_model = make_model(Variant::Rnf, 2, 1, 1, 119);
  const RnfModel vrnf_model = make_model(Variant::VrnfKf, 2, 1, 1, 120);
  const Trajectory traj = rnf::test::random_trajectory(4, 1, 1, 121);
  const MissingnessMask mask = full_mask(traj.length);
  Rng rng(122);
  CHECK_THROWS_AS(vrnf_elbo_loss(rnf_model, traj, mask, toy_config(Variant::Rnf), rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(combined_loss(vrnf_model, traj, mask, toy_config(Variant::VrnfKf)),
                  std::invalid_argument);
}

TEST_CASE("elbo gradients match finite differences with frozen noise") {
  for (const Variant variant : {Variant::VrnfKf, Variant::VrnfNn}) {
    CAPTURE(variant_name(variant));
    RnfModel model = make_model(variant, 3, 2, 1, 123);
    const Trajectory traj = rnf::test::random_trajectory(5, 2, 1, 124);
    Rng mask_rng(125);
    const MissingnessMask mask = apply_missingness(traj.length, 0.5, mask_rng);
    Rng noise_rng(126);
    const SegmentNoise noise = SegmentNoise::draw(traj.length, 3, 1, noise_rng);
    const TrainConfig cfg = toy_config(variant);

    auto build = [&](Tape& tape) {
      return build_segment_loss(tape, model, TrajectoryView::whole(traj), mask, cfg, nullptr,
                                &noise)
          .total;
    };
    const GradCheckReport report = gradient_check(build, model.params, 1e-5);
    CAPTURE(report.worst_param);
    CHECK(report.max_rel_error < 1e-5);
  }
}

TEST_CASE("elbo gradients with all-stage KL") {
  RnfModel model = make_model(Variant::VrnfNn, 2, 1, 1, 127);
  const Trajectory traj = rnf::test::random_trajectory(4, 1, 1, 128);
  Rng noise_rng(129);
  const SegmentNoise noise = SegmentNoise::draw(traj.length, 2, 1, noise_rng);
  TrainConfig cfg = toy_config(Variant::VrnfNn);
  cfg.kl_all_stages = true;
  auto build = [&](Tape& tape) {
    return build_segment_loss(tape, model, TrajectoryView::whole(traj), full_mask(traj.length),
                              cfg, nullptr, &noise)
        .total;
  };
  CHECK(gradient_check(build, model.params, 1e-5).max_rel_error < 1e-5);
}

TEST_CASE("gradients flow through dropout masks unchanged in expectation structure") {
  RnfModel model = make_model(Variant::Rnf, 3, 2, 1, 131);
  const Trajectory traj = rnf::test::random_trajectory(5, 2, 1, 132);
  Rng rng(133);
  const SegmentDropout dropout = make_segment_dropout(3, 0.4, rng);
  const TrainConfig cfg = toy_config(Variant::Rnf);
  auto build = [&](Tape& tape) {
    return build_segment_loss(tape, model, TrajectoryView::whole(traj), full_mask(traj.length),
                              cfg, &dropout)
        .total;
  };
  CHECK(gradient_check(build, model.params, 1e-5).max_rel_error < 1e-5);
}

TEST_CASE("apply_missingness degenerate and concentration") {
  Rng rng(135);
  const MissingnessMask none = apply_missingness(100, 0.0, rng);
  for (std::size_t t = 0; t < 100; ++t) {
    CHECK(none.input_present[t] == 1);
    CHECK(none.obs_present[t] == 1);
  }
  const MissingnessMask all = apply_missingness(100, 1.0, rng);
  for (std::size_t t = 0; t < 100; ++t) {
    CHECK(all.input_present[t] == 0);
    CHECK(all.obs_present[t] == 0);
  }
  CHECK_THROWS_AS(apply_missingness(10, -0.1, rng), std::invalid_argument);

  const std::size_t T = 10000;
  const MissingnessMask half = apply_missingness(T, 0.5, rng);
  double keep_u = 0.0, keep_y = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    keep_u += half.input_present[t];
    keep_y += half.obs_present[t];
  }
  CHECK(keep_u / T > 0.48);
  CHECK(keep_u / T < 0.52);
  CHECK(keep_y / T > 0.48);
  CHECK(keep_y / T < 0.52);
}

TEST_CASE("true missing observations drop scoring entirely") {
  const RnfModel model = make_model(Variant::Rnf, 3, 2, 1, 137);
  Trajectory traj = rnf::test::random_trajectory(6, 2, 1, 138);
  traj.obs_present[2] = 0;
  traj.obs_present[4] = 0;
  Tape tape;
  const SegmentLossGraph g = build_segment_loss(tape, model, TrajectoryView::whole(traj),
                                                full_mask(traj.length), toy_config(Variant::Rnf));
  CHECK(g.scored_steps == 4);
}

}  // TEST_SUITE
