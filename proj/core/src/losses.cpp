#include "rnf/losses.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rnf {

double gaussian_nll(std::span<const double> y, std::span<const double> mean,
                    std::span<const double> sigma) {
  const std::size_t n = y.size();
  if (mean.size() != n || sigma.size() != n) {
    throw std::invalid_argument("gaussian_nll: argument lengths differ");
  }
  double log_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!(sigma[j] > 0.0)) throw std::invalid_argument("gaussian_nll: sigma must be positive");
    log_sum += std::log(sigma[j]);
  }
  double sq_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = (y[j] - mean[j]) / sigma[j];
    sq_sum += d * d;
  }
  return (log_sum + 0.5 * sq_sum) +
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

MissingnessMask full_mask(std::size_t length) {
  return MissingnessMask{std::vector<std::uint8_t>(length, 1), std::vector<std::uint8_t>(length, 1)};
}

MissingnessMask apply_missingness(std::size_t length, double rate, Rng& rng) {
  if (rate < 0.0 || rate > 1.0) {
    throw std::invalid_argument("apply_missingness: rate must be in [0,1]");
  }
  MissingnessMask mask;
  mask.input_present.resize(length);
  mask.obs_present.resize(length);
  for (std::size_t t = 0; t < length; ++t) mask.input_present[t] = rng.bernoulli(rate) ? 0 : 1;
  for (std::size_t t = 0; t < length; ++t) mask.obs_present[t] = rng.bernoulli(rate) ? 0 : 1;
  return mask;
}

SegmentDropout make_segment_dropout(std::size_t state_size, double rate, Rng& rng) {
  SegmentDropout d;
  d.propagation = make_dropout_mask(state_size, rate, rng);
  d.input_dynamics = make_dropout_mask(state_size, rate, rng);
  d.error_correction = make_dropout_mask(state_size, rate, rng);
  d.active = rate > 0.0;
  return d;
}

SegmentNoise SegmentNoise::draw(std::size_t length, std::size_t state_size, std::size_t samples,
                                Rng& rng) {
  SegmentNoise n;
  n.state_size = state_size;
  n.samples = samples;
  n.values.resize(length * 3 * samples * state_size);
  for (double& v : n.values) v = rng.normal();
  return n;
}

std::span<const double> SegmentNoise::at(std::size_t t, std::size_t stage,
                                         std::size_t sample) const {
  const std::size_t idx = ((t * 3 + stage) * samples + sample) * state_size;
  return {values.data() + idx, state_size};
}

namespace {

constexpr std::size_t kStageProp = 0;
constexpr std::size_t kStageInput = 1;
constexpr std::size_t kStageCorr = 2;

VarId taped_gaussian_nll(Tape& tape, VarId y, VarId mean, VarId sigma) {
  const std::size_t n = tape.value(mean).size();
  const VarId log_sum = tape.sum(tape.log(sigma));
  const VarId resid = tape.div(tape.sub(y, mean), sigma);
  const VarId sq = tape.scale(tape.sum(tape.square(resid)), 0.5);
  const VarId c =
      tape.constant_scalar(0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi));
  return tape.add(tape.add(log_sum, sq), c);
}

struct StageRecord {
  bool ran = false;
  VarId output = 0;          // encoder output s
  bool has_q = false;
  TapedGaussian q{};         // variational stats of this stage's output
};

}  // namespace

SegmentLossGraph build_segment_loss(Tape& tape, const RnfModel& model, const TrajectoryView& seg,
                                    const MissingnessMask& mask, const TrainConfig& config,
                                    const SegmentDropout* dropout, const SegmentNoise* noise) {
  if (mask.input_present.size() < seg.length || mask.obs_present.size() < seg.length) {
    throw std::invalid_argument("build_segment_loss: mask shorter than segment");
  }
  const bool variational = is_variational(model.variant);
  if (variational && noise == nullptr) {
    throw std::invalid_argument("build_segment_loss: variational variants need a noise bundle");
  }
  const std::size_t J = model.state_size;
  const std::size_t L = variational ? std::max<std::size_t>(1, config.train_samples) : 1;

  const BoundLstm phi_x = bind_lstm(tape, model.params, model.encoders.propagation);
  const BoundLstm phi_u = bind_lstm(tape, model.params, model.encoders.input_dynamics);
  const BoundLstm phi_y = bind_lstm(tape, model.params, model.encoders.error_correction);
  const BoundDecoder decoder = bind_decoder(tape, model.params, model.decoder);

  BoundHead head{};
  BoundKfPrior kf{};
  BoundNnPrior nn{};
  if (variational) {
    head = bind_head(tape, model.params, *model.head);
    if (model.variant == Variant::VrnfKf) kf = bind_kf_prior(tape, model.params, *model.kf_prior);
    if (model.variant == Variant::VrnfNn) nn = bind_nn_prior(tape, model.params, *model.nn_prior);
  }

  auto prior_step = [&](PriorStage stage, VarId cond_mean, VarId cond_var, VarId extra) {
    return model.variant == Variant::VrnfKf
               ? taped_kf_prior(tape, kf, stage, cond_mean, cond_var, extra)
               : taped_nn_prior(tape, nn, stage, cond_mean, cond_var, extra);
  };

  const VarId const_one = tape.constant(Tensor::vec({1.0}));
  TapedLstmState carry = taped_lstm_init(tape, J);

  // Conditioning statistics of the previous step's terminal stage; the
  // initial latent prior is standard normal.
  VarId prev_mean = tape.constant(Tensor({J}));
  VarId prev_var = tape.constant(Tensor::full({J}, 1.0));

  SegmentLossGraph graph;
  VarId recon = tape.constant_scalar(0.0);
  VarId kl_acc = tape.constant_scalar(0.0);

  for (std::size_t t = 0; t < seg.length; ++t) {
    const bool input_avail = seg.input_present(t) && mask.input_present[t];
    const bool obs_avail = seg.obs_present(t) && mask.obs_present[t];
    const bool scoreable = seg.obs_present(t);

    StageRecord stages[3];

    TapedLstmState prop = taped_lstm_step(tape, phi_x, carry, const_one);
    if (dropout && dropout->active) prop = taped_dropout(tape, prop, dropout->propagation);
    stages[kStageProp] = {true, prop.s, false, {}};
    TapedLstmState latest = prop;

    VarId u_const = 0;
    if (input_avail) {
      u_const = tape.constant(Tensor::vec({seg.input(t).begin(), seg.input(t).end()}));
      TapedLstmState in_stage = taped_lstm_step(tape, phi_u, latest, u_const);
      if (dropout && dropout->active) in_stage = taped_dropout(tape, in_stage, dropout->input_dynamics);
      stages[kStageInput] = {true, in_stage.s, false, {}};
      latest = in_stage;
    }
    VarId y_const = 0;
    if (obs_avail || scoreable) {
      y_const = tape.constant(Tensor::vec({seg.obs(t).begin(), seg.obs(t).end()}));
    }
    if (obs_avail) {
      TapedLstmState corr = taped_lstm_step(tape, phi_y, latest, y_const);
      if (dropout && dropout->active) corr = taped_dropout(tape, corr, dropout->error_correction);
      stages[kStageCorr] = {true, corr.s, false, {}};
      latest = corr;
    }
    carry = latest;

    auto stage_q = [&](std::size_t idx) -> const TapedGaussian& {
      StageRecord& rec = stages[idx];
      if (!rec.has_q) {
        rec.q = taped_latent_stats(tape, head, rec.output);
        rec.has_q = true;
      }
      return rec.q;
    };

    const double weights[3] = {config.alpha_x, 1.0, config.alpha_y};
    if (scoreable) {
      ++graph.scored_steps;
      for (std::size_t idx : {kStageProp, kStageInput, kStageCorr}) {
        if (!stages[idx].ran || weights[idx] == 0.0) continue;
        if (!variational) {
          const TapedGaussian pred = taped_emit_gaussian(tape, decoder, stages[idx].output);
          const VarId nll = taped_gaussian_nll(tape, y_const, pred.mean, pred.sigma);
          recon = tape.add(recon, tape.scale(nll, weights[idx]));
        } else {
          const TapedGaussian& q = stage_q(idx);
          VarId stage_nll = tape.constant_scalar(0.0);
          for (std::size_t l = 0; l < L; ++l) {
            const VarId eps = tape.constant(
                Tensor::vec({noise->at(t, idx, l).begin(), noise->at(t, idx, l).end()}));
            const VarId x = taped_draw_latent(tape, q, eps);
            const TapedGaussian pred = taped_emit_gaussian(tape, decoder, x);
            stage_nll = tape.add(stage_nll, taped_gaussian_nll(tape, y_const, pred.mean, pred.sigma));
          }
          recon = tape.add(recon, tape.scale(stage_nll, weights[idx] / static_cast<double>(L)));
        }
      }
    }

    if (variational) {
      TapedPrior priors[3];
      priors[kStageProp] = prior_step(PriorStage::Propagation, prev_mean, prev_var, 0);
      if (stages[kStageInput].ran) {
        priors[kStageInput] = prior_step(PriorStage::InputDynamics, prev_mean, prev_var, u_const);
      }
      if (stages[kStageCorr].ran) {
        // Conditioned on the same step's input-dynamics statistics
        // (propagation's when inputs were missing).
        const std::size_t pre = stages[kStageInput].ran ? kStageInput : kStageProp;
        const TapedGaussian& qp = stage_q(pre);
        priors[kStageCorr] = prior_step(PriorStage::ErrorCorrection, qp.mean,
                                        tape.square(qp.sigma), y_const);
      }

      if (!config.kl_all_stages) {
        const std::size_t deepest = stages[kStageInput].ran ? kStageInput : kStageProp;
        const TapedGaussian& q = stage_q(deepest);
        kl_acc = tape.add(kl_acc, taped_kl(tape, q.mean, q.sigma, priors[deepest].mean,
                                           priors[deepest].variance));
      } else {
        for (std::size_t idx : {kStageProp, kStageInput, kStageCorr}) {
          if (!stages[idx].ran || weights[idx] == 0.0) continue;
          const TapedGaussian& q = stage_q(idx);
          const VarId kl =
              taped_kl(tape, q.mean, q.sigma, priors[idx].mean, priors[idx].variance);
          kl_acc = tape.add(kl_acc, tape.scale(kl, weights[idx]));
        }
      }

      // Terminal stage statistics condition the next step's priors.
      std::size_t terminal = kStageProp;
      if (stages[kStageCorr].ran) {
        terminal = kStageCorr;
      } else if (stages[kStageInput].ran) {
        terminal = kStageInput;
      }
      const TapedGaussian& qt = stage_q(terminal);
      prev_mean = qt.mean;
      prev_var = tape.square(qt.sigma);
    }
  }

  graph.reconstruction = recon;
  graph.kl = kl_acc;
  graph.total = variational ? tape.add(recon, kl_acc) : recon;
  return graph;
}

double combined_loss(const RnfModel& model, const Trajectory& traj, const MissingnessMask& mask,
                     const TrainConfig& config) {
  if (is_variational(model.variant)) {
    throw std::invalid_argument("combined_loss: use vrnf_elbo_loss for variational variants");
  }
  Tape tape;
  const SegmentLossGraph g =
      build_segment_loss(tape, model, TrajectoryView::whole(traj), mask, config);
  return tape.value(g.total)[0];
}

double vrnf_elbo_loss(const RnfModel& model, const Trajectory& traj, const MissingnessMask& mask,
                      const TrainConfig& config, Rng& rng) {
  if (!is_variational(model.variant)) {
    throw std::invalid_argument("vrnf_elbo_loss: model variant is not variational");
  }
  Tape tape;
  const SegmentNoise noise = SegmentNoise::draw(
      traj.length, model.state_size, std::max<std::size_t>(1, config.train_samples), rng);
  const SegmentLossGraph g =
      build_segment_loss(tape, model, TrajectoryView::whole(traj), mask, config, nullptr, &noise);
  return tape.value(g.total)[0];
}

}  // namespace rnf
