#pragma once

#include <span>
#include <vector>

#include "rnf/dataset.hpp"
#include "rnf/lstm.hpp"
#include "rnf/model.hpp"
#include "rnf/priors.hpp"
#include "rnf/rng.hpp"
#include "rnf/tape.hpp"
#include "rnf/train_config.hpp"

namespace rnf {

/// Negative Gaussian log density with diagonal covariance, summed over
/// dimensions: 0.5 * sum_j [ log(2 pi sigma_j^2) + ((y_j-mu_j)/sigma_j)^2 ].
double gaussian_nll(std::span<const double> y, std::span<const double> mean,
                    std::span<const double> sigma);

/// Per-step artificial missingness flags for the two data streams.
/// Propagation is never masked; these only gate the input-dynamics and
/// error-correction encoders.
struct MissingnessMask {
  std::vector<std::uint8_t> input_present;
  std::vector<std::uint8_t> obs_present;
};

MissingnessMask full_mask(std::size_t length);

/// Independent Bernoulli(1-rate) per step per stream.
MissingnessMask apply_missingness(std::size_t length, double rate, Rng& rng);

/// A window into a trajectory, used to unroll one training segment.
struct TrajectoryView {
  const Trajectory* traj = nullptr;
  std::size_t offset = 0;
  std::size_t length = 0;

  static TrajectoryView whole(const Trajectory& t) { return {&t, 0, t.length}; }
  std::span<const double> input(std::size_t t) const { return traj->input(offset + t); }
  std::span<const double> obs(std::size_t t) const { return traj->obs(offset + t); }
  bool input_present(std::size_t t) const { return traj->input_present[offset + t] != 0; }
  bool obs_present(std::size_t t) const { return traj->obs_present[offset + t] != 0; }
};

/// One dropout mask per encoder, sampled per segment and shared across its
/// steps.
struct SegmentDropout {
  DropoutMask propagation, input_dynamics, error_correction;
  bool active = false;
};

SegmentDropout make_segment_dropout(std::size_t state_size, double rate, Rng& rng);

/// Pre-drawn standard normals for reparameterised sampling, laid out as
/// [step][stage][sample][j] with stage order propagation, input dynamics,
/// error correction. Drawing the full layout regardless of the mask keeps
/// a segment's noise aligned when stages are skipped.
struct SegmentNoise {
  std::size_t state_size = 0;
  std::size_t samples = 0;
  std::vector<double> values;

  static SegmentNoise draw(std::size_t length, std::size_t state_size, std::size_t samples,
                           Rng& rng);
  std::span<const double> at(std::size_t t, std::size_t stage, std::size_t sample) const;
};

/// Scalar loss graph for one segment: reconstruction + KL (the latter zero
/// for the standard variant). scored_steps counts the steps whose target
/// was genuinely known, which callers use to form per-step means.
struct SegmentLossGraph {
  VarId total = 0;
  VarId reconstruction = 0;
  VarId kl = 0;
  std::size_t scored_steps = 0;
};

/// Unrolls the encoder stack over a segment and assembles the training
/// loss. Every stage that ran on a step with a known target is decoded by
/// the shared decoder and scored, weighted 1 for input dynamics, alpha_x
/// for propagation and alpha_y for error correction. Masked stages are
/// never built, so they contribute neither loss nor gradient.
///
/// For variational variants each scored stage is scored through `samples`
/// reparameterised draws, and the analytic KL against the stage prior is
/// added: by default the deepest active stage's KL per step, or every
/// active stage's (alpha-weighted) when kl_all_stages is set.
SegmentLossGraph build_segment_loss(Tape& tape, const RnfModel& model, const TrajectoryView& seg,
                                    const MissingnessMask& mask, const TrainConfig& config,
                                    const SegmentDropout* dropout = nullptr,
                                    const SegmentNoise* noise = nullptr);

/// Multi-encoder loss over a whole trajectory (standard variant).
double combined_loss(const RnfModel& model, const Trajectory& traj, const MissingnessMask& mask,
                     const TrainConfig& config);

/// Negative evidence lower bound over a whole trajectory (variational
/// variants); rng supplies the reparameterisation noise.
double vrnf_elbo_loss(const RnfModel& model, const Trajectory& traj, const MissingnessMask& mask,
                      const TrainConfig& config, Rng& rng);

}  // namespace rnf
