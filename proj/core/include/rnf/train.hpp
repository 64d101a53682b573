#pragma once

#include <vector>

#include "rnf/dataset.hpp"
#include "rnf/losses.hpp"
#include "rnf/model.hpp"
#include "rnf/train_config.hpp"

namespace rnf {

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double wall_seconds = 0.0;
};

struct FitResult {
  std::vector<EpochRecord> log;
  double best_val = 0.0;
  std::size_t best_epoch = 0;
};

/// Mean one-step predictive NLL over the given trajectories with full
/// availability, no dropout and no artificial missingness. Variational
/// variants score with `samples` latent draws per step.
double validation_nll(const RnfModel& model, const std::vector<Trajectory>& data,
                      std::size_t samples, std::uint64_t seed);

/// Trains in place. Trajectories are cut into config.segment_length
/// segments that start from a zero belief state; segments are shuffled
/// globally each epoch into minibatches, with fresh missingness masks and
/// dropout masks per segment per epoch. The model with the best validation
/// NLL is kept; training stops after config.patience epochs without
/// improvement or at config.max_epochs.
FitResult fit(RnfModel& model, const std::vector<Trajectory>& train,
              const std::vector<Trajectory>& validation, const TrainConfig& config);

/// One hyperparameter draw of random_search. Candidates whose training or
/// validation fails numerically (the grid's aggressive corner settings can
/// diverge) are kept with val_nll = +inf and the failure message.
struct SearchCandidate {
  std::size_t index = 0;
  TrainConfig config;
  double val_nll = 0.0;
  bool failed = false;
  std::string error;
};

struct SearchGrid {
  std::vector<double> dropout{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::size_t> state_size{5, 10, 25, 50, 100, 150};
  std::vector<std::size_t> minibatch{256, 512, 1024};
  std::vector<double> learning_rate{1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  std::vector<double> max_grad_norm{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
  std::vector<double> missing_rate{0.25, 0.5, 0.75};

  std::size_t combinations() const;
};

/// Uniform sampling without replacement from the grid cross-product; every
/// candidate trains from scratch with a seed derived from the base config
/// seed and its draw index. The leaderboard is sorted by validation NLL.
/// Asking for more iterations than the grid holds returns the whole grid.
std::vector<SearchCandidate> random_search(const SearchGrid& grid, std::size_t iterations,
                                           const TrainConfig& base,
                                           const std::vector<Trajectory>& train,
                                           const std::vector<Trajectory>& validation);

}  // namespace rnf
